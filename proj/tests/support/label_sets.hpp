#pragma once

// Label sets rebuilt from reported summary statistics.

#include <vector>

#include "snipq/evaluation.hpp"

namespace testing {

/// Gold labels with `positives` ones followed by `negatives` zeros.
inline std::vector<int> gold_labels(std::size_t positives, std::size_t negatives) {
  std::vector<int> g(positives, 1);
  g.resize(positives + negatives, 0);
  return g;
}

/// 100 queries x 5 snippets: 60 queries with 5 relevant, 21 with 1, 2 with 2 and 17 with
/// none. 500 pairs, 325 relevant, 83 queries with at least one.
inline std::vector<snipq::QueryJudgements> tfidf_retrieval_judgements() {
  std::vector<snipq::QueryJudgements> out;
  auto add = [&](std::size_t count, std::vector<int> labels) {
    for (std::size_t i = 0; i < count; ++i) {
      const auto id = "q" + std::to_string(out.size());
      const auto cat = static_cast<snipq::QueryCategory>(out.size() % 3);
      out.push_back({id, cat, labels});
    }
  };
  add(60, {1, 1, 1, 1, 1});
  add(21, {1, 0, 0, 0, 0});
  add(2, {1, 1, 0, 0, 0});
  add(17, {0, 0, 0, 0, 0});
  return out;
}

}  // namespace testing
