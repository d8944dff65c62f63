// Serial reference vs OpenMP kernels on a generated corpus.
// Run with OMP_NUM_THREADS set to compare thread counts.

#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "snipq/ranking.hpp"
#include "snipq/tfidf.hpp"

namespace {

using namespace snipq;

struct Fixture {
  EntityDatabase db;
  std::shared_ptr<const TfIdfIndex> index;
  Query query;
};

std::string sentence(std::mt19937_64& rng, const std::vector<std::string>& words, int length) {
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  std::string s;
  for (int i = 0; i < length; ++i) s += (i ? " " : "") + words[pick(rng)];
  return s;
}

const Fixture& fixture(std::size_t entities) {
  static std::map<std::size_t, std::unique_ptr<Fixture>> cache;
  auto& slot = cache[entities];
  if (slot) return *slot;

  std::mt19937_64 rng(entities);
  std::vector<std::string> words;
  for (int i = 0; i < 3000; ++i) words.push_back("w" + std::to_string(i));
  std::vector<EntityRecord> records;
  for (std::size_t e = 0; e < entities; ++e) {
    EntityRecord r;
    r.id = "e" + std::to_string(e);
    r.description = sentence(rng, words, 12);
    for (int k = 0; k < 20; ++k) r.reviews.push_back({sentence(rng, words, 30), 4 + k % 2});
    records.push_back(std::move(r));
  }
  slot = std::make_unique<Fixture>();
  slot->db = EntityDatabase::build(std::move(records));
  slot->index = std::make_shared<const TfIdfIndex>(TfIdfIndex::build(slot->db.snippets()));
  slot->query.id = "q";
  slot->query.text = sentence(rng, words, 8);
  return *slot;
}

void BM_RankSerial(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  const TfIdfProvider provider(f.index);
  const EntitySubset all(f.db);
  for (auto _ : state) benchmark::DoNotOptimize(rank_and_select_serial(provider, f.query, all, {}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.db.snippets().size()));
}

void BM_RankParallel(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  const TfIdfProvider provider(f.index);
  const EntitySubset all(f.db);
  for (auto _ : state) benchmark::DoNotOptimize(rank_and_select(provider, f.query, all, {}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.db.snippets().size()));
}

void BM_ScoreAllSerial(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  const auto v = f.index->vectorize(f.query.text);
  for (auto _ : state) benchmark::DoNotOptimize(f.index->score_all_serial(v));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.index->doc_count()));
}

void BM_ScoreAllParallel(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  const auto v = f.index->vectorize(f.query.text);
  for (auto _ : state) benchmark::DoNotOptimize(f.index->score_all(v));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.index->doc_count()));
}

BENCHMARK(BM_RankSerial)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RankParallel)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoreAllSerial)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoreAllParallel)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
