#pragma once

// Runs the snipq binary through the shell and captures its output.

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "test_paths.hpp"

namespace testing {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

inline std::string shell_quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

/// `stdin_text` is fed through a temporary file when non-empty.
inline RunResult run_cli(const std::vector<std::string>& args, const std::string& stdin_text = {}) {
  TempDir tmp;
  std::string cmd = shell_quote(SNIPQ_CLI);
  for (const auto& a : args) cmd += " " + shell_quote(a);
  cmd += " 2>" + shell_quote((tmp / "err").string());
  cmd += " <" + (stdin_text.empty() ? std::string("/dev/null") : shell_quote(tmp.write("in", stdin_text).string()));
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed");
  RunResult r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(tmp / "err");
  return r;
}

}  // namespace testing
