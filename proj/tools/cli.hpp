#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ricci::cli {

/// Exit statuses.
enum ExitCode : int {
  kPass = 0,
  kViolation = 1,
  kInfeasible = 2,
  kInputError = 3,
};

struct RunConfig {
  std::string command;

  // chain source: a file, or a builder
  std::optional<std::filesystem::path> chain_file;
  std::string model = "mmk";  // mmk | ou | walk
  int n0 = 5;
  int k = 10;
  std::optional<int> trunc;
  /// OU contraction or jump-process drift; defaults 0.5 and 1.
  std::optional<double> alpha;
  double grid_step = 0.05;
  double grid_width = 10.0;
  double walk_p = 0.3;

  std::optional<double> epsilon;
  std::optional<std::size_t> origin;
  std::string strategy = "paper";  // paper | grid | convex
  std::optional<std::string> levels;
  std::optional<std::string> epsilons;
  std::optional<double> reference;

  // jump process
  std::uint64_t seed = 1;
  std::size_t paths = 1000000;
  double horizon = 25.0;
  bool write_samples = false;

  std::filesystem::path out = ".";
  std::string format = "csv";  // csv | json
};

/// Parses "a:b:step" into a, a + step, ... up to b (inclusive within 1e-9).
std::vector<double> parse_range(const std::string& text);

/// Runs one command; writes artifacts under config.out and a summary to `log`.
int run(const RunConfig& config, std::ostream& log);

/// Command-line entry point.
int main_entry(int argc, char** argv);

}  // namespace ricci::cli
