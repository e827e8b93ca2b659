#pragma once

// Property suites behind `mlpdyn verify`.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mlpdyn::verify {

struct Options {
  std::vector<std::string> suites;  // empty = all
  bool break_gradient = false;      // scales dv_1 by 1.001 in the gradient suite
  std::size_t num_datasets = 10'000;
  std::size_t mc_samples = 1'000'000;
  std::uint64_t seed = 12345;
  std::size_t workers = 1;
};

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

const std::vector<std::string>& suite_names();

// Throws ValidationError for an unknown suite name.
std::vector<SuiteResult> run(const Options& options);

void print_table(std::ostream& out, const std::vector<SuiteResult>& results);

}  // namespace mlpdyn::verify
