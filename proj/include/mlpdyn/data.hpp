#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mlpdyn/model.hpp"

namespace mlpdyn {

// Noisy teacher sample {(x_i, y_i)}, y_i = T(x_i) + xi_i, xi_i ~ N(0, tau^2).
struct Dataset {
  std::vector<double> x;
  std::vector<double> y;
  double tau = 0.0;
  std::uint64_t seed = 0;
  std::string target_id = "2tanh";

  std::size_t n() const { return x.size(); }
  Teacher teacher() const { return teacher_from_id(target_id); }

  // Checks the invariants (n >= 1, equal lengths, finite entries, tau >= 0).
  void validate() const;

  bool operator==(const Dataset&) const = default;
};

// x_i ~ N(0, 1) from Stream::inputs and xi_i ~ N(0, 1) from Stream::noise,
// so the x sample does not depend on tau.
Dataset generate(std::size_t n, double tau, std::uint64_t seed, Teacher teacher = Teacher::two_tanh);

// Stable 64-bit FNV-1a hash over the bit patterns of x, y and the metadata.
std::string fingerprint(const Dataset& dataset);

// CSV "x,y" plus a sidecar JSON {n, tau, seed, target_id, generator_name}
// next to it (same stem, ".json" extension).
void save(const Dataset& dataset, const std::filesystem::path& csv_path);
Dataset load(const std::filesystem::path& csv_path);

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

}  // namespace mlpdyn
