#include "mlpdyn/data.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "mlpdyn/error.hpp"
#include "mlpdyn/io.hpp"
#include "mlpdyn/rng.hpp"

namespace mlpdyn {

void Dataset::validate() const {
  if (x.empty()) throw ValidationError("dataset: n must be >= 1");
  if (x.size() != y.size()) throw ValidationError("dataset: x and y lengths differ");
  if (!std::isfinite(tau) || tau < 0.0) throw ValidationError("dataset: tau must be finite and >= 0");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw ValidationError("dataset: non-finite value in row " + std::to_string(i + 1));
    }
  }
  (void)teacher();
}

Dataset generate(std::size_t n, double tau, std::uint64_t seed, Teacher teacher) {
  if (n == 0) throw ValidationError("generate: n must be >= 1");
  if (!std::isfinite(tau)) throw ValidationError("generate: tau must be finite");
  if (tau < 0.0) throw ValidationError("generate: tau must be >= 0");

  Dataset d;
  d.tau = tau;
  d.seed = seed;
  d.target_id = std::string(teacher_id(teacher));
  d.x.resize(n);
  d.y.resize(n);
  RandomStream inputs(seed, Stream::inputs);
  RandomStream noise(seed, Stream::noise);
  for (std::size_t i = 0; i < n; ++i) {
    d.x[i] = inputs.normal();
    const double xi = noise.normal();
    d.y[i] = teacher_value(teacher, d.x[i]);
    if (tau > 0.0) d.y[i] += tau * xi;
  }
  return d;
}

std::string fingerprint(const Dataset& dataset) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t word) {
    for (int b = 0; b < 8; ++b) {
      h ^= (word >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  mix(dataset.x.size());
  for (std::size_t i = 0; i < dataset.x.size(); ++i) {
    mix(std::bit_cast<std::uint64_t>(dataset.x[i]));
    mix(std::bit_cast<std::uint64_t>(dataset.y[i]));
  }
  mix(std::bit_cast<std::uint64_t>(dataset.tau));
  mix(dataset.seed);
  for (char c : dataset.target_id) mix(static_cast<unsigned char>(c));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".json");
  return p;
}

void save(const Dataset& dataset, const std::filesystem::path& csv_path) {
  dataset.validate();
  std::ostringstream csv;
  csv << "x,y\n";
  for (std::size_t i = 0; i < dataset.n(); ++i) {
    csv << format_double(dataset.x[i]) << ',' << format_double(dataset.y[i]) << '\n';
  }
  write_text_file(csv_path, csv.str());

  nlohmann::ordered_json meta;
  meta["n"] = dataset.n();
  meta["tau"] = dataset.tau;
  meta["seed"] = dataset.seed;
  meta["target_id"] = dataset.target_id;
  meta["generator_name"] = kGeneratorName;
  write_text_file(sidecar_path(csv_path), meta.dump(2) + "\n");
}

Dataset load(const std::filesystem::path& csv_path) {
  const auto meta_path = sidecar_path(csv_path);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_text_file(meta_path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(meta_path.string() + ": " + e.what());
  }

  Dataset d;
  std::size_t n = 0;
  try {
    n = meta.at("n").get<std::size_t>();
    d.tau = meta.at("tau").get<double>();
    d.seed = meta.at("seed").get<std::uint64_t>();
    d.target_id = meta.at("target_id").get<std::string>();
    (void)meta.at("generator_name").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(meta_path.string() + ": " + e.what());
  }

  const auto rows = parse_csv(read_text_file(csv_path), csv_path.string());
  if (rows.header != std::vector<std::string>{"x", "y"}) {
    throw FormatError(csv_path.string() + ": expected header 'x,y'");
  }
  if (rows.values.size() != n) {
    throw FormatError(csv_path.string() + ": sidecar declares n=" + std::to_string(n) + " but file has " +
                      std::to_string(rows.values.size()) + " rows");
  }
  for (const auto& row : rows.values) {
    d.x.push_back(row[0]);
    d.y.push_back(row[1]);
  }
  try {
    d.validate();
  } catch (const ValidationError& e) {
    throw FormatError(csv_path.string() + ": " + e.what());
  }
  return d;
}

}  // namespace mlpdyn
