#include "topolow/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "topolow/common.hpp"
#include "topolow/configuration.hpp"
#include "topolow/csv_io.hpp"

namespace topolow {

namespace {

constexpr int kMaskAttempts = 100;

enum Stream : std::uint64_t { kGroundTruth = 1, kDistortion = 2, kMask = 3 };

// Linear interpolation between order statistics (R's default quantile).
double quantile(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double bend(double e, double a, double b, double p) {
  if (!(b > a)) return e;
  return a + (b - a) * std::pow((e - a) / (b - a), p);
}

}  // namespace

DenseMatrix generate_ground_truth(std::size_t m, std::size_t clusters, std::uint64_t seed, std::size_t dimension) {
  if (clusters < 1 || m < clusters) throw DomainError("ground truth needs m >= clusters >= 1");
  if (dimension < 1) throw DomainError("ground truth needs dimension >= 1");
  Rng rng(seed);
  std::uniform_real_distribution<double> centre(0.0, 10.0);
  std::normal_distribution<double> offset(0.0, 1.0);
  DenseMatrix centres(clusters, dimension);
  for (double& v : centres.data()) v = centre(rng);
  DenseMatrix out(m, dimension);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < dimension; ++k) out(i, k) = centres(i % clusters, k) + offset(rng);
  return out;
}

DenseMatrix distort(const DenseMatrix& coords, const DistortionParams& params, std::uint64_t seed) {
  const std::size_t m = coords.rows();
  if (m < 2) throw DomainError("distortion needs at least 2 points");
  if (!(params.noise_max >= 0.0)) throw DomainError("noise_max must be non-negative");
  for (double p : params.powers)
    if (!(p > 0.0)) throw DomainError("distortion powers must be positive");

  const DenseMatrix e = Configuration(coords).distances();
  std::vector<double> upper;
  upper.reserve(m * (m - 1) / 2);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) upper.push_back(e(i, j));
  std::sort(upper.begin(), upper.end());
  const double t1 = quantile(upper, 1.0 / 3.0);
  const double t2 = quantile(upper, 2.0 / 3.0);
  const double top = upper.back();

  Rng rng(seed);
  std::uniform_real_distribution<double> noise(0.0, params.noise_max);
  DenseMatrix out(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      const double d = e(i, j);
      double t;
      if (d <= t1) {
        t = bend(d, 0.0, t1, params.powers[0]);
      } else if (d <= t2) {
        t = bend(d, t1, t2, params.powers[1]);
      } else {
        t = bend(d, t2, top, params.powers[2]);
      }
      const double eps = params.noise_max > 0.0 ? noise(rng) : 0.0;
      out(i, j) = std::max(0.0, t * (1.0 + eps));
    }
  }
  return out;
}

DissimilarityMatrix mask(const DenseMatrix& truth, double fraction, std::uint64_t seed,
                         std::vector<std::string> labels) {
  if (!truth.square() || truth.rows() < 2) throw DomainError("mask needs a square matrix with m >= 2");
  if (!(fraction >= 0.0 && fraction < 1.0)) throw DomainError("mask fraction must lie in [0, 1)");
  const std::size_t m = truth.rows();
  if (labels.empty()) labels = default_labels(m);
  const std::size_t pairs = m * (m - 1) / 2;
  const auto hidden = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(pairs) + 1e-9));

  std::vector<std::pair<std::size_t, std::size_t>> all;
  all.reserve(pairs);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) all.emplace_back(i, j);

  const auto full = DissimilarityMatrix::from_dense(truth, labels);
  Rng rng(seed);
  for (int attempt = 0; attempt < kMaskAttempts; ++attempt) {
    std::shuffle(all.begin(), all.end(), rng);
    DissimilarityMatrix d = full;
    for (std::size_t p = 0; p < hidden; ++p) {
      d.set(all[p].first, all[p].second, ObservationCell::missing());
      d.set(all[p].second, all[p].first, ObservationCell::missing());
    }
    const auto comp = observation_components(d);
    if (std::all_of(comp.begin(), comp.end(), [&](std::size_t c) { return c == comp.front(); })) return d;
  }
  throw ValidationError("could not draw a connected mask hiding " + std::to_string(hidden) + " of " +
                        std::to_string(pairs) + " pairs; lower the mask fraction");
}

DissimilarityMatrix censor_top(const DissimilarityMatrix& d, double q) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("censor fraction must lie in (0, 1)");
  const std::size_t m = d.size();
  std::vector<double> values;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j && d.at(i, j).is_exact()) values.push_back(d.at(i, j).value);
  if (values.empty()) return d;
  std::sort(values.begin(), values.end());
  const double threshold = quantile(values, 1.0 - q);
  DissimilarityMatrix out = d;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j && d.at(i, j).is_exact() && d.at(i, j).value > threshold)
        out.set(i, j, ObservationCell::right_censored(threshold));
  return out;
}

SyntheticDataset simulate(const SyntheticSpec& spec) {
  auto ground_truth = generate_ground_truth(spec.m, spec.clusters, mix_seed(spec.seed, kGroundTruth), spec.dimension);
  auto truth = distort(ground_truth, spec.distortion, mix_seed(spec.seed, kDistortion));
  auto input = mask(truth, spec.fraction, mix_seed(spec.seed, kMask));
  if (spec.censor_fraction > 0.0) input = censor_top(input, spec.censor_fraction);
  const std::size_t pairs = spec.m * (spec.m - 1) / 2;
  const auto masked = static_cast<std::size_t>(std::floor(spec.fraction * static_cast<double>(pairs) + 1e-9));
  return {spec, std::move(ground_truth), std::move(truth), std::move(input), masked};
}

std::string spec_to_json(const SyntheticSpec& spec) {
  nlohmann::ordered_json j;
  j["m"] = spec.m;
  j["clusters"] = spec.clusters;
  j["dimension"] = spec.dimension;
  j["fraction"] = spec.fraction;
  j["seed"] = spec.seed;
  j["powers"] = spec.distortion.powers;
  j["noise_max"] = spec.distortion.noise_max;
  j["censor_fraction"] = spec.censor_fraction;
  return j.dump(2) + "\n";
}

SyntheticSpec spec_from_json(const std::string& text) {
  SyntheticSpec spec;
  try {
    const auto j = nlohmann::json::parse(text);
    spec.m = j.at("m").get<std::size_t>();
    spec.clusters = j.at("clusters").get<std::size_t>();
    spec.dimension = j.value("dimension", spec.dimension);
    spec.fraction = j.at("fraction").get<double>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.distortion.powers = j.value("powers", spec.distortion.powers);
    spec.distortion.noise_max = j.value("noise_max", spec.distortion.noise_max);
    spec.censor_fraction = j.value("censor_fraction", spec.censor_fraction);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("generator record: ") + e.what(), 0, 0);
  }
  return spec;
}

void write_bundle(const std::filesystem::path& dir, const SyntheticDataset& data) {
  const auto& labels = data.input.labels();
  std::ostringstream truth, input, coords;
  csv::write_wide(truth, data.truth, labels);
  csv::write_wide(input, data.input);
  csv::write_coordinates(coords, Configuration(data.ground_truth), labels);
  csv::write_text_file(dir / "truth.csv", truth.str());
  csv::write_text_file(dir / "input.csv", input.str());
  csv::write_text_file(dir / "coords.csv", coords.str());
  csv::write_text_file(dir / "params.json", spec_to_json(data.spec));
}

}  // namespace topolow
