#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include "topolow/dense_matrix.hpp"
#include "topolow/dissimilarity.hpp"

namespace topolow {

/// Tercile-piecewise power transform followed by multiplicative noise.
struct DistortionParams {
  std::array<double, 3> powers{0.25, 1.0, 3.0};  // lower, middle, upper tercile
  double noise_max = 1.0;                          // epsilon ~ U[0, noise_max]
};

/// Cluster centres uniform in [0, 10]^dim, objects assigned round-robin and
/// offset by N(0, 1) per coordinate. Throws DomainError unless
/// m >= clusters >= 1.
DenseMatrix generate_ground_truth(std::size_t m, std::size_t clusters, std::uint64_t seed,
                                  std::size_t dimension = 10);

/// Euclidean distances bent piecewise at their terciles (each piece rescaled
/// to keep its endpoints), then multiplied by (1 + epsilon) with an
/// independent draw for every directed cell.
DenseMatrix distort(const DenseMatrix& coords, const DistortionParams& params, std::uint64_t seed);

/// Hides floor(fraction * m(m-1)/2) unordered pairs (both directions),
/// redrawing up to 100 times until the observation graph is connected.
/// Throws ValidationError when no connected draw is found.
DissimilarityMatrix mask(const DenseMatrix& truth, double fraction, std::uint64_t seed,
                         std::vector<std::string> labels = {});

/// Replaces every observed cell above the (1 - q) quantile of observed
/// values with RightCensored at that quantile.
DissimilarityMatrix censor_top(const DissimilarityMatrix& d, double q);

struct SyntheticSpec {
  std::size_t m = 50;
  std::size_t clusters = 5;
  std::size_t dimension = 10;
  double fraction = 0.3;
  std::uint64_t seed = 1;
  DistortionParams distortion;
  double censor_fraction = 0.0;  // 0 disables censoring
};

struct SyntheticDataset {
  SyntheticSpec spec;
  DenseMatrix ground_truth;
  DenseMatrix truth;
  DissimilarityMatrix input;
  std::size_t masked_pairs = 0;
};

/// Sub-seeds for ground truth, distortion and mask are derived from
/// spec.seed, so the mask can change (new fraction) over a fixed truth.
SyntheticDataset simulate(const SyntheticSpec& spec);

std::string spec_to_json(const SyntheticSpec& spec);
SyntheticSpec spec_from_json(const std::string& text);

/// Writes truth.csv, input.csv, coords.csv and params.json into `dir`.
void write_bundle(const std::filesystem::path& dir, const SyntheticDataset& data);

}  // namespace topolow
