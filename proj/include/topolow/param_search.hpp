#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "topolow/dissimilarity.hpp"
#include "topolow/embedding.hpp"

namespace topolow {

enum class ParameterScale { Linear, Logarithmic };

struct ParameterRange {
  double lower;
  double upper;
  ParameterScale scale = ParameterScale::Linear;
  bool integer = false;

  /// Bounds of the sampling space: log-transformed for logarithmic ranges,
  /// widened by 0.5 on each side for integers so that every integer value
  /// has equal mass after rounding.
  double transformed_lower() const;
  double transformed_upper() const;
  double to_transformed(double value) const;
  /// Inverse transform, rounding and clamping integers into [lower, upper].
  double from_transformed(double t) const;
};

/// Search domain for the four hyperparameters, in the fixed order
/// (dimension, spring constant, repulsion constant, cooling rate).
struct ParameterRanges {
  static constexpr std::size_t kCount = 4;
  std::array<ParameterRange, kCount> ranges;

  /// N in {2..10}; k0 in [0.1, 10], c0 in [0.001, 0.1], alpha in
  /// [0.001, 0.1], all three log-uniform.
  static ParameterRanges defaults();
  static ParameterRanges with_dimensions(int lower, int upper);

  ParameterRange& dimension() { return ranges[0]; }
  ParameterRange& spring_constant() { return ranges[1]; }
  ParameterRange& repulsion_constant() { return ranges[2]; }
  ParameterRange& cooling_rate() { return ranges[3]; }

  /// Throws DomainError unless every invariant holds (lower < upper, positive
  /// bounds for k0 and c0, alpha inside (0, 1), integral bounds for N >= 1).
  void check() const;

  std::array<double, kCount> to_transformed(const Hyperparameters& theta) const;
  Hyperparameters from_transformed(const std::array<double, kCount>& t) const;
  bool contains(const Hyperparameters& theta) const;
};

/// Latin hypercube design of n points: in every dimension each of the n
/// equal-probability strata of the transformed range holds exactly one
/// sample, jittered uniformly, with independent stratum permutations.
std::vector<Hyperparameters> lhs_sample(const ParameterRanges& ranges, std::size_t n, std::uint64_t seed);

struct SearchSample {
  Hyperparameters theta;
  double cv_log_likelihood = 0.0;
  std::vector<double> fold_maes;          // NaN for skipped folds
  std::vector<std::size_t> fold_counts;   // held-out exact cells per fold (0 when skipped)
  std::vector<double> fold_log_likelihoods;  // NaN for skipped folds
};

/// Assignment of observed unordered pairs to cross-validation folds.
struct FoldPlan {
  std::size_t folds = 0;
  /// Unordered pairs (a < b) with at least one observed direction, and the
  /// fold each belongs to.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  std::vector<std::uint32_t> fold_of;
  /// Folds whose training graph stays connected.
  std::vector<bool> usable;
};

/// Random partition of the observed pairs into k folds. Reshuffles (up to 20
/// times) looking for a partition whose training sets all stay connected and
/// keeps the one with the most usable folds.
FoldPlan make_folds(const DissimilarityMatrix& d, std::size_t folds, std::uint64_t seed);

/// D with every pair of fold `fold` masked to Missing in both directions.
DissimilarityMatrix training_matrix(const DissimilarityMatrix& d, const FoldPlan& plan, std::size_t fold);

struct CvOptions {
  std::size_t folds = 5;
  int max_iterations = 1000;
  double rel_tolerance = 1e-4;
};

/// Sum over usable folds of -n log(2 MAE_val) - n, where n counts held-out
/// exact cells. Throws Error if every fold is skipped.
SearchSample cv_log_likelihood(const DissimilarityMatrix& d, const Hyperparameters& theta,
                               const FoldPlan& plan, std::uint64_t fit_seed, const CvOptions& options = {});

/// Convenience: partition and fit seeds both derived from `seed`.
SearchSample cv_log_likelihood(const DissimilarityMatrix& d, const Hyperparameters& theta, std::size_t folds,
                               std::uint64_t seed, const CvOptions& options = {});

/// Draws `batch` candidates from a likelihood-weighted Gaussian KDE over the
/// transformed history. Falls back to lhs_sample when all history points
/// coincide.
std::vector<Hyperparameters> amc_refine(const std::vector<SearchSample>& history, const ParameterRanges& ranges,
                                        std::size_t batch, std::uint64_t seed);

struct SearchBudget {
  std::size_t initial = 30;
  std::size_t amc_rounds = 5;
  std::size_t batch = 10;
  std::size_t folds = 5;
  int max_iterations = 1000;
  double rel_tolerance = 1e-4;
  int jobs = 0;  // 0: OpenMP default
};

struct SearchResult {
  Hyperparameters best;
  double best_cv_log_likelihood = 0.0;
  std::vector<SearchSample> history;  // evaluation order
  std::size_t failures = 0;
  std::uint64_t seed = 0;
};

/// LHS exploration followed by adaptive Monte Carlo rounds; candidates of a
/// batch are evaluated concurrently and merged in candidate order.
SearchResult search(const DissimilarityMatrix& d, const ParameterRanges& ranges, const SearchBudget& budget,
                    std::uint64_t seed);

}  // namespace topolow
