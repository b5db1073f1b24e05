#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "topolow/common.hpp"
#include "topolow/configuration.hpp"
#include "topolow/dissimilarity.hpp"
#include "topolow/likelihood.hpp"

namespace topolow {

/// The four model parameters selected by maximum likelihood.
struct Hyperparameters {
  int dimension = 2;
  double spring_constant = 1.0;     // k0
  double repulsion_constant = 0.01;  // c0
  double cooling_rate = 0.01;       // alpha

  /// Throws DomainError unless N >= 1, k0 > 0, c0 > 0, 0 < alpha < 1.
  void check() const;
  bool operator==(const Hyperparameters&) const = default;
};

struct FitOptions {
  std::uint64_t seed = 1;
  int max_iterations = 1000;
  double rel_tolerance = 1e-4;
  int patience = 5;  // consecutive iterations below rel_tolerance
};

struct FitResult {
  Configuration configuration;
  std::vector<double> mae_trace;  // one entry per iteration
  int iterations = 0;
  bool converged = false;
  double final_log_likelihood = 0.0;
  LikelihoodBreakdown likelihood;
  std::uint64_t seed = 0;
  Hyperparameters hyperparameters;
};

/// Per-object inertia: max(1, number of observed unordered pairs).
double effective_mass(const DissimilarityMatrix& d, std::size_t a);
std::vector<double> effective_masses(const DissimilarityMatrix& d);

/// Spring displacement of one particle while its partner is held fixed:
/// 2k(r - rest)/(4m + k). Positive moves the particle toward its partner.
constexpr double spring_displacement(double distance, double rest_length, double k, double mass) noexcept {
  return 2.0 * k * (distance - rest_length) / (4.0 * mass + k);
}

/// Repulsive displacement c/(2 m r^2), directed away from the partner.
constexpr double repulsive_displacement(double distance, double c, double mass) noexcept {
  return c / (2.0 * mass * distance * distance);
}

/// Force constants after t full passes: (k0 (1-alpha)^t, c0 (1-alpha)^t).
std::pair<double, double> cool(double k0, double c0, double alpha, int t);

/// State shared by all pair updates of one pass.
struct UpdateContext {
  double spring_constant;      // k_t
  double repulsion_constant;   // c_t
  std::span<const double> masses;
  double scale;  // largest observed dissimilarity; bounds step sizes
  Rng* rng;      // direction draws for overlapping particles
};

/// Distances below this are treated as overlapping particles.
inline constexpr double kOverlapDistance = 1e-9;

/// Moves particles a and b according to the single interaction described by
/// `cell` (the pair's resolved observation). Exact cells act as springs,
/// Missing cells repel, censored cells act as one-sided springs that switch
/// off once their inequality holds. Only rows a and b change.
void apply_pair_update(Configuration& config, std::size_t a, std::size_t b,
                       const ObservationCell& cell, const UpdateContext& ctx);

/// Starting layout: uniform in [0, s]^N, then the first coordinate of each
/// object is set from its spectral_order position scaled onto [0, s].
/// Throws ValidationError when D has no observed cell.
Configuration initialize(const DissimilarityMatrix& d, int dimension, std::uint64_t seed);
Configuration initialize(const DissimilarityMatrix& d, int dimension, Rng& rng);

/// Runs the sequential stochastic pairwise optimizer.
FitResult fit(const DissimilarityMatrix& d, const Hyperparameters& theta, const FitOptions& options = {});

}  // namespace topolow
