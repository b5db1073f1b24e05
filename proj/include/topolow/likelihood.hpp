#pragma once

#include <cstddef>
#include <vector>

#include "topolow/configuration.hpp"
#include "topolow/dissimilarity.hpp"
#include "topolow/kernels.hpp"

namespace topolow {

/// Scale b > 0 of a zero-centred Laplace law.
class LaplaceScale {
 public:
  explicit LaplaceScale(double b);
  double value() const noexcept { return b_; }

 private:
  double b_;
};

/// Lower bound applied to MAE before it enters a logarithm.
inline constexpr double kMaeFloor = 1e-10;
/// Probabilities are clamped to this before taking logs.
inline constexpr double kProbabilityFloor = 1e-300;

double laplace_pdf(double z, LaplaceScale b) noexcept;
double laplace_cdf(double z, LaplaceScale b) noexcept;
double laplace_survivor(double z, LaplaceScale b) noexcept;
double log_laplace_cdf(double z, LaplaceScale b) noexcept;
double log_laplace_survivor(double z, LaplaceScale b) noexcept;

/// Exact off-diagonal cells as residual terms (directed; both directions of a
/// symmetric pair appear).
std::vector<kernels::ResidualTerm> exact_terms(const DissimilarityMatrix& d);

/// Mean absolute deviation between Exact cells and embedded distances.
/// Throws DomainError when D has no Exact cell.
double mae(const Configuration& config, const DissimilarityMatrix& d);

/// -n log(2 * MAE) - n, with MAE floored at kMaeFloor.
double laplace_log_likelihood(std::size_t n, double mae) noexcept;

/// Profile log-likelihood of the Exact cells at b = MAE.
double log_likelihood_exact(const Configuration& config, const DissimilarityMatrix& d);

struct LikelihoodBreakdown {
  double exact_term = 0.0;
  double left_censored_term = 0.0;
  double right_censored_term = 0.0;
  double total = 0.0;
  std::size_t exact_count = 0;
  std::size_t left_censored_count = 0;
  std::size_t right_censored_count = 0;
  double scale = 0.0;
};

/// Full log-likelihood with left- and right-censored contributions.
LikelihoodBreakdown log_likelihood_censored(const Configuration& config,
                                            const DissimilarityMatrix& d, LaplaceScale b);

/// Same, with b = max(MAE over Exact cells, kMaeFloor).
LikelihoodBreakdown log_likelihood_censored(const Configuration& config,
                                            const DissimilarityMatrix& d);

}  // namespace topolow
