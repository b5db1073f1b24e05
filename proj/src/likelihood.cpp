#include "topolow/likelihood.hpp"

#include <cmath>

#include "topolow/common.hpp"

namespace topolow {

LaplaceScale::LaplaceScale(double b) : b_(b) {
  if (!(b > 0.0) || !std::isfinite(b)) throw DomainError("Laplace scale must be positive and finite");
}

double laplace_pdf(double z, LaplaceScale b) noexcept {
  return std::exp(-std::abs(z) / b.value()) / (2.0 * b.value());
}

double laplace_cdf(double z, LaplaceScale b) noexcept {
  if (z < 0.0) return 0.5 * std::exp(z / b.value());
  return 1.0 - 0.5 * std::exp(-z / b.value());
}

double laplace_survivor(double z, LaplaceScale b) noexcept { return 1.0 - laplace_cdf(z, b); }

double log_laplace_cdf(double z, LaplaceScale b) noexcept {
  const double v = z < 0.0 ? std::log(0.5) + z / b.value() : std::log1p(-0.5 * std::exp(-z / b.value()));
  return std::max(v, std::log(kProbabilityFloor));
}

double log_laplace_survivor(double z, LaplaceScale b) noexcept {
  const double v = z >= 0.0 ? std::log(0.5) - z / b.value() : std::log1p(-0.5 * std::exp(z / b.value()));
  return std::max(v, std::log(kProbabilityFloor));
}

std::vector<kernels::ResidualTerm> exact_terms(const DissimilarityMatrix& d) {
  std::vector<kernels::ResidualTerm> terms;
  const std::size_t m = d.size();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j && d.at(i, j).is_exact())
        terms.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), d.at(i, j).value});
  return terms;
}

double mae(const Configuration& config, const DissimilarityMatrix& d) {
  const auto terms = exact_terms(d);
  if (terms.empty()) throw DomainError("MAE needs at least one exact observation");
  return kernels::serial::abs_residual_sum(config.coords(), terms) / static_cast<double>(terms.size());
}

double laplace_log_likelihood(std::size_t n, double mae) noexcept {
  const double count = static_cast<double>(n);
  return -count * std::log(2.0 * std::max(mae, kMaeFloor)) - count;
}

double log_likelihood_exact(const Configuration& config, const DissimilarityMatrix& d) {
  return laplace_log_likelihood(d.exact_count(), mae(config, d));
}

LikelihoodBreakdown log_likelihood_censored(const Configuration& config,
                                            const DissimilarityMatrix& d, LaplaceScale b) {
  LikelihoodBreakdown out;
  out.scale = b.value();
  const std::size_t m = d.size();
  const double log_norm = std::log(2.0 * b.value());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      const auto& cell = d.at(i, j);
      if (!cell.observed()) continue;
      const double z = cell.value - config.distance(i, j);
      switch (cell.kind) {
        case CellKind::Exact:
          out.exact_term += std::max(-log_norm - std::abs(z) / b.value(), std::log(kProbabilityFloor));
          ++out.exact_count;
          break;
        case CellKind::LeftCensored:
          out.left_censored_term += log_laplace_cdf(z, b);
          ++out.left_censored_count;
          break;
        case CellKind::RightCensored:
          out.right_censored_term += log_laplace_survivor(z, b);
          ++out.right_censored_count;
          break;
        case CellKind::Missing: break;
      }
    }
  }
  out.total = out.exact_term + out.left_censored_term + out.right_censored_term;
  return out;
}

LikelihoodBreakdown log_likelihood_censored(const Configuration& config, const DissimilarityMatrix& d) {
  const double scale = d.exact_count() > 0 ? std::max(mae(config, d), kMaeFloor) : 1.0;
  return log_likelihood_censored(config, d, LaplaceScale(scale));
}

}  // namespace topolow
