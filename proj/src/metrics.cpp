#include "topolow/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "topolow/classical_mds.hpp"
#include "topolow/common.hpp"
#include "topolow/kernels.hpp"

namespace topolow {

namespace {
void require_same_square(const DenseMatrix& a, const DenseMatrix& b) {
  if (!a.square() || !b.square() || a.rows() != b.rows())
    throw DomainError("matrices must be square with matching shape (" + std::to_string(a.rows()) + "x" +
                      std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                      std::to_string(b.cols()) + ")");
}
}  // namespace

DenseMatrix symmetrize(const DenseMatrix& m) {
  if (!m.square()) throw DomainError("cannot symmetrize a non-square matrix");
  DenseMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out(i, i) = m(i, i);
    for (std::size_t j = i + 1; j < m.cols(); ++j) out(i, j) = out(j, i) = 0.5 * (m(i, j) + m(j, i));
  }
  return out;
}

double normalized_stress(const DenseMatrix& truth, const DenseMatrix& embedded) {
  require_same_square(truth, embedded);
  const auto sums = kernels::parallel::stress_sums(symmetrize(truth), embedded);
  if (!(sums.squared_truth > 0.0)) throw DomainError("normalized stress is undefined for an all-zero truth matrix");
  return std::sqrt(sums.squared_error / sums.squared_truth);
}

ShepardPairs shepard_pairs(const DenseMatrix& truth, const DenseMatrix& embedded) {
  require_same_square(truth, embedded);
  const auto sym = symmetrize(truth);
  ShepardPairs pairs;
  pairs.reserve(truth.rows() * (truth.rows() - 1) / 2);
  for (std::size_t i = 0; i < truth.rows(); ++i)
    for (std::size_t j = i + 1; j < truth.rows(); ++j) pairs.push_back({sym(i, j), embedded(i, j)});
  return pairs;
}

Correlation correlation_stats(const ShepardPairs& pairs) {
  if (pairs.size() < 2) throw DomainError("correlation needs at least two pairs");
  const double n = static_cast<double>(pairs.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : pairs) {
    mx += p.truth;
    my += p.embedded;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& p : pairs) {
    const double dx = p.truth - mx;
    const double dy = p.embedded - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw DomainError("correlation is undefined for zero variance");
  const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return {r, r * r};
}

DenseMatrix gram_matrix(const DenseMatrix& d) {
  if (!d.square()) throw DomainError("Gram matrix needs a square matrix");
  return kernels::parallel::double_center_squared(d);
}

double deviation_score(const DenseMatrix& d) {
  const auto eig = symmetric_eigen(gram_matrix(symmetrize(d)));
  double max_abs = 0.0;
  for (double l : eig.values) max_abs = std::max(max_abs, std::abs(l));
  const double tol = 1e-9 * max_abs;
  double positive = 0.0, negative = 0.0;
  for (double l : eig.values) {
    if (l > tol) positive += l;
    if (l < -tol) negative += -l;
  }
  if (!(positive > 0.0)) throw DomainError("Gram matrix has no positive eigenvalue");
  return negative / positive;
}

EvaluationReport evaluate(const DenseMatrix& truth, const DenseMatrix& embedded) {
  EvaluationReport report;
  report.normalized_stress = normalized_stress(truth, embedded);
  const auto pairs = shepard_pairs(truth, embedded);
  const auto corr = correlation_stats(pairs);
  report.pearson_r = corr.pearson_r;
  report.r_squared = corr.r_squared;
  report.deviation_score = deviation_score(truth);
  report.n_pairs = pairs.size();
  return report;
}

EvaluationReport evaluate(const DenseMatrix& truth, const Configuration& config) {
  return evaluate(truth, config.distances());
}

}  // namespace topolow
