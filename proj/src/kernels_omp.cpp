#include <cmath>
#include <vector>

#include "topolow/kernels.hpp"

#ifdef TOPOLOW_HAVE_OPENMP
#include <omp.h>
#endif

namespace topolow::kernels::parallel {

namespace {

constexpr std::ptrdiff_t kBlock = 1024;

inline double point_distance(const DenseMatrix& coords, std::size_t i, std::size_t j) noexcept {
  const auto a = coords.row(i);
  const auto b = coords.row(j);
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    sum += d * d;
  }
  return std::sqrt(sum);
}

}  // namespace

int max_threads() noexcept {
#ifdef TOPOLOW_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void pairwise_distances(const DenseMatrix& coords, DenseMatrix& out) {
  const auto m = static_cast<std::ptrdiff_t>(coords.rows());
  if (out.rows() != coords.rows() || out.cols() != coords.rows()) out = DenseMatrix(coords.rows(), coords.rows());
  // Each row is written by exactly one thread; the symmetric half is filled
  // from the same value so the result is bit-identical to the serial kernel.
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    out(i, i) = 0.0;
    for (std::ptrdiff_t j = 0; j < m; ++j)
      if (j != i) out(i, j) = point_distance(coords, std::min(i, j), std::max(i, j));
  }
}

double abs_residual_sum(const DenseMatrix& coords, std::span<const ResidualTerm> terms) {
  const auto n = static_cast<std::ptrdiff_t>(terms.size());
  const std::ptrdiff_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    double sum = 0.0;
    const std::ptrdiff_t end = std::min(n, (b + 1) * kBlock);
    for (std::ptrdiff_t k = b * kBlock; k < end; ++k) {
      const auto& t = terms[static_cast<std::size_t>(k)];
      sum += std::abs(t.target - point_distance(coords, t.i, t.j));
    }
    partial[static_cast<std::size_t>(b)] = sum;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

DenseMatrix double_center_squared(const DenseMatrix& distances) {
  const auto m = static_cast<std::ptrdiff_t>(distances.rows());
  DenseMatrix b(distances.rows(), distances.rows());
  std::vector<double> row_sum(static_cast<std::size_t>(m), 0.0), col_sum(static_cast<std::size_t>(m), 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::ptrdiff_t j = 0; j < m; ++j) s += distances(i, j) * distances(i, j);
    row_sum[static_cast<std::size_t>(i)] = s;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < m; ++j) {
    double s = 0.0;
    for (std::ptrdiff_t i = 0; i < m; ++i) s += distances(i, j) * distances(i, j);
    col_sum[static_cast<std::size_t>(j)] = s;
  }
  double grand = 0.0;
  for (double s : row_sum) grand += s;
  const double md = static_cast<double>(m);
  grand /= md * md;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    const double ri = row_sum[static_cast<std::size_t>(i)] / md;
    for (std::ptrdiff_t j = 0; j < m; ++j) {
      const double cj = col_sum[static_cast<std::size_t>(j)] / md;
      b(i, j) = -0.5 * (distances(i, j) * distances(i, j) - ri - cj + grand);
    }
  }
  return b;
}

StressSums stress_sums(const DenseMatrix& truth, const DenseMatrix& embedded) {
  const auto m = static_cast<std::ptrdiff_t>(truth.rows());
  std::vector<StressSums> per_row(static_cast<std::size_t>(m));
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    StressSums s;
    for (std::ptrdiff_t j = i + 1; j < m; ++j) {
      const double e = truth(i, j) - embedded(i, j);
      s.squared_error += e * e;
      s.squared_truth += truth(i, j) * truth(i, j);
    }
    per_row[static_cast<std::size_t>(i)] = s;
  }
  StressSums total;
  for (const auto& s : per_row) {
    total.squared_error += s.squared_error;
    total.squared_truth += s.squared_truth;
  }
  return total;
}

}  // namespace topolow::kernels::parallel
