#pragma once

#include <cstdint>
#include <span>
#include <utility>

#include "topolow/dense_matrix.hpp"

// Data-parallel building blocks. Every kernel exists twice: a plain serial
// loop (the reference, used by the sequential optimizer) and an OpenMP
// version. Reductions in the parallel variants sum fixed-size blocks and
// combine the partials in block order, so their result does not depend on
// the thread count.

namespace topolow::kernels {

/// One observed target distance between points i and j.
struct ResidualTerm {
  std::uint32_t i;
  std::uint32_t j;
  double target;
};

struct StressSums {
  double squared_error = 0.0;  // sum over i<j of (truth - embedded)^2
  double squared_truth = 0.0;  // sum over i<j of truth^2
};

namespace serial {

/// out(i,j) = ||x_i - x_j|| for all i, j. `out` is resized as needed.
void pairwise_distances(const DenseMatrix& coords, DenseMatrix& out);

/// Sum of |target - ||x_i - x_j||| over the terms.
double abs_residual_sum(const DenseMatrix& coords, std::span<const ResidualTerm> terms);

/// -1/2 J (D o D) J for a square matrix of distances.
DenseMatrix double_center_squared(const DenseMatrix& distances);

StressSums stress_sums(const DenseMatrix& truth, const DenseMatrix& embedded);

}  // namespace serial

namespace parallel {

void pairwise_distances(const DenseMatrix& coords, DenseMatrix& out);
double abs_residual_sum(const DenseMatrix& coords, std::span<const ResidualTerm> terms);
DenseMatrix double_center_squared(const DenseMatrix& distances);
StressSums stress_sums(const DenseMatrix& truth, const DenseMatrix& embedded);

/// Threads the OpenMP runtime would use (1 when built without OpenMP).
int max_threads() noexcept;

}  // namespace parallel

}  // namespace topolow::kernels
