#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "topolow/dense_matrix.hpp"

namespace topolow {

enum class CellKind : std::uint8_t { Missing, Exact, LeftCensored, RightCensored };

/// One measurement slot of a dissimilarity (or similarity) matrix. For the
/// censored kinds `value` is the threshold: LeftCensored(c) reads "< c",
/// RightCensored(c) reads "> c".
struct ObservationCell {
  CellKind kind = CellKind::Missing;
  double value = 0.0;

  static constexpr ObservationCell missing() noexcept { return {}; }
  static constexpr ObservationCell exact(double v) noexcept { return {CellKind::Exact, v}; }
  static constexpr ObservationCell left_censored(double threshold) noexcept {
    return {CellKind::LeftCensored, threshold};
  }
  static constexpr ObservationCell right_censored(double threshold) noexcept {
    return {CellKind::RightCensored, threshold};
  }

  constexpr bool observed() const noexcept { return kind != CellKind::Missing; }
  constexpr bool is_exact() const noexcept { return kind == CellKind::Exact; }
  constexpr bool censored() const noexcept {
    return kind == CellKind::LeftCensored || kind == CellKind::RightCensored;
  }

  bool operator==(const ObservationCell& other) const noexcept {
    return kind == other.kind && (kind == CellKind::Missing || value == other.value);
  }
};

/// Square grid of observation cells over labelled objects. Asymmetric and
/// non-metric content is legal; only negativity is rejected (by validate()).
class DissimilarityMatrix {
 public:
  /// Throws ValidationError if m < 2, labels repeat, or the cell count is not
  /// m*m. Missing diagonal cells are normalized to Exact(0).
  DissimilarityMatrix(std::vector<std::string> labels, std::vector<ObservationCell> cells);

  /// All-missing matrix (diagonal Exact(0)).
  explicit DissimilarityMatrix(std::vector<std::string> labels);

  /// Complete Exact matrix from dense values.
  static DissimilarityMatrix from_dense(const DenseMatrix& values,
                                        std::vector<std::string> labels = {});

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  const ObservationCell& at(std::size_t i, std::size_t j) const noexcept {
    return cells_[i * labels_.size() + j];
  }
  void set(std::size_t i, std::size_t j, ObservationCell cell);

  /// Number of observed off-diagonal directed cells.
  std::size_t observed_count() const noexcept;
  std::size_t exact_count() const noexcept;
  /// Largest observed value or threshold off the diagonal (0 if none).
  double max_observed() const noexcept;
  /// True when every off-diagonal cell is Exact.
  bool complete() const noexcept;
  /// Exact values as a dense matrix; throws ValidationError unless complete().
  DenseMatrix to_dense() const;

  bool operator==(const DissimilarityMatrix&) const = default;

 private:
  std::vector<std::string> labels_;
  std::vector<ObservationCell> cells_;
};

/// Default object labels: obj_001, obj_002, ...
std::vector<std::string> default_labels(std::size_t m);

/// Similarity scores S_ij. Censored tokens are allowed and flip direction
/// under the similarity-to-dissimilarity transform.
struct SimilarityMatrix {
  std::vector<std::string> labels;
  std::vector<ObservationCell> cells;  // row-major m*m

  std::size_t size() const noexcept { return labels.size(); }
  const ObservationCell& at(std::size_t i, std::size_t j) const noexcept {
    return cells[i * labels.size() + j];
  }
};

struct SimilarityTransform {
  enum class Kind { Identity, Logarithm } kind = Kind::Identity;
  double base = 2.0;  // only for Logarithm; must be > 1

  static SimilarityTransform identity() { return {}; }
  static SimilarityTransform logarithm(double base) { return {Kind::Logarithm, base}; }
  double operator()(double s) const;
};

/// D_ij = f(S_max,j) - f(S_ij), S_max,j being the largest observed value in
/// column j. Throws DomainError naming the cell when a logarithmic transform
/// meets a non-positive similarity.
DissimilarityMatrix from_similarity(const SimilarityMatrix& similarity,
                                    SimilarityTransform transform);

struct ValidationReport {
  std::size_t negative_values = 0;     // hard errors
  std::size_t nonzero_diagonal = 0;    // hard errors
  std::size_t asymmetric_pairs = 0;
  std::size_t triangle_violations = 0;  // informational
  std::size_t triangles_checked = 0;
  bool triangles_sampled = false;
  std::size_t observed_cells = 0;
  std::size_t components = 0;  // of the observation graph
  bool connected = false;

  bool ok() const noexcept { return negative_values == 0 && nonzero_diagonal == 0; }
  std::string summary() const;
};

ValidationReport validate(const DissimilarityMatrix& d);

/// Throws ValidationError when validate(d) reports hard errors.
void require_valid(const DissimilarityMatrix& d);

/// Permutation (position -> object index) that sends objects with the largest
/// mean observed dissimilarity to opposite ends. Objects without any observed
/// cell go last in index order.
std::vector<std::size_t> spectral_order(const DissimilarityMatrix& d);

/// Connected components of the graph whose edges are observed pairs
/// (either direction). Returns a component id per object.
std::vector<std::size_t> observation_components(const DissimilarityMatrix& d);

/// Rest length and kind used for the unordered pair (a, b) when both
/// directions may be observed. Same-kind pairs take the mean value; an Exact
/// direction wins over a censored one.
ObservationCell resolve_pair(const ObservationCell& ab, const ObservationCell& ba) noexcept;

}  // namespace topolow
