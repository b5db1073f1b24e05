#include "topolow/dissimilarity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include "topolow/common.hpp"

namespace topolow {

namespace {

constexpr std::size_t kExactTriangleLimit = 200;
constexpr std::size_t kSampledTriangles = 1'000'000;

struct DisjointSets {
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> parent;
};

}  // namespace

DissimilarityMatrix::DissimilarityMatrix(std::vector<std::string> labels,
                                         std::vector<ObservationCell> cells)
    : labels_(std::move(labels)), cells_(std::move(cells)) {
  const std::size_t m = labels_.size();
  if (m < 2) throw ValidationError("a dissimilarity matrix needs at least 2 objects");
  if (cells_.size() != m * m) {
    throw ValidationError("expected " + std::to_string(m * m) + " cells, got " +
                          std::to_string(cells_.size()));
  }
  std::unordered_set<std::string> seen;
  for (const auto& label : labels_) {
    if (!seen.insert(label).second) throw ValidationError("duplicate object label '" + label + "'");
  }
  for (std::size_t i = 0; i < m; ++i) {
    auto& diag = cells_[i * m + i];
    if (!diag.observed()) diag = ObservationCell::exact(0.0);
  }
}

DissimilarityMatrix::DissimilarityMatrix(std::vector<std::string> labels)
    : DissimilarityMatrix(labels, std::vector<ObservationCell>(labels.size() * labels.size())) {}

DissimilarityMatrix DissimilarityMatrix::from_dense(const DenseMatrix& values,
                                                    std::vector<std::string> labels) {
  if (!values.square()) throw ValidationError("dissimilarity values must form a square matrix");
  const std::size_t m = values.rows();
  if (labels.empty()) labels = default_labels(m);
  std::vector<ObservationCell> cells(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      cells[i * m + j] = ObservationCell::exact(i == j ? 0.0 : values(i, j));
  return DissimilarityMatrix(std::move(labels), std::move(cells));
}

void DissimilarityMatrix::set(std::size_t i, std::size_t j, ObservationCell cell) {
  if (i == j && !cell.observed()) cell = ObservationCell::exact(0.0);
  cells_[i * labels_.size() + j] = cell;
}

std::size_t DissimilarityMatrix::observed_count() const noexcept {
  std::size_t count = 0;
  const std::size_t m = size();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j && at(i, j).observed()) ++count;
  return count;
}

std::size_t DissimilarityMatrix::exact_count() const noexcept {
  std::size_t count = 0;
  const std::size_t m = size();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j && at(i, j).is_exact()) ++count;
  return count;
}

double DissimilarityMatrix::max_observed() const noexcept {
  double best = 0.0;
  const std::size_t m = size();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j && at(i, j).observed()) best = std::max(best, at(i, j).value);
  return best;
}

bool DissimilarityMatrix::complete() const noexcept {
  const std::size_t m = size();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j && !at(i, j).is_exact()) return false;
  return true;
}

DenseMatrix DissimilarityMatrix::to_dense() const {
  if (!complete()) throw ValidationError("matrix is not complete (missing or censored cells)");
  const std::size_t m = size();
  DenseMatrix out(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j) out(i, j) = at(i, j).value;
  return out;
}

std::vector<std::string> default_labels(std::size_t m) {
  std::vector<std::string> labels;
  labels.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "obj_%03zu", i + 1);
    labels.emplace_back(buf);
  }
  return labels;
}

double SimilarityTransform::operator()(double s) const {
  if (kind == Kind::Identity) return s;
  return std::log(s) / std::log(base);
}

DissimilarityMatrix from_similarity(const SimilarityMatrix& similarity,
                                    SimilarityTransform transform) {
  const std::size_t m = similarity.size();
  if (similarity.cells.size() != m * m) throw ValidationError("similarity matrix is not square");
  const bool logarithmic = transform.kind == SimilarityTransform::Kind::Logarithm;
  if (logarithmic && !(transform.base > 1.0)) {
    throw DomainError("logarithm base must be greater than 1");
  }

  std::vector<std::optional<double>> column_max(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const auto& cell = similarity.at(i, j);
      if (!cell.observed()) continue;
      if (logarithmic && !(cell.value > 0.0)) {
        throw DomainError("similarity at (" + similarity.labels[i] + ", " + similarity.labels[j] +
                          ") is not positive; the logarithmic transform needs S > 0");
      }
      if (!column_max[j] || cell.value > *column_max[j]) column_max[j] = cell.value;
    }
  }

  std::vector<ObservationCell> cells(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const auto& cell = similarity.at(i, j);
      if (!cell.observed() || i == j) continue;
      const double d = std::max(0.0, transform(*column_max[j]) - transform(cell.value));
      // A lower bound on similarity is an upper bound on dissimilarity.
      switch (cell.kind) {
        case CellKind::Exact: cells[i * m + j] = ObservationCell::exact(d); break;
        case CellKind::LeftCensored: cells[i * m + j] = ObservationCell::right_censored(d); break;
        case CellKind::RightCensored: cells[i * m + j] = ObservationCell::left_censored(d); break;
        case CellKind::Missing: break;
      }
    }
  }
  return DissimilarityMatrix(similarity.labels, std::move(cells));
}

ObservationCell resolve_pair(const ObservationCell& ab, const ObservationCell& ba) noexcept {
  if (!ab.observed()) return ba;
  if (!ba.observed()) return ab;
  if (ab.kind == ba.kind) return {ab.kind, 0.5 * (ab.value + ba.value)};
  if (ab.is_exact()) return ab;
  if (ba.is_exact()) return ba;
  return ab;
}

std::vector<std::size_t> observation_components(const DissimilarityMatrix& d) {
  const std::size_t m = d.size();
  DisjointSets sets(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (d.at(i, j).observed() || d.at(j, i).observed()) sets.unite(i, j);
  std::vector<std::size_t> component(m);
  for (std::size_t i = 0; i < m; ++i) component[i] = sets.find(i);
  return component;
}

ValidationReport validate(const DissimilarityMatrix& d) {
  ValidationReport report;
  const std::size_t m = d.size();

  for (std::size_t i = 0; i < m; ++i) {
    const auto& diag = d.at(i, i);
    if (diag.observed() && diag.value != 0.0) ++report.nonzero_diagonal;
    for (std::size_t j = 0; j < m; ++j) {
      const auto& cell = d.at(i, j);
      if (!cell.observed()) continue;
      if (cell.value < 0.0 || std::isnan(cell.value)) ++report.negative_values;
      if (i != j) ++report.observed_cells;
    }
  }

  // Exact rest lengths per unordered pair, NaN when not exact.
  DenseMatrix exact(m, m, std::nan(""));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const auto& ij = d.at(i, j);
      const auto& ji = d.at(j, i);
      if (ij.observed() && ji.observed() && !(ij == ji)) ++report.asymmetric_pairs;
      const auto resolved = resolve_pair(ij, ji);
      if (resolved.is_exact()) exact(i, j) = exact(j, i) = resolved.value;
    }
  }

  auto violates = [&](std::size_t i, std::size_t j, std::size_t k) {
    const double a = exact(i, j), b = exact(j, k), c = exact(i, k);
    if (std::isnan(a) || std::isnan(b) || std::isnan(c)) return false;
    ++report.triangles_checked;
    return a > b + c || b > a + c || c > a + b;
  };

  if (m <= kExactTriangleLimit) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j)
        for (std::size_t k = j + 1; k < m; ++k)
          if (violates(i, j, k)) ++report.triangle_violations;
  } else {
    report.triangles_sampled = true;
    Rng rng(0x7121A9u);
    std::uniform_int_distribution<std::size_t> pick(0, m - 1);
    for (std::size_t s = 0; s < kSampledTriangles; ++s) {
      const std::size_t i = pick(rng), j = pick(rng), k = pick(rng);
      if (i == j || j == k || i == k) continue;
      if (violates(i, j, k)) ++report.triangle_violations;
    }
  }

  const auto component = observation_components(d);
  std::vector<std::size_t> roots(component);
  std::sort(roots.begin(), roots.end());
  report.components = static_cast<std::size_t>(std::unique(roots.begin(), roots.end()) - roots.begin());
  report.connected = report.components == 1;
  return report;
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  out << "negative values: " << negative_values << ", nonzero diagonal: " << nonzero_diagonal
      << ", asymmetric pairs: " << asymmetric_pairs << ", triangle violations: "
      << triangle_violations << '/' << triangles_checked << (triangles_sampled ? " (sampled)" : "")
      << ", observed cells: " << observed_cells << ", components: " << components;
  return out.str();
}

void require_valid(const DissimilarityMatrix& d) {
  const auto report = validate(d);
  if (!report.ok()) throw ValidationError("invalid dissimilarity matrix: " + report.summary());
}

std::vector<std::size_t> spectral_order(const DissimilarityMatrix& d) {
  const std::size_t m = d.size();
  std::vector<double> mean(m, 0.0);
  std::vector<std::size_t> count(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j || !d.at(i, j).observed()) continue;
      const double v = d.at(i, j).value;
      mean[i] += v;
      mean[j] += v;
      ++count[i];
      ++count[j];
    }
  }

  std::vector<std::size_t> ranked;
  std::vector<std::size_t> isolated;
  for (std::size_t i = 0; i < m; ++i) {
    if (count[i] == 0) {
      isolated.push_back(i);
    } else {
      mean[i] /= static_cast<double>(count[i]);
      ranked.push_back(i);
    }
  }
  // Index order is label order, so a stable sort breaks ties by label.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [&](std::size_t a, std::size_t b) { return mean[a] > mean[b]; });

  std::vector<std::size_t> order(m);
  std::size_t front = 0;
  std::size_t back = ranked.size();
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    if (r % 2 == 0) {
      order[front++] = ranked[r];
    } else {
      order[--back] = ranked[r];
    }
  }
  std::copy(isolated.begin(), isolated.end(), order.begin() + static_cast<std::ptrdiff_t>(ranked.size()));
  return order;
}

}  // namespace topolow
