#include "topolow/param_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "topolow/common.hpp"

#ifdef TOPOLOW_HAVE_OPENMP
#include <omp.h>
#endif

namespace topolow {

namespace {

constexpr int kFoldAttempts = 20;
constexpr int kKdeRedraws = 1000;
constexpr double kBandwidthFloor = 0.01;

struct DisjointSets {
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
  std::vector<std::size_t> parent;
};

std::vector<bool> usable_folds(std::size_t m, const FoldPlan& plan) {
  std::vector<bool> usable(plan.folds, false);
  std::vector<std::size_t> held(plan.folds, 0);
  for (auto f : plan.fold_of) ++held[f];
  for (std::size_t f = 0; f < plan.folds; ++f) {
    if (held[f] == 0) continue;
    DisjointSets sets(m);
    std::size_t merged = 0;
    for (std::size_t p = 0; p < plan.pairs.size(); ++p)
      if (plan.fold_of[p] != f && sets.unite(plan.pairs[p].first, plan.pairs[p].second)) ++merged;
    usable[f] = merged + 1 == m;
  }
  return usable;
}

}  // namespace

// ---------------------------------------------------------------------------
// Ranges

double ParameterRange::transformed_lower() const {
  if (integer) return lower - 0.5;
  return scale == ParameterScale::Logarithmic ? std::log(lower) : lower;
}

double ParameterRange::transformed_upper() const {
  if (integer) return upper + 0.5;
  return scale == ParameterScale::Logarithmic ? std::log(upper) : upper;
}

double ParameterRange::to_transformed(double value) const {
  if (integer) return value;
  return scale == ParameterScale::Logarithmic ? std::log(value) : value;
}

double ParameterRange::from_transformed(double t) const {
  if (integer) return std::clamp(std::round(t), lower, upper);
  const double v = scale == ParameterScale::Logarithmic ? std::exp(t) : t;
  return std::clamp(v, lower, upper);
}

ParameterRanges ParameterRanges::defaults() {
  return {{ParameterRange{2, 10, ParameterScale::Linear, true},
           ParameterRange{0.1, 10, ParameterScale::Logarithmic, false},
           ParameterRange{0.001, 0.1, ParameterScale::Logarithmic, false},
           ParameterRange{0.001, 0.1, ParameterScale::Logarithmic, false}}};
}

ParameterRanges ParameterRanges::with_dimensions(int lower, int upper) {
  auto r = defaults();
  r.dimension().lower = lower;
  r.dimension().upper = upper;
  return r;
}

void ParameterRanges::check() const {
  static constexpr const char* names[] = {"dimension", "k0", "c0", "alpha"};
  for (std::size_t p = 0; p < kCount; ++p) {
    const auto& r = ranges[p];
    if (!(r.lower < r.upper)) throw DomainError(std::string("range for ") + names[p] + " needs lower < upper");
    if (r.scale == ParameterScale::Logarithmic && !(r.lower > 0.0))
      throw DomainError(std::string("logarithmic range for ") + names[p] + " needs a positive lower bound");
  }
  const auto& n = ranges[0];
  if (!n.integer || n.lower < 1 || n.lower != std::floor(n.lower) || n.upper != std::floor(n.upper))
    throw DomainError("dimension range must be integral with lower bound >= 1");
  if (!(ranges[1].lower > 0.0) || !(ranges[2].lower > 0.0))
    throw DomainError("k0 and c0 ranges must be positive");
  if (!(ranges[3].lower > 0.0) || !(ranges[3].upper < 1.0))
    throw DomainError("alpha range must lie inside (0, 1)");
}

std::array<double, ParameterRanges::kCount> ParameterRanges::to_transformed(const Hyperparameters& theta) const {
  return {ranges[0].to_transformed(theta.dimension), ranges[1].to_transformed(theta.spring_constant),
          ranges[2].to_transformed(theta.repulsion_constant), ranges[3].to_transformed(theta.cooling_rate)};
}

Hyperparameters ParameterRanges::from_transformed(const std::array<double, kCount>& t) const {
  Hyperparameters theta;
  theta.dimension = static_cast<int>(ranges[0].from_transformed(t[0]));
  theta.spring_constant = ranges[1].from_transformed(t[1]);
  theta.repulsion_constant = ranges[2].from_transformed(t[2]);
  theta.cooling_rate = ranges[3].from_transformed(t[3]);
  return theta;
}

bool ParameterRanges::contains(const Hyperparameters& theta) const {
  const double values[] = {static_cast<double>(theta.dimension), theta.spring_constant, theta.repulsion_constant,
                           theta.cooling_rate};
  for (std::size_t p = 0; p < kCount; ++p)
    if (values[p] < ranges[p].lower || values[p] > ranges[p].upper) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Latin hypercube

std::vector<Hyperparameters> lhs_sample(const ParameterRanges& ranges, std::size_t n, std::uint64_t seed) {
  ranges.check();
  if (n == 0) throw DomainError("LHS needs at least one sample");
  Rng rng(seed);
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  std::vector<std::array<double, ParameterRanges::kCount>> points(n);
  std::vector<std::size_t> strata(n);
  for (std::size_t p = 0; p < ParameterRanges::kCount; ++p) {
    std::iota(strata.begin(), strata.end(), 0);
    std::shuffle(strata.begin(), strata.end(), rng);
    const double lo = ranges.ranges[p].transformed_lower();
    const double width = ranges.ranges[p].transformed_upper() - lo;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (static_cast<double>(strata[i]) + jitter(rng)) / static_cast<double>(n);
      points[i][p] = lo + u * width;
    }
  }
  std::vector<Hyperparameters> out;
  out.reserve(n);
  for (const auto& pt : points) out.push_back(ranges.from_transformed(pt));
  return out;
}

// ---------------------------------------------------------------------------
// Cross-validation

FoldPlan make_folds(const DissimilarityMatrix& d, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw DomainError("cross-validation needs at least 2 folds");
  const std::size_t m = d.size();
  FoldPlan base;
  base.folds = folds;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b)
      if (d.at(a, b).observed() || d.at(b, a).observed())
        base.pairs.emplace_back(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));

  Rng rng(seed);
  FoldPlan best;
  long best_usable = -1;
  for (int attempt = 0; attempt < kFoldAttempts; ++attempt) {
    FoldPlan plan = base;
    std::shuffle(plan.pairs.begin(), plan.pairs.end(), rng);
    plan.fold_of.resize(plan.pairs.size());
    for (std::size_t p = 0; p < plan.pairs.size(); ++p) plan.fold_of[p] = static_cast<std::uint32_t>(p % folds);
    plan.usable = usable_folds(m, plan);
    const long usable = std::count(plan.usable.begin(), plan.usable.end(), true);
    if (usable > best_usable) {
      best_usable = usable;
      best = std::move(plan);
    }
    if (static_cast<std::size_t>(best_usable) == folds) break;
  }
  if (static_cast<std::size_t>(best_usable) < folds) {
    warn(std::to_string(folds - static_cast<std::size_t>(best_usable)) + " of " + std::to_string(folds) +
         " cross-validation folds disconnect the training graph and will be skipped");
  }
  return best;
}

DissimilarityMatrix training_matrix(const DissimilarityMatrix& d, const FoldPlan& plan, std::size_t fold) {
  DissimilarityMatrix train = d;
  for (std::size_t p = 0; p < plan.pairs.size(); ++p) {
    if (plan.fold_of[p] != fold) continue;
    const auto [a, b] = plan.pairs[p];
    train.set(a, b, ObservationCell::missing());
    train.set(b, a, ObservationCell::missing());
  }
  return train;
}

SearchSample cv_log_likelihood(const DissimilarityMatrix& d, const Hyperparameters& theta, const FoldPlan& plan,
                               std::uint64_t fit_seed, const CvOptions& options) {
  SearchSample sample;
  sample.theta = theta;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  sample.fold_maes.assign(plan.folds, nan);
  sample.fold_counts.assign(plan.folds, 0);
  sample.fold_log_likelihoods.assign(plan.folds, nan);

  std::size_t evaluated = 0;
  for (std::size_t f = 0; f < plan.folds; ++f) {
    if (!plan.usable[f]) continue;
    const auto train = training_matrix(d, plan, f);
    if (train.exact_count() == 0) continue;
    FitOptions fit_options;
    fit_options.seed = mix_seed(fit_seed, f);
    fit_options.max_iterations = options.max_iterations;
    fit_options.rel_tolerance = options.rel_tolerance;
    const auto result = fit(train, theta, fit_options);

    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t p = 0; p < plan.pairs.size(); ++p) {
      if (plan.fold_of[p] != f) continue;
      const auto [a, b] = plan.pairs[p];
      const double dist = result.configuration.distance(a, b);
      for (const auto& cell : {d.at(a, b), d.at(b, a)}) {
        if (!cell.is_exact()) continue;
        sum += std::abs(cell.value - dist);
        ++n;
      }
    }
    if (n == 0) continue;
    const double fold_mae = sum / static_cast<double>(n);
    sample.fold_maes[f] = fold_mae;
    sample.fold_counts[f] = n;
    sample.fold_log_likelihoods[f] = laplace_log_likelihood(n, fold_mae);
    sample.cv_log_likelihood += sample.fold_log_likelihoods[f];
    ++evaluated;
  }
  if (evaluated == 0) throw Error("every cross-validation fold was skipped; data too sparse for k = " +
                                  std::to_string(plan.folds));
  return sample;
}

SearchSample cv_log_likelihood(const DissimilarityMatrix& d, const Hyperparameters& theta, std::size_t folds,
                               std::uint64_t seed, const CvOptions& options) {
  const auto plan = make_folds(d, folds, mix_seed(seed, 1));
  return cv_log_likelihood(d, theta, plan, mix_seed(seed, 2), options);
}

// ---------------------------------------------------------------------------
// Adaptive Monte Carlo

std::vector<Hyperparameters> amc_refine(const std::vector<SearchSample>& history, const ParameterRanges& ranges,
                                        std::size_t batch, std::uint64_t seed) {
  ranges.check();
  if (history.empty()) throw DomainError("adaptive refinement needs a non-empty history");
  constexpr std::size_t dims = ParameterRanges::kCount;

  std::vector<std::array<double, dims>> points;
  std::vector<double> log_w;
  for (const auto& s : history) {
    if (!std::isfinite(s.cv_log_likelihood)) continue;
    points.push_back(ranges.to_transformed(s.theta));
    log_w.push_back(s.cv_log_likelihood);
  }
  const bool degenerate =
      points.empty() || std::all_of(points.begin(), points.end(), [&](const auto& p) { return p == points.front(); });
  if (degenerate) return lhs_sample(ranges, batch, seed);

  const double max_log = *std::max_element(log_w.begin(), log_w.end());
  std::vector<double> w(log_w.size());
  double sum_w = 0.0, sum_w2 = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(log_w[i] - max_log);
    sum_w += w[i];
    sum_w2 += w[i] * w[i];
  }
  const double n_eff = sum_w * sum_w / sum_w2;
  const double silverman = std::pow(4.0 / (dims + 2.0), 1.0 / (dims + 4.0)) * std::pow(n_eff, -1.0 / (dims + 4.0));

  std::array<double, dims> lo{}, hi{}, bandwidth{};
  for (std::size_t p = 0; p < dims; ++p) {
    lo[p] = ranges.ranges[p].transformed_lower();
    hi[p] = ranges.ranges[p].transformed_upper();
    double mean = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) mean += w[i] * points[i][p];
    mean /= sum_w;
    double var = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) var += w[i] * (points[i][p] - mean) * (points[i][p] - mean);
    var /= sum_w;
    bandwidth[p] = std::max(std::sqrt(var) * silverman, kBandwidthFloor * (hi[p] - lo[p]));
  }

  Rng rng(seed);
  std::discrete_distribution<std::size_t> component(w.begin(), w.end());
  std::normal_distribution<double> normal;
  std::vector<Hyperparameters> out;
  out.reserve(batch);
  for (std::size_t c = 0; c < batch; ++c) {
    std::array<double, dims> x{};
    bool inside = false;
    for (int attempt = 0; attempt < kKdeRedraws && !inside; ++attempt) {
      const auto& centre = points[component(rng)];
      inside = true;
      for (std::size_t p = 0; p < dims; ++p) {
        x[p] = centre[p] + bandwidth[p] * normal(rng);
        inside = inside && x[p] >= lo[p] && x[p] <= hi[p];
      }
    }
    for (std::size_t p = 0; p < dims; ++p) x[p] = std::clamp(x[p], lo[p], hi[p]);
    out.push_back(ranges.from_transformed(x));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Search

namespace {

std::vector<std::optional<SearchSample>> evaluate_batch(const DissimilarityMatrix& d,
                                                        const std::vector<Hyperparameters>& candidates,
                                                        std::size_t first_index, const FoldPlan& plan,
                                                        const SearchBudget& budget, std::uint64_t seed) {
  std::vector<std::optional<SearchSample>> results(candidates.size());
  const CvOptions options{budget.folds, budget.max_iterations, budget.rel_tolerance};
  const auto n = static_cast<std::ptrdiff_t>(candidates.size());
#ifdef TOPOLOW_HAVE_OPENMP
  const int threads = budget.jobs > 0 ? budget.jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto index = first_index + static_cast<std::size_t>(i);
    try {
      results[static_cast<std::size_t>(i)] =
          cv_log_likelihood(d, candidates[static_cast<std::size_t>(i)], plan, mix_seed(seed, 1000 + index), options);
    } catch (const std::exception& e) {
      warn("candidate " + std::to_string(index) + " failed: " + e.what());
    }
  }
  return results;
}

}  // namespace

SearchResult search(const DissimilarityMatrix& d, const ParameterRanges& ranges, const SearchBudget& budget,
                    std::uint64_t seed) {
  ranges.check();
  if (budget.initial == 0) throw DomainError("search needs at least one initial sample");
  if (budget.amc_rounds > 0 && budget.batch == 0) throw DomainError("adaptive rounds need a positive batch size");
  require_valid(d);

  SearchResult result;
  result.seed = seed;
  const auto plan = make_folds(d, budget.folds, mix_seed(seed, 1));
  std::size_t next_index = 0;

  auto run = [&](const std::vector<Hyperparameters>& candidates) {
    auto samples = evaluate_batch(d, candidates, next_index, plan, budget, seed);
    next_index += candidates.size();
    for (auto& s : samples) {
      if (s) {
        result.history.push_back(std::move(*s));
      } else {
        ++result.failures;
      }
    }
  };

  run(lhs_sample(ranges, budget.initial, mix_seed(seed, 2)));
  for (std::size_t round = 0; round < budget.amc_rounds; ++round) {
    const auto round_seed = mix_seed(seed, 100 + round);
    run(result.history.empty() ? lhs_sample(ranges, budget.batch, round_seed)
                               : amc_refine(result.history, ranges, budget.batch, round_seed));
  }

  if (result.history.empty()) throw Error("every hyperparameter candidate failed");
  const auto best = std::max_element(result.history.begin(), result.history.end(),
                                     [](const SearchSample& a, const SearchSample& b) {
                                       return a.cv_log_likelihood < b.cv_log_likelihood;
                                     });
  result.best = best->theta;
  result.best_cv_log_likelihood = best->cv_log_likelihood;
  return result;
}

}  // namespace topolow
