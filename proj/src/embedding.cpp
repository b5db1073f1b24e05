#include "topolow/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "topolow/kernels.hpp"

namespace topolow {

namespace {

struct PairTask {
  std::uint32_t a;
  std::uint32_t b;
  ObservationCell cell;
};

std::vector<PairTask> pair_tasks(const DissimilarityMatrix& d) {
  const std::size_t m = d.size();
  std::vector<PairTask> tasks;
  tasks.reserve(m * (m - 1) / 2);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b)
      tasks.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                       resolve_pair(d.at(a, b), d.at(b, a))});
  return tasks;
}

double step_scale(const DissimilarityMatrix& d) {
  const double s = d.max_observed();
  return s > 0.0 ? s : 1.0;
}

}  // namespace

void Hyperparameters::check() const {
  if (dimension < 1) throw DomainError("dimension must be at least 1");
  if (!(spring_constant > 0.0) || !std::isfinite(spring_constant))
    throw DomainError("spring constant k0 must be positive");
  if (!(repulsion_constant > 0.0) || !std::isfinite(repulsion_constant))
    throw DomainError("repulsion constant c0 must be positive");
  if (!(cooling_rate > 0.0 && cooling_rate < 1.0)) throw DomainError("cooling rate alpha must lie in (0, 1)");
}

double effective_mass(const DissimilarityMatrix& d, std::size_t a) {
  std::size_t count = 0;
  for (std::size_t b = 0; b < d.size(); ++b)
    if (b != a && (d.at(a, b).observed() || d.at(b, a).observed())) ++count;
  return std::max<double>(1.0, static_cast<double>(count));
}

std::vector<double> effective_masses(const DissimilarityMatrix& d) {
  std::vector<double> masses(d.size());
  for (std::size_t a = 0; a < d.size(); ++a) masses[a] = effective_mass(d, a);
  return masses;
}

std::pair<double, double> cool(double k0, double c0, double alpha, int t) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("cooling rate alpha must lie in (0, 1)");
  const double factor = std::pow(1.0 - alpha, t);
  return {k0 * factor, c0 * factor};
}

void apply_pair_update(Configuration& config, std::size_t a, std::size_t b,
                       const ObservationCell& cell, const UpdateContext& ctx) {
  auto xa = config.point(a);
  auto xb = config.point(b);
  const std::size_t dim = xa.size();

  // Unit vector from b to a.
  thread_local std::vector<double> unit;
  unit.resize(dim);
  double r = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    unit[k] = xa[k] - xb[k];
    r += unit[k] * unit[k];
  }
  r = std::sqrt(r);

  // Resolve which force (if any) acts, before drawing a random direction, so
  // satisfied constraints leave both the particles and the RNG untouched.
  double rest = 0.0;
  bool spring = false;
  switch (cell.kind) {
    case CellKind::Exact: spring = true; rest = cell.value; break;
    case CellKind::RightCensored:
      if (!(r < cell.value)) return;
      spring = true;
      rest = cell.value;
      break;
    case CellKind::LeftCensored:
      if (!(r > cell.value)) return;
      spring = true;
      rest = cell.value;
      break;
    case CellKind::Missing: break;
  }

  const bool overlapping = r < kOverlapDistance;
  if (overlapping) {
    std::normal_distribution<double> normal;
    double norm = 0.0;
    do {
      norm = 0.0;
      for (auto& u : unit) {
        u = normal(*ctx.rng);
        norm += u * u;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (auto& u : unit) u /= norm;
    r = kOverlapDistance;
  } else {
    for (auto& u : unit) u /= r;
  }

  const double cap = 0.5 * ctx.scale;
  double da = 0.0;
  double db = 0.0;
  if (spring) {
    // Positive displacement moves a toward b, i.e. against `unit`.
    da = -std::clamp(spring_displacement(r, rest, ctx.spring_constant, ctx.masses[a]), -cap, cap);
    db = -std::clamp(spring_displacement(r, rest, ctx.spring_constant, ctx.masses[b]), -cap, cap);
  } else {
    const double repulsion_cap = overlapping ? 0.1 * ctx.scale : cap;
    da = std::min(repulsive_displacement(r, ctx.repulsion_constant, ctx.masses[a]), repulsion_cap);
    db = std::min(repulsive_displacement(r, ctx.repulsion_constant, ctx.masses[b]), repulsion_cap);
  }
  for (std::size_t k = 0; k < dim; ++k) {
    xa[k] += da * unit[k];
    xb[k] -= db * unit[k];
  }
}

Configuration initialize(const DissimilarityMatrix& d, int dimension, Rng& rng) {
  if (dimension < 1) throw DomainError("dimension must be at least 1");
  if (d.observed_count() == 0) throw ValidationError("no observed dissimilarities; nothing to fit");
  const std::size_t m = d.size();
  const double s = d.max_observed();
  Configuration config(m, static_cast<std::size_t>(dimension));
  std::uniform_real_distribution<double> uniform(0.0, s);
  for (double& v : config.coords().data()) v = s > 0.0 ? uniform(rng) : 0.0;

  const auto order = spectral_order(d);
  for (std::size_t pos = 0; pos < m; ++pos)
    config.point(order[pos])[0] = s * static_cast<double>(pos) / static_cast<double>(m - 1);
  return config;
}

Configuration initialize(const DissimilarityMatrix& d, int dimension, std::uint64_t seed) {
  Rng rng(seed);
  return initialize(d, dimension, rng);
}

FitResult fit(const DissimilarityMatrix& d, const Hyperparameters& theta, const FitOptions& options) {
  theta.check();
  require_valid(d);
  const auto terms = exact_terms(d);
  if (terms.empty()) throw ValidationError("no exact observations; MAE is undefined");

  Rng rng(options.seed);
  FitResult result;
  result.seed = options.seed;
  result.hyperparameters = theta;
  result.configuration = initialize(d, theta.dimension, rng);
  auto& config = result.configuration;

  const auto masses = effective_masses(d);
  const auto tasks = pair_tasks(d);
  std::vector<std::size_t> order(tasks.size());
  std::iota(order.begin(), order.end(), 0);

  UpdateContext ctx{theta.spring_constant, theta.repulsion_constant, masses, step_scale(d), &rng};
  const double n_terms = static_cast<double>(terms.size());
  double previous = -1.0;
  int streak = 0;

  for (int t = 0; t < options.max_iterations; ++t) {
    std::tie(ctx.spring_constant, ctx.repulsion_constant) =
        cool(theta.spring_constant, theta.repulsion_constant, theta.cooling_rate, t);
    std::shuffle(order.begin(), order.end(), rng);
    for (const std::size_t idx : order) {
      const auto& task = tasks[idx];
      apply_pair_update(config, task.a, task.b, task.cell, ctx);
      const auto xa = config.point(task.a);
      const auto xb = config.point(task.b);
      const bool finite = std::all_of(xa.begin(), xa.end(), [](double v) { return std::isfinite(v); }) &&
                          std::all_of(xb.begin(), xb.end(), [](double v) { return std::isfinite(v); });
      if (!finite) {
        throw NumericalError("non-finite coordinates at iteration " + std::to_string(t) + ", pair (" +
                             d.labels()[task.a] + ", " + d.labels()[task.b] + ")");
      }
    }

    const double current = kernels::serial::abs_residual_sum(config.coords(), terms) / n_terms;
    result.mae_trace.push_back(current);
    result.iterations = t + 1;
    if (previous >= 0.0) {
      const double rel = previous > 0.0 ? std::abs(current - previous) / previous : (current == 0.0 ? 0.0 : 1.0);
      streak = rel < options.rel_tolerance ? streak + 1 : 0;
      if (streak >= options.patience) {
        result.converged = true;
        break;
      }
    }
    previous = current;
  }

  result.final_log_likelihood = log_likelihood_exact(config, d);
  result.likelihood = log_likelihood_censored(config, d);
  return result;
}

}  // namespace topolow
