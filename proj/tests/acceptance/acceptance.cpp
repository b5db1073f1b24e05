// Acceptance checks. Prints one [PASS]/[FAIL] line per criterion and exits
// nonzero if any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "topolow/bench.hpp"
#include "topolow/classical_mds.hpp"
#include "topolow/common.hpp"
#include "topolow/embedding.hpp"
#include "topolow/likelihood.hpp"
#include "topolow/metrics.hpp"
#include "topolow/param_search.hpp"
#include "topolow/synthgen.hpp"

using namespace topolow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

// Per-dataset topolow and classical MDS stress from a compare-style result.
struct DatasetStress {
  std::vector<double> topolow;
  double classical = 0.0;
  double deviation = 0.0;
};

std::map<std::size_t, DatasetStress> by_dataset(const ExperimentResult& r, std::size_t m, double fraction) {
  std::map<std::size_t, DatasetStress> out;
  for (const auto& row : r.rows) {
    if (!row.ok || row.m != m || row.fraction != fraction) continue;
    auto& s = out[row.dataset];
    s.deviation = row.deviation_score;
    if (row.method == kMethodTopolow) s.topolow.push_back(row.normalized_stress);
    if (row.method == kMethodClassicalMds) s.classical = row.normalized_stress;
  }
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

// ---------------------------------------------------------------------------

ExperimentResult compare_result;

Outcome ordering() {
  auto plan = ExperimentPlan::preset(ExperimentKind::Compare);
  plan.m = 50;
  plan.clusters = 5;
  plan.fractions = {0.3};
  plan.datasets = 10;
  plan.replicates = 10;
  plan.base_seed = 1;
  const auto start = std::chrono::steady_clock::now();
  compare_result = run_experiment(plan);
  const double elapsed = seconds_since(start);

  const auto stats = by_dataset(compare_result, 50, 0.3);
  std::size_t wins = 0, eligible = 0;
  double pooled_topolow = 0.0, pooled_classical = 0.0, min_dev = 1e300;
  for (const auto& [k, s] : stats) {
    min_dev = std::min(min_dev, s.deviation);
    ++eligible;
    wins += mean(s.topolow) < s.classical;
    pooled_topolow += mean(s.topolow) / 10.0;
    pooled_classical += s.classical / 10.0;
  }
  const double ratio = pooled_topolow / pooled_classical;
  const bool pass = eligible == 10 && min_dev >= 0.3 && wins >= 9 && ratio <= 0.75 && elapsed <= 1200.0;
  return {pass, "wins " + std::to_string(wins) + "/" + std::to_string(eligible) + ", pooled stress topolow " +
                    fmt(pooled_topolow) + " vs classical MDS " + fmt(pooled_classical) + " (ratio " + fmt(ratio) +
                    "), min deviation score " + fmt(min_dev) + ", " + fmt(elapsed, 3) + " s"};
}

Outcome sparsity() {
  auto plan = ExperimentPlan::preset(ExperimentKind::Sparsity);
  plan.m = 50;
  plan.clusters = 5;
  plan.fractions = {0.3, 0.6, 0.9};
  plan.datasets = 5;
  plan.replicates = 3;
  plan.base_seed = 2;
  const auto r = run_experiment(plan);
  double topolow_90 = std::nan(""), classical_30 = std::nan("");
  std::string table;
  for (const auto& s : r.summary) {
    if (s.dataset != "all") continue;
    table += " " + s.method + "@" + fmt(s.fraction, 2) + "=" + fmt(s.mean_stress);
    if (s.method == kMethodTopolow && s.fraction == 0.9) topolow_90 = s.mean_stress;
    if (s.method == kMethodClassicalMds && s.fraction == 0.3) classical_30 = s.mean_stress;
  }
  return {topolow_90 < classical_30,
          "topolow at 90% " + fmt(topolow_90) + " vs classical MDS at 30% " + fmt(classical_30) + ";" + table};
}

Outcome scale() {
  auto plan = ExperimentPlan::preset(ExperimentKind::Scale);
  plan.sizes = {25, 50, 100};
  plan.clusters = 5;
  plan.fractions = {0.3};
  plan.datasets = 5;
  plan.replicates = 2;
  plan.base_seed = 3;
  const auto r = run_experiment(plan);
  bool pass = true;
  std::string detail;
  for (std::size_t m : plan.sizes) {
    double t = std::nan(""), c = std::nan("");
    for (const auto& s : r.summary) {
      if (s.dataset != "all" || s.m != m) continue;
      if (s.method == kMethodTopolow) t = s.mean_stress;
      if (s.method == kMethodClassicalMds) c = s.mean_stress;
    }
    pass = pass && t < c;
    detail += "m=" + std::to_string(m) + ": " + fmt(t) + " vs " + fmt(c) + "; ";
  }
  double slowest = 0.0;
  for (const auto& row : r.rows)
    if (row.method == kMethodTopolow && row.m == 100) slowest = std::max(slowest, row.runtime_seconds);
  pass = pass && slowest <= 60.0;
  return {pass, detail + "slowest m=100 fit " + fmt(slowest, 3) + " s"};
}

Outcome stability() {
  const auto stats = by_dataset(compare_result, 50, 0.3);
  double worst = 0.0;
  std::size_t seeds = 0;
  for (const auto& [k, s] : stats) {
    worst = std::max(worst, mean_sd(s.topolow).second);
    seeds = std::max(seeds, s.topolow.size());
  }
  return {!stats.empty() && seeds >= 10 && worst <= 0.02,
          "largest per-dataset s.d. over " + std::to_string(seeds) + " seeds " + fmt(worst) + " across " +
              std::to_string(stats.size()) + " datasets"};
}

Outcome exact_recovery() {
  bool pass = true;
  std::string detail;
  for (std::size_t dim : {2u, 3u})
    for (std::size_t m : {10u, 30u}) {
      const auto x = oracle::random_points(m, dim, static_cast<unsigned>(100 * dim + m));
      const auto truth = oracle::distances(x);
      const double cmds = normalized_stress(truth, classical_mds(truth, static_cast<int>(dim)).distances());
      const auto d = DissimilarityMatrix::from_dense(truth);
      const auto s = search(d, ParameterRanges::defaults(), SearchBudget{}, mix_seed(7, m + dim));
      const auto f = fit(d, s.best, {.seed = 7});
      const double topo = normalized_stress(truth, f.configuration.distances());
      pass = pass && cmds <= 1e-8 && topo <= 0.05;
      detail += "R^" + std::to_string(dim) + " m=" + std::to_string(m) + ": cMDS " + fmt(cmds, 2) + ", topolow " +
                fmt(topo, 3) + " (N=" + std::to_string(s.best.dimension) + "); ";
    }
  return {pass, detail};
}

Outcome likelihood_identities() {
  std::mt19937 rng(6);
  double worst_exact = 0.0, worst_censored = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 5 + rng() % 16;
    const Configuration c(oracle::random_points(m, 2, static_cast<unsigned>(trial)));
    std::uniform_real_distribution<double> u(0.0, 12.0);
    DissimilarityMatrix d(default_labels(m));
    std::vector<double> residuals;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        if (i == j || rng() % 4 == 0) continue;
        const double v = u(rng);
        d.set(i, j, ObservationCell::exact(v));
        residuals.push_back(v - c.distance(i, j));
      }
    if (residuals.empty()) continue;
    long double sum = 0.0L;
    for (double e : residuals) sum += std::abs(e);
    const long double n = residuals.size();
    const long double b = sum / n;
    const auto expanded = static_cast<double>(-n * std::log(2.0L * b) - sum / b);
    worst_exact = std::max(worst_exact, oracle::relative_error(log_likelihood_exact(c, d), expanded));
    worst_censored = std::max(worst_censored, oracle::relative_error(log_likelihood_censored(c, d).total, expanded));
  }
  return {worst_exact <= 1e-12 && worst_censored <= 1e-9,
          "max relative error exact " + fmt(worst_exact, 3) + ", censored " + fmt(worst_censored, 3)};
}

Outcome displacement_algebra() {
  double worst = 0.0;
  for (double k : {0.01, 0.1, 1.0, 5.0, 10.0, 50.0})
    for (double mass : {1.0, 2.0, 7.0, 49.0, 500.0})
      for (double r : {0.001, 0.5, 3.0, 40.0})
        for (double rest : {0.0, 0.2, 3.0, 17.0}) {
          const double d = spring_displacement(r, rest, k, mass);
          const double lhs = k * (2 * (r - rest) - d), rhs = 4 * mass * d;
          if (lhs == 0.0 && rhs == 0.0) continue;
          worst = std::max(worst, oracle::relative_error(lhs, rhs));
        }
  DissimilarityMatrix two(default_labels(2));
  two.set(0, 1, ObservationCell::exact(5));
  double gap = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto f = fit(two, {2, 1.0, 0.01, 0.01}, {.seed = seed});
    gap = std::max(gap, std::abs(f.configuration.distance(0, 1) - 5.0));
  }
  return {worst <= 1e-12 && gap <= 1e-3,
          "max relative error " + fmt(worst, 3) + ", single spring off rest length by " + fmt(gap, 3)};
}

Outcome censored_monotonicity() {
  auto pair_at = [](double r) {
    Configuration c(2, 1);
    c.point(1)[0] = r;
    return c;
  };
  auto one = [](ObservationCell cell) {
    DissimilarityMatrix d(default_labels(2));
    d.set(0, 1, cell);
    return d;
  };
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(0.1, 20.0);
  std::size_t violations = 0, gating_errors = 0, cases = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const double threshold = u(rng);
    const LaplaceScale b(0.05 + u(rng) / 4);
    double prev_right = -1e300, prev_left = 1e300;
    for (double r = 0.0; r <= 25.0; r += 0.25) {
      const double right =
          log_likelihood_censored(pair_at(r), one(ObservationCell::right_censored(threshold)), b).right_censored_term;
      const double left =
          log_likelihood_censored(pair_at(r), one(ObservationCell::left_censored(threshold)), b).left_censored_term;
      violations += right < prev_right;
      violations += left > prev_left;
      prev_right = right;
      prev_left = left;
    }
    Rng gen(trial);
    const std::vector<double> masses{1.0, 1.0};
    const UpdateContext ctx{1.0, 0.01, masses, 100.0, &gen};
    for (double r : {threshold * 0.5, threshold, threshold * 1.5, u(rng)}) {
      for (auto cell : {ObservationCell::right_censored(threshold), ObservationCell::left_censored(threshold)}) {
        auto c = pair_at(r);
        const auto before = c;
        apply_pair_update(c, 0, 1, cell, ctx);
        const bool satisfied = cell.kind == CellKind::RightCensored ? r >= threshold : r <= threshold;
        gating_errors += satisfied != (c == before);
        ++cases;
      }
    }
  }
  return {violations == 0 && gating_errors == 0, std::to_string(violations) + " monotonicity violations, " +
                                                     std::to_string(gating_errors) + "/" + std::to_string(cases) +
                                                     " gating mismatches"};
}

Outcome gram_deviation() {
  double worst_dev = 0.0, worst_row = 0.0, worst_rec = 0.0;
  for (unsigned seed = 0; seed < 20; ++seed) {
    const auto d = oracle::distances(oracle::random_points(5 + seed * 3, 1 + seed % 5, seed));
    worst_dev = std::max(worst_dev, deviation_score(d));
    const auto g = gram_matrix(d);
    for (std::size_t i = 0; i < g.rows(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < g.cols(); ++j) s += g(i, j);
      worst_row = std::max(worst_row, std::abs(s));
    }
  }
  DenseMatrix tri(3, 3);
  tri(0, 1) = tri(1, 0) = 1;
  tri(0, 2) = tri(2, 0) = 1;
  tri(1, 2) = tri(2, 1) = 3;
  const double tri_score = deviation_score(tri);
  for (std::size_t n : {5u, 20u, 50u, 100u}) {
    const auto b = oracle::random_symmetric(n, static_cast<unsigned>(n));
    const auto e = symmetric_eigen(b);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        long double s = 0.0L;
        for (std::size_t k = 0; k < n; ++k) s += e.vectors(i, k) * e.values[k] * e.vectors(j, k);
        err = std::max(err, std::abs(static_cast<double>(s) - b(i, j)));
      }
    worst_rec = std::max(worst_rec, err / oracle::frobenius(b));
  }
  return {worst_dev <= 1e-8 && tri_score > 0.0 && worst_row <= 1e-10 && worst_rec <= 1e-8,
          "max Euclidean deviation " + fmt(worst_dev, 3) + ", triangle " + fmt(tri_score) + ", max row sum " +
              fmt(worst_row, 3) + ", max relative reconstruction error " + fmt(worst_rec, 3)};
}

Outcome dimension_selection() {
  std::size_t good = 0;
  std::string picks;
  for (unsigned run = 0; run < 10; ++run) {
    const auto x = oracle::random_points(20, 3, 500 + run);
    auto truth = oracle::distances(x);
    std::mt19937 rng(run);
    std::uniform_real_distribution<double> noise(-0.05, 0.05);
    for (std::size_t i = 0; i < 20; ++i)
      for (std::size_t j = i + 1; j < 20; ++j) truth(i, j) = truth(j, i) = truth(i, j) * (1 + noise(rng));
    const auto d = DissimilarityMatrix::from_dense(truth);
    const auto ranges = ParameterRanges::with_dimensions(1, 6);
    const SearchBudget budget{.initial = 20, .amc_rounds = 2, .batch = 10};
    const auto s = search(d, ranges, budget, mix_seed(10, run));
    auto theta3 = s.best, theta1 = s.best;
    theta3.dimension = 3;
    theta1.dimension = 1;
    const double ll3 = cv_log_likelihood(d, theta3, budget.folds, mix_seed(11, run)).cv_log_likelihood;
    const double ll1 = cv_log_likelihood(d, theta1, budget.folds, mix_seed(11, run)).cv_log_likelihood;
    good += s.best.dimension >= 3 && ll3 > ll1;
    picks += std::to_string(s.best.dimension);
  }
  return {good >= 9, std::to_string(good) + "/10 runs select N >= 3 with cvLL(3) > cvLL(1); picks " + picks};
}

Outcome lhs_strata() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lo(1e-4, 1.0), span(1.5, 1000.0);
  std::size_t bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto r = ParameterRanges::defaults();
    for (std::size_t p = 1; p < ParameterRanges::kCount; ++p) {
      r.ranges[p].lower = lo(rng);
      r.ranges[p].upper = r.ranges[p].lower * span(rng);
      r.ranges[p].scale = rng() % 2 ? ParameterScale::Logarithmic : ParameterScale::Linear;
    }
    r.cooling_rate().upper = std::min(r.cooling_rate().upper, 0.999);
    r.cooling_rate().lower = std::min(r.cooling_rate().lower, 0.5);
    const std::size_t n = 2 + rng() % 199;
    const auto samples = lhs_sample(r, n, rng());
    for (std::size_t p = 1; p < ParameterRanges::kCount; ++p) {
      const double a = r.ranges[p].transformed_lower(), b = r.ranges[p].transformed_upper();
      std::vector<int> hits(n, 0);
      for (const auto& theta : samples) {
        const double t = r.to_transformed(theta)[p];
        const auto k = std::min<std::size_t>(static_cast<std::size_t>((t - a) / (b - a) * n), n - 1);
        ++hits[k];
      }
      bad += std::count_if(hits.begin(), hits.end(), [](int h) { return h != 1; }) != 0;
    }
  }
  return {bad == 0, std::to_string(bad) + " of 300 (triple, dimension) checks with a stratum not hit exactly once"};
}

// ---------------------------------------------------------------------------

fs::path cli_dir;

int cli(const std::string& args) {
  const std::string cmd =
      "cd " + cli_dir.string() + " && " + TOPOLOW_CLI_PATH + " " + args + " > /dev/null 2> last_stderr.txt";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(cli_dir / p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome cli_determinism() {
  cli_dir = fs::temp_directory_path() / "topolow_acceptance_cli";
  fs::remove_all(cli_dir);
  fs::create_directories(cli_dir);
  const std::string budget = " --initial 4 --amc-rounds 1 --batch 3 --folds 3 --dim-max 4";
  struct Command {
    std::string name, args;
    std::vector<std::string> outputs;
  };
  const std::vector<Command> commands{
      {"simulate", "--seed 5 simulate --m 20 --clusters 3 --out sim", {"sim/truth.csv", "sim/input.csv", "sim/coords.csv", "sim/params.json"}},
      {"search", "--seed 5 search sim/input.csv" + budget + " --out srch", {"srch/history.csv", "srch/theta.json"}},
      {"euclidify", "--seed 5 euclidify sim/input.csv" + budget + " --out fit",
       {"fit/coordinates.csv", "fit/fit.json", "fit/search_history.csv"}},
      {"evaluate", "evaluate sim/truth.csv fit/coordinates.csv --svg --out ev",
       {"ev/report.csv", "ev/shepard.csv", "ev/shepard.svg"}},
      {"replay", "replay fit/manifest.json --out replayed", {"replayed/coordinates.csv", "replayed/fit.json"}},
      {"bench",
       "--seed 5 bench --preset compare --m 12 --clusters 2 --datasets 2 --replicates 2 --initial 2 --amc-rounds 0 "
       "--folds 2 --dim-max 3 --out bench",
       {}},
  };
  std::vector<std::string> failed;
  for (const auto& c : commands) {
    std::vector<std::string> first;
    bool ok = true;
    for (int pass = 0; pass < 2 && ok; ++pass) {
      ok = cli(c.args) == 0;
      auto outputs = c.outputs;
      if (c.name == "bench" && ok)
        for (const auto& e : fs::directory_iterator(cli_dir / "bench")) {
          const auto rel = fs::relative(e.path(), cli_dir);
          outputs = {(rel / "results.csv").string(), (rel / "summary.csv").string()};
        }
      for (std::size_t k = 0; k < outputs.size() && ok; ++k) {
        const auto text = slurp(outputs[k]);
        ok = !text.empty();
        if (pass == 0) first.push_back(text);
        else ok = ok && text == first[k];
      }
    }
    if (!ok) failed.push_back(c.name);
  }
  std::string detail = failed.empty() ? "all 6 subcommands byte-identical across two runs" : "differs or failed:";
  for (const auto& f : failed) detail += " " + f;
  return {failed.empty(), detail};
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* title;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {"C1", "Topolow beats classical MDS on distorted data", ordering},
      {"C2", "sparsity robustness", sparsity},
      {"C3", "scale robustness", scale},
      {"C4", "stability across seeds", stability},
      {"C5", "exact recovery of Euclidean data", exact_recovery},
      {"C6", "likelihood identities", likelihood_identities},
      {"C7", "displacement algebra", displacement_algebra},
      {"C8", "censored monotonicity and gating", censored_monotonicity},
      {"C9", "Gram and deviation score", gram_deviation},
      {"C10", "dimension selection", dimension_selection},
      {"C11", "LHS stratification", lhs_strata},
      {"C12", "end-to-end CLI determinism", cli_determinism},
  };
  std::size_t failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("[%s] %s %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str(),
                seconds_since(start));
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
