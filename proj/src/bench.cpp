#include "topolow/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <tuple>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "topolow/classical_mds.hpp"
#include "topolow/common.hpp"
#include "topolow/csv_io.hpp"
#include "topolow/embedding.hpp"
#include "topolow/metrics.hpp"

#ifdef TOPOLOW_HAVE_OPENMP
#include <omp.h>
#endif

namespace topolow {

namespace {

using Clock = std::chrono::steady_clock;
using json = nlohmann::ordered_json;

constexpr std::uint64_t kSearchStream = 0x5EA4C;
constexpr std::uint64_t kFitStream = 1000;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Variant {
  std::size_t dataset;
  std::size_t m;
  double fraction;
  std::uint64_t seed;
};

std::vector<Variant> variants_of(const ExperimentPlan& plan) {
  std::vector<Variant> out;
  auto seed_of = [&](std::size_t d) { return mix_seed(plan.base_seed, d); };
  switch (plan.kind) {
    case ExperimentKind::Compare:
      for (std::size_t d = 0; d < plan.datasets; ++d) out.push_back({d, plan.m, plan.fractions.front(), seed_of(d)});
      break;
    case ExperimentKind::Sparsity:
      for (std::size_t d = 0; d < plan.datasets; ++d)
        for (double f : plan.fractions) out.push_back({d, plan.m, f, seed_of(d)});
      break;
    case ExperimentKind::Scale:
      for (std::size_t size : plan.sizes)
        for (std::size_t d = 0; d < plan.datasets; ++d) out.push_back({d, size, plan.fractions.front(), seed_of(d)});
      break;
  }
  return out;
}

std::string csv_safe(std::string text) {
  std::replace_if(text.begin(), text.end(), [](char c) { return c == ',' || c == '\n' || c == '\r' || c == '"'; }, ';');
  return text;
}

std::string num(double v) { return csv::format_number(v); }

ResultRow scored_row(const std::string& method, const Variant& v, std::size_t replicate, std::uint64_t seed,
                     const DenseMatrix& truth, const DenseMatrix& embedded, int dimension) {
  ResultRow row;
  row.method = method;
  row.dataset = v.dataset;
  row.m = v.m;
  row.fraction = v.fraction;
  row.replicate = replicate;
  row.seed = seed;
  row.dimension = dimension;
  const auto report = evaluate(truth, embedded);
  row.normalized_stress = report.normalized_stress;
  row.pearson_r = report.pearson_r;
  row.r_squared = report.r_squared;
  return row;
}

ResultRow failed_row(const std::string& method, const Variant& v, std::size_t replicate, std::uint64_t seed,
                     const std::string& error) {
  ResultRow row;
  row.method = method;
  row.dataset = v.dataset;
  row.m = v.m;
  row.fraction = v.fraction;
  row.replicate = replicate;
  row.seed = seed;
  row.ok = false;
  row.error = error;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  row.normalized_stress = row.pearson_r = row.r_squared = nan;
  return row;
}

}  // namespace

const char* to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::Compare: return "compare";
    case ExperimentKind::Sparsity: return "sparsity";
    case ExperimentKind::Scale: return "scale";
  }
  return "compare";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  if (name == "compare") return ExperimentKind::Compare;
  if (name == "sparsity") return ExperimentKind::Sparsity;
  if (name == "scale") return ExperimentKind::Scale;
  throw DomainError("unknown experiment kind '" + name + "' (expected compare, sparsity or scale)");
}

void ExperimentPlan::check() const {
  if (methods.empty()) throw DomainError("plan needs at least one method");
  for (const auto& method : methods)
    if (method != kMethodTopolow && method != kMethodClassicalMds) throw DomainError("unknown method '" + method + "'");
  if (replicates < 1) throw DomainError("plan needs replicates >= 1");
  if (datasets < 1) throw DomainError("plan needs datasets >= 1");
  if (fractions.empty()) throw DomainError("plan needs at least one mask fraction");
  if (kind == ExperimentKind::Scale && sizes.empty()) throw DomainError("scale plan needs at least one size");
  if (baseline_dim < 0) throw DomainError("baseline_dim must be >= 0");
  ranges.check();
}

ExperimentPlan ExperimentPlan::preset(ExperimentKind kind) {
  ExperimentPlan plan;
  plan.kind = kind;
  if (kind == ExperimentKind::Sparsity) plan.fractions = {0.3, 0.6, 0.9};
  if (kind == ExperimentKind::Scale) plan.sizes = {25, 50, 100};
  return plan;
}

std::string plan_to_json(const ExperimentPlan& plan) {
  json j;
  j["kind"] = to_string(plan.kind);
  j["m"] = plan.m;
  j["clusters"] = plan.clusters;
  j["fractions"] = plan.fractions;
  j["sizes"] = plan.sizes;
  j["methods"] = plan.methods;
  j["datasets"] = plan.datasets;
  j["replicates"] = plan.replicates;
  j["base_seed"] = plan.base_seed;
  j["baseline_dim"] = plan.baseline_dim;
  j["budget"] = {{"initial", plan.budget.initial},
                 {"amc_rounds", plan.budget.amc_rounds},
                 {"batch", plan.budget.batch},
                 {"folds", plan.budget.folds},
                 {"max_iterations", plan.budget.max_iterations},
                 {"rel_tolerance", plan.budget.rel_tolerance}};
  static constexpr const char* names[] = {"dimension", "k0", "c0", "alpha"};
  json ranges = json::object();
  for (std::size_t p = 0; p < ParameterRanges::kCount; ++p)
    ranges[names[p]] = {plan.ranges.ranges[p].lower, plan.ranges.ranges[p].upper};
  j["ranges"] = ranges;
  j["distortion"] = {{"powers", plan.distortion.powers}, {"noise_max", plan.distortion.noise_max}};
  return j.dump(2) + "\n";
}

ExperimentPlan plan_from_json(const std::string& text) {
  ExperimentPlan plan;
  try {
    const auto j = json::parse(text);
    if (j.contains("kind")) plan = ExperimentPlan::preset(experiment_kind_from_string(j["kind"].get<std::string>()));
    plan.m = j.value("m", plan.m);
    plan.clusters = j.value("clusters", plan.clusters);
    plan.fractions = j.value("fractions", plan.fractions);
    plan.sizes = j.value("sizes", plan.sizes);
    plan.methods = j.value("methods", plan.methods);
    plan.datasets = j.value("datasets", plan.datasets);
    plan.replicates = j.value("replicates", plan.replicates);
    plan.base_seed = j.value("base_seed", plan.base_seed);
    plan.baseline_dim = j.value("baseline_dim", plan.baseline_dim);
    if (j.contains("budget")) {
      const auto& b = j["budget"];
      plan.budget.initial = b.value("initial", plan.budget.initial);
      plan.budget.amc_rounds = b.value("amc_rounds", plan.budget.amc_rounds);
      plan.budget.batch = b.value("batch", plan.budget.batch);
      plan.budget.folds = b.value("folds", plan.budget.folds);
      plan.budget.max_iterations = b.value("max_iterations", plan.budget.max_iterations);
      plan.budget.rel_tolerance = b.value("rel_tolerance", plan.budget.rel_tolerance);
    }
    if (j.contains("ranges")) {
      static constexpr const char* names[] = {"dimension", "k0", "c0", "alpha"};
      for (std::size_t p = 0; p < ParameterRanges::kCount; ++p) {
        if (!j["ranges"].contains(names[p])) continue;
        const auto bounds = j["ranges"][names[p]].get<std::array<double, 2>>();
        plan.ranges.ranges[p].lower = bounds[0];
        plan.ranges.ranges[p].upper = bounds[1];
      }
    }
    if (j.contains("distortion")) {
      plan.distortion.powers = j["distortion"].value("powers", plan.distortion.powers);
      plan.distortion.noise_max = j["distortion"].value("noise_max", plan.distortion.noise_max);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("experiment plan: ") + e.what(), 0, 0);
  }
  plan.check();
  return plan;
}

std::string plan_hash(const ExperimentPlan& plan) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : plan_to_json(plan)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::pair<double, double> mean_sd(const std::vector<double>& values) {
  if (values.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); }))
    return {values.front(), 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

ExperimentResult run_experiment(const ExperimentPlan& plan) {
  plan.check();
  ExperimentResult result{plan, {}, {}, {}};
  const bool want_topolow = std::count(plan.methods.begin(), plan.methods.end(), kMethodTopolow) > 0;

  for (const auto& v : variants_of(plan)) {
    SyntheticSpec spec;
    spec.m = v.m;
    spec.clusters = std::min(plan.clusters, v.m);
    spec.fraction = v.fraction;
    spec.seed = v.seed;
    spec.distortion = plan.distortion;

    std::vector<ResultRow> variant_rows;
    auto fail_all = [&](const std::string& method, const std::string& error) {
      for (std::size_t r = 0; r < plan.replicates; ++r)
        variant_rows.push_back(failed_row(method, v, r, mix_seed(v.seed, kFitStream + r), error));
    };

    std::optional<SyntheticDataset> data;
    try {
      data = simulate(spec);
    } catch (const std::exception& e) {
      for (const auto& method : plan.methods) fail_all(method, e.what());
      result.rows.insert(result.rows.end(), variant_rows.begin(), variant_rows.end());
      continue;
    }
    double deviation = std::numeric_limits<double>::quiet_NaN();
    try {
      deviation = deviation_score(data->truth);
    } catch (const std::exception& e) {
      warn(std::string("deviation score unavailable: ") + e.what());
    }

    std::optional<Hyperparameters> theta;
    std::string search_error;
    if (want_topolow) {
      SearchRecord record{v.dataset, v.m, v.fraction, {}, 0.0, 0.0, true, {}};
      const auto start = Clock::now();
      try {
        const auto found = search(data->input, plan.ranges, plan.budget, mix_seed(v.seed, kSearchStream));
        theta = found.best;
        record.theta = found.best;
        record.cv_log_likelihood = found.best_cv_log_likelihood;
      } catch (const std::exception& e) {
        search_error = std::string("search failed: ") + e.what();
        record.ok = false;
        record.error = search_error;
      }
      record.runtime_seconds = seconds_since(start);
      result.searches.push_back(record);
    }

    for (const auto& method : plan.methods) {
      if (method == kMethodTopolow) {
        if (!theta) {
          fail_all(method, search_error);
          continue;
        }
        std::vector<ResultRow> reps(plan.replicates);
        const auto n = static_cast<std::ptrdiff_t>(plan.replicates);
#ifdef TOPOLOW_HAVE_OPENMP
        const int threads = plan.budget.jobs > 0 ? plan.budget.jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
#endif
        for (std::ptrdiff_t r = 0; r < n; ++r) {
          const auto rep = static_cast<std::size_t>(r);
          const auto seed = mix_seed(v.seed, kFitStream + rep);
          const auto start = Clock::now();
          try {
            FitOptions options;
            options.seed = seed;
            options.max_iterations = plan.budget.max_iterations;
            options.rel_tolerance = plan.budget.rel_tolerance;
            const auto fitted = fit(data->input, *theta, options);
            reps[rep] = scored_row(method, v, rep, seed, data->truth, fitted.configuration.distances(),
                                   theta->dimension);
          } catch (const std::exception& e) {
            reps[rep] = failed_row(method, v, rep, seed, e.what());
          }
          reps[rep].runtime_seconds = seconds_since(start);
        }
        variant_rows.insert(variant_rows.end(), reps.begin(), reps.end());
      } else {
        const int dim = plan.baseline_dim > 0 ? plan.baseline_dim : (theta ? theta->dimension : 2);
        const auto start = Clock::now();
        try {
          const auto config = classical_mds(median_impute(data->input), dim);
          const double elapsed = seconds_since(start);
          const auto row = scored_row(method, v, 0, 0, data->truth, config.distances(),
                                      static_cast<int>(config.dimension()));
          for (std::size_t r = 0; r < plan.replicates; ++r) {
            variant_rows.push_back(row);
            variant_rows.back().replicate = r;
            variant_rows.back().runtime_seconds = r == 0 ? elapsed : 0.0;
          }
        } catch (const std::exception& e) {
          for (std::size_t r = 0; r < plan.replicates; ++r) variant_rows.push_back(failed_row(method, v, r, 0, e.what()));
        }
      }
    }
    for (auto& row : variant_rows) row.deviation_score = deviation;
    result.rows.insert(result.rows.end(), variant_rows.begin(), variant_rows.end());
  }
  result.summary = stability_stats(result.rows);
  return result;
}

std::vector<SummaryRow> stability_stats(const std::vector<ResultRow>& rows) {
  struct Key {
    std::string method;
    std::size_t m;
    double fraction;
    bool operator<(const Key& o) const {
      return std::tie(method, m, fraction) < std::tie(o.method, o.m, o.fraction);
    }
  };
  // Insertion order keeps the summary aligned with the results table.
  std::vector<Key> order;
  std::map<Key, std::map<std::size_t, std::vector<const ResultRow*>>> groups;
  for (const auto& row : rows) {
    const Key key{row.method, row.m, row.fraction};
    if (!groups.count(key)) order.push_back(key);
    groups[key][row.dataset].push_back(&row);
  }

  auto summarize = [](const Key& key, std::string dataset, const std::vector<const ResultRow*>& members) {
    SummaryRow s;
    s.method = key.method;
    s.dataset = std::move(dataset);
    s.m = key.m;
    s.fraction = key.fraction;
    std::vector<double> stress, r2;
    for (const auto* row : members) {
      if (!row->ok) {
        ++s.failures;
        continue;
      }
      stress.push_back(row->normalized_stress);
      r2.push_back(row->r_squared);
    }
    s.runs = stress.size();
    std::tie(s.mean_stress, s.sd_stress) = mean_sd(stress);
    std::tie(s.mean_r_squared, s.sd_r_squared) = mean_sd(r2);
    return s;
  };

  std::vector<SummaryRow> out;
  for (const auto& key : order) {
    const auto& by_dataset = groups[key];
    std::vector<const ResultRow*> pooled;
    for (const auto& [dataset, members] : by_dataset) {
      out.push_back(summarize(key, std::to_string(dataset), members));
      pooled.insert(pooled.end(), members.begin(), members.end());
    }
    if (by_dataset.size() > 1) out.push_back(summarize(key, "all", pooled));
  }
  return out;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "method,dataset,m,fraction,replicate,seed,dimension,deviation_score,normalized_stress,pearson_r,r_squared,"
         "status,error\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.dataset << ',' << r.m << ',' << num(r.fraction) << ',' << r.replicate << ','
        << r.seed << ',' << r.dimension << ',' << num(r.deviation_score) << ',' << num(r.normalized_stress) << ','
        << num(r.pearson_r) << ',' << num(r.r_squared) << ',' << (r.ok ? "ok" : "failed") << ','
        << csv_safe(r.error) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "method,dataset,m,fraction,runs,failures,mean_stress,sd_stress,mean_r_squared,sd_r_squared\n";
  for (const auto& s : rows) {
    out << s.method << ',' << s.dataset << ',' << s.m << ',' << num(s.fraction) << ',' << s.runs << ','
        << s.failures << ',' << num(s.mean_stress) << ',' << num(s.sd_stress) << ',' << num(s.mean_r_squared)
        << ',' << num(s.sd_r_squared) << '\n';
  }
}

std::filesystem::path write_experiment(const std::filesystem::path& root, const ExperimentResult& result) {
  const auto dir = root / plan_hash(result.plan);
  std::ostringstream results, summary, searches, timings;
  write_results_csv(results, result.rows);
  write_summary_csv(summary, result.summary);

  searches << "dataset,m,fraction,N,k0,c0,alpha,cv_log_likelihood,status,error\n";
  for (const auto& s : result.searches) {
    searches << s.dataset << ',' << s.m << ',' << num(s.fraction) << ',' << s.theta.dimension << ','
             << num(s.theta.spring_constant) << ',' << num(s.theta.repulsion_constant) << ','
             << num(s.theta.cooling_rate) << ',' << num(s.cv_log_likelihood) << ',' << (s.ok ? "ok" : "failed")
             << ',' << csv_safe(s.error) << '\n';
  }

  timings << "stage,method,dataset,m,fraction,replicate,runtime_seconds\n";
  for (const auto& s : result.searches)
    timings << "search,topolow," << s.dataset << ',' << s.m << ',' << num(s.fraction) << ",," << num(s.runtime_seconds)
            << '\n';
  for (const auto& r : result.rows)
    timings << "fit," << r.method << ',' << r.dataset << ',' << r.m << ',' << num(r.fraction) << ',' << r.replicate
            << ',' << num(r.runtime_seconds) << '\n';

  csv::write_text_file(dir / "results.csv", results.str());
  csv::write_text_file(dir / "summary.csv", summary.str());
  csv::write_text_file(dir / "searches.csv", searches.str());
  csv::write_text_file(dir / "timings.csv", timings.str());
  csv::write_text_file(dir / "plan.json", plan_to_json(result.plan));
  return dir;
}

}  // namespace topolow
