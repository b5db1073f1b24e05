#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "svg.hpp"
#include "topolow/bench.hpp"
#include "topolow/classical_mds.hpp"
#include "topolow/common.hpp"
#include "topolow/csv_io.hpp"
#include "topolow/embedding.hpp"
#include "topolow/metrics.hpp"
#include "topolow/param_search.hpp"
#include "topolow/synthgen.hpp"

#ifdef TOPOLOW_HAVE_OPENMP
#include <omp.h>
#endif

namespace topolow::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitRuntime = 4;

constexpr std::uint64_t kSearchStream = 1;

/// Bad flag combination detected after CLI11 has parsed the line.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct Global {
  std::optional<std::uint64_t> seed;
  int jobs = 0;
};

struct SeedChoice {
  std::uint64_t value = 1;
  std::string source = "default";
};

SeedChoice resolve_seed(const Global& global) {
  if (global.seed) return {*global.seed, "flag"};
  if (const char* env = std::getenv("EUCLIDIFY_SEED"); env != nullptr && *env != '\0') {
    std::uint64_t value = 0;
    const std::string text = env;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
      throw UsageError("EUCLIDIFY_SEED must be an unsigned integer, got '" + text + "'");
    return {value, "EUCLIDIFY_SEED"};
  }
  return {};
}

std::string number_or_na(double v) { return std::isfinite(v) ? csv::format_number(v) : "NA"; }

json options_of(const CLI::App& app) {
  json out = json::object();
  for (const auto* opt : app.get_options()) {
    const auto name = opt->get_name(false, true);
    if (name.empty() || name == "--help" || name == "-h") continue;
    const auto key = opt->get_single_name();
    if (opt->count() > 0) {
      const auto& res = opt->results();
      out[key] = res.size() == 1 ? json(res.front()) : json(res);
    } else if (!opt->get_default_str().empty()) {
      out[key] = opt->get_default_str();
    }
  }
  return out;
}

struct Manifest {
  std::string subcommand;
  std::vector<std::string> args;
  SeedChoice seed;
  bool seed_from_flag = false;
  json options;
  json inputs = json::object();
  std::vector<std::string> outputs;
  json timings = json::object();
  json extra = json::object();

  void write(const fs::path& path) const {
    json j;
    j["tool"] = "topolow";
    j["version"] = version();
    j["subcommand"] = subcommand;
    j["argv"] = args;
    auto replay = args;
    if (!seed_from_flag) {
      replay.push_back("--seed");
      replay.push_back(std::to_string(seed.value));
    }
    j["replay_args"] = replay;
    j["seed"] = seed.value;
    j["seed_source"] = seed.source;
    j["options"] = options;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    for (const auto& [k, v] : extra.items()) j[k] = v;
    j["timings"] = timings;
    csv::write_text_file(path, j.dump(2) + "\n");
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_output(Manifest& manifest, const fs::path& path, const std::string& content) {
  csv::write_text_file(path, content);
  manifest.outputs.push_back(path.string());
  std::cout << "wrote " << path.string() << '\n';
}

// ---------------------------------------------------------------------------
// Shared option groups

struct RangeFlags {
  ParameterRanges ranges = ParameterRanges::defaults();

  void attach(CLI::App* app) {
    app->add_option("--dim-min", ranges.dimension().lower, "Smallest embedding dimension searched")
        ->capture_default_str();
    app->add_option("--dim-max", ranges.dimension().upper, "Largest embedding dimension searched")
        ->capture_default_str();
    app->add_option("--k0-min", ranges.spring_constant().lower, "Lower bound for k0")->capture_default_str();
    app->add_option("--k0-max", ranges.spring_constant().upper, "Upper bound for k0")->capture_default_str();
    app->add_option("--c0-min", ranges.repulsion_constant().lower, "Lower bound for c0")->capture_default_str();
    app->add_option("--c0-max", ranges.repulsion_constant().upper, "Upper bound for c0")->capture_default_str();
    app->add_option("--alpha-min", ranges.cooling_rate().lower, "Lower bound for alpha")->capture_default_str();
    app->add_option("--alpha-max", ranges.cooling_rate().upper, "Upper bound for alpha")->capture_default_str();
  }
};

struct BudgetFlags {
  SearchBudget budget;

  void attach(CLI::App* app) {
    app->add_option("--initial", budget.initial, "Latin hypercube samples")->capture_default_str();
    app->add_option("--amc-rounds", budget.amc_rounds, "Adaptive Monte Carlo rounds")->capture_default_str();
    app->add_option("--batch", budget.batch, "Candidates per adaptive round")->capture_default_str();
    app->add_option("--folds", budget.folds, "Cross-validation folds")->capture_default_str()->check(
        CLI::Range(2, 1000));
    app->add_option("--max-iterations", budget.max_iterations, "Iteration cap per fit")->capture_default_str();
    app->add_option("--tolerance", budget.rel_tolerance, "Relative MAE change counted as converged")
        ->capture_default_str();
  }
};

struct InputFlags {
  std::string path;
  std::string layout = "auto";
  bool similarity = false;
  std::string transform = "identity";

  void attach(CLI::App* app) {
    app->add_option("input", path, "Dissimilarity CSV (long or wide)")->required();
    app->add_option("--layout", layout, "Input layout")
        ->check(CLI::IsMember({"auto", "long", "wide"}))
        ->capture_default_str();
    app->add_flag("--similarity", similarity, "Input holds similarities; convert before embedding");
    app->add_option("--transform", transform, "Similarity transform")
        ->check(CLI::IsMember({"identity", "log", "log2", "log10"}))
        ->capture_default_str();
  }

  DissimilarityMatrix load() const {
    const auto lay = layout == "long" ? csv::Layout::Long : layout == "wide" ? csv::Layout::Wide : csv::Layout::Auto;
    auto grid = csv::read_grid_file(path, lay);
    if (!similarity) {
      if (transform != "identity") throw UsageError("--transform requires --similarity");
      return csv::to_dissimilarity(std::move(grid));
    }
    SimilarityTransform t;
    if (transform == "log") t = SimilarityTransform::logarithm(std::exp(1.0));
    if (transform == "log2") t = SimilarityTransform::logarithm(2.0);
    if (transform == "log10") t = SimilarityTransform::logarithm(10.0);
    return from_similarity(csv::to_similarity(std::move(grid)), t);
  }
};

std::string history_csv(const SearchResult& result, std::size_t folds) {
  std::ostringstream out;
  out << "N,k0,c0,alpha,cv_log_likelihood";
  for (std::size_t f = 1; f <= folds; ++f) out << ",fold_mae_" << f;
  out << '\n';
  for (const auto& s : result.history) {
    out << s.theta.dimension << ',' << csv::format_number(s.theta.spring_constant) << ','
        << csv::format_number(s.theta.repulsion_constant) << ',' << csv::format_number(s.theta.cooling_rate) << ','
        << number_or_na(s.cv_log_likelihood);
    for (double mae : s.fold_maes) out << ',' << number_or_na(mae);
    out << '\n';
  }
  return out.str();
}

json theta_json(const Hyperparameters& theta) {
  return {{"N", theta.dimension},
          {"k0", theta.spring_constant},
          {"c0", theta.repulsion_constant},
          {"alpha", theta.cooling_rate}};
}

void print_validation(const DissimilarityMatrix& d) {
  const auto report = validate(d);
  std::cerr << "input: " << d.size() << " objects, " << report.summary() << '\n';
  if (!report.connected) {
    throw ValidationError("observation graph has " + std::to_string(report.components) +
                          " components; the embedding needs a connected graph");
  }
  require_valid(d);
}

// ---------------------------------------------------------------------------
// euclidify

struct EuclidifyCommand {
  InputFlags input;
  RangeFlags ranges;
  BudgetFlags budget;
  std::string out = "out";
  std::optional<int> dim;
  std::optional<double> k0, c0, alpha;
  CLI::App* app = nullptr;

  void attach(CLI::App& parent) {
    app = parent.add_subcommand("euclidify", "Embed a dissimilarity matrix into Euclidean space");
    input.attach(app);
    app->add_option("--out", out, "Output directory")->capture_default_str();
    app->add_option("--dim", dim, "Embedding dimension (with --k0 --c0 --alpha skips the search)");
    app->add_option("--k0", k0, "Spring constant");
    app->add_option("--c0", c0, "Repulsion constant");
    app->add_option("--alpha", alpha, "Cooling rate");
    ranges.attach(app);
    budget.attach(app);
  }

  void run(Manifest& manifest, const Global& global) {
    const auto total = Clock::now();
    const int given = int(dim.has_value()) + int(k0.has_value()) + int(c0.has_value()) + int(alpha.has_value());
    if (given != 0 && given != 4) throw UsageError("--dim, --k0, --c0 and --alpha must be given together");

    const auto d = input.load();
    print_validation(d);
    manifest.inputs["input"] = input.path;

    const fs::path dir = out;
    Hyperparameters theta;
    std::optional<SearchResult> searched;
    if (given == 4) {
      theta = {*dim, *k0, *c0, *alpha};
      theta.check();
    } else {
      auto b = budget.budget;
      b.jobs = global.jobs;
      const auto start = Clock::now();
      searched = search(d, ranges.ranges, b, mix_seed(manifest.seed.value, kSearchStream));
      manifest.timings["search_seconds"] = seconds_since(start);
      theta = searched->best;
      std::cerr << "search: " << searched->history.size() << " candidates, best N=" << theta.dimension << '\n';
    }

    FitOptions options;
    options.seed = manifest.seed.value;
    options.max_iterations = budget.budget.max_iterations;
    options.rel_tolerance = budget.budget.rel_tolerance;
    const auto start = Clock::now();
    const auto result = fit(d, theta, options);
    manifest.timings["fit_seconds"] = seconds_since(start);

    std::ostringstream coords;
    csv::write_coordinates(coords, result.configuration, d.labels());
    write_output(manifest, dir / "coordinates.csv", coords.str());

    json meta;
    meta["hyperparameters"] = theta_json(theta);
    meta["searched"] = searched.has_value();
    if (searched) meta["cv_log_likelihood"] = searched->best_cv_log_likelihood;
    meta["seed"] = result.seed;
    meta["iterations"] = result.iterations;
    meta["converged"] = result.converged;
    meta["final_mae"] = result.mae_trace.empty() ? 0.0 : result.mae_trace.back();
    meta["log_likelihood"] = result.final_log_likelihood;
    meta["likelihood"] = {{"exact_term", result.likelihood.exact_term},
                          {"left_censored_term", result.likelihood.left_censored_term},
                          {"right_censored_term", result.likelihood.right_censored_term},
                          {"total", result.likelihood.total},
                          {"exact_count", result.likelihood.exact_count},
                          {"left_censored_count", result.likelihood.left_censored_count},
                          {"right_censored_count", result.likelihood.right_censored_count},
                          {"scale", result.likelihood.scale}};
    write_output(manifest, dir / "fit.json", meta.dump(2) + "\n");
    if (searched) write_output(manifest, dir / "search_history.csv", history_csv(*searched, budget.budget.folds));
    manifest.timings["total_seconds"] = seconds_since(total);
    manifest.write(dir / "manifest.json");
  }
};

// ---------------------------------------------------------------------------
// search

struct SearchCommand {
  InputFlags input;
  RangeFlags ranges;
  BudgetFlags budget;
  std::string out = "out";
  CLI::App* app = nullptr;

  void attach(CLI::App& parent) {
    app = parent.add_subcommand("search", "Cross-validated hyperparameter and dimension search");
    input.attach(app);
    app->add_option("--out", out, "Output directory")->capture_default_str();
    ranges.attach(app);
    budget.attach(app);
  }

  void run(Manifest& manifest, const Global& global) {
    const auto start = Clock::now();
    const auto d = input.load();
    print_validation(d);
    manifest.inputs["input"] = input.path;
    auto b = budget.budget;
    b.jobs = global.jobs;
    const auto result = search(d, ranges.ranges, b, mix_seed(manifest.seed.value, kSearchStream));

    const fs::path dir = out;
    write_output(manifest, dir / "history.csv", history_csv(result, b.folds));
    json theta = theta_json(result.best);
    theta["cv_log_likelihood"] = result.best_cv_log_likelihood;
    theta["candidates"] = result.history.size();
    theta["failures"] = result.failures;
    write_output(manifest, dir / "theta.json", theta.dump(2) + "\n");
    manifest.timings["total_seconds"] = seconds_since(start);
    manifest.write(dir / "manifest.json");
  }
};

// ---------------------------------------------------------------------------
// evaluate

bool looks_like_coordinates(const fs::path& path) {
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  const auto fields = csv::split_record(header);
  return fields.size() >= 2 && fields[1].rfind("dim_", 0) == 0;
}

std::vector<std::size_t> align_labels(const std::vector<std::string>& want, const std::vector<std::string>& have) {
  if (want.size() != have.size())
    throw DomainError("shape mismatch: truth has " + std::to_string(want.size()) + " objects, embedding has " +
                      std::to_string(have.size()));
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < have.size(); ++i) index[have[i]] = i;
  std::vector<std::size_t> order(want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    const auto it = index.find(want[i]);
    if (it == index.end()) throw DomainError("label '" + want[i] + "' missing from the embedding");
    order[i] = it->second;
  }
  return order;
}

struct EvaluateCommand {
  std::string truth_path;
  std::string embedded_path;
  std::string kind = "auto";
  std::string method = "topolow";
  std::string out = "out";
  bool svg = false;
  CLI::App* app = nullptr;

  void attach(CLI::App& parent) {
    app = parent.add_subcommand("evaluate", "Score an embedding against a complete truth matrix");
    app->add_option("truth", truth_path, "Complete truth matrix (wide or long CSV)")->required();
    app->add_option("embedded", embedded_path, "Coordinates CSV or embedded distance matrix")->required();
    app->add_option("--kind", kind, "How to read the embedding")
        ->check(CLI::IsMember({"auto", "coords", "matrix"}))
        ->capture_default_str();
    app->add_option("--method", method, "Method label for the Shepard table")->capture_default_str();
    app->add_option("--out", out, "Output directory")->capture_default_str();
    app->add_flag("--svg", svg, "Also render shepard.svg");
  }

  void run(Manifest& manifest, const Global&) {
    const auto start = Clock::now();
    const auto truth_matrix = csv::read_dissimilarity_file(truth_path);
    if (!truth_matrix.complete()) throw ValidationError("truth matrix must be complete");
    const auto truth = truth_matrix.to_dense();
    const auto& labels = truth_matrix.labels();
    const std::size_t m = labels.size();

    DenseMatrix embedded(m, m);
    const bool coords = kind == "coords" || (kind == "auto" && looks_like_coordinates(embedded_path));
    if (coords) {
      const auto read = csv::read_coordinates_file(embedded_path);
      const auto order = align_labels(labels, read.labels);
      Configuration config(m, read.coords.cols());
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < read.coords.cols(); ++k) config.point(i)[k] = read.coords(order[i], k);
      embedded = config.distances();
    } else {
      const auto e = csv::read_dissimilarity_file(embedded_path);
      if (!e.complete()) throw ValidationError("embedded distance matrix must be complete");
      const auto order = align_labels(labels, e.labels());
      const auto dense = e.to_dense();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) embedded(i, j) = dense(order[i], order[j]);
    }
    manifest.inputs["truth"] = truth_path;
    manifest.inputs["embedded"] = embedded_path;
    manifest.extra["embedded_kind"] = coords ? "coords" : "matrix";

    const auto report = evaluate(truth, embedded);
    const fs::path dir = out;
    std::ostringstream rep;
    rep << "method,normalized_stress,pearson_r,r_squared,deviation_score,n_pairs\n"
        << method << ',' << csv::format_number(report.normalized_stress, 6) << ','
        << csv::format_number(report.pearson_r, 6) << ',' << csv::format_number(report.r_squared, 6) << ','
        << csv::format_number(report.deviation_score, 6) << ',' << report.n_pairs << '\n';
    write_output(manifest, dir / "report.csv", rep.str());

    const auto pairs = shepard_pairs(truth, embedded);
    std::ostringstream shep;
    shep << "true_dissimilarity,embedded_distance,method\n";
    for (const auto& p : pairs)
      shep << csv::format_number(p.truth) << ',' << csv::format_number(p.embedded) << ',' << method << '\n';
    write_output(manifest, dir / "shepard.csv", shep.str());
    if (svg) write_output(manifest, dir / "shepard.svg", shepard_svg(pairs, "Shepard plot: " + method));

    std::cout << "normalized_stress=" << csv::format_number(report.normalized_stress, 6)
              << " r_squared=" << csv::format_number(report.r_squared, 6) << '\n';
    manifest.timings["total_seconds"] = seconds_since(start);
    manifest.write(dir / "manifest.json");
  }
};

// ---------------------------------------------------------------------------
// simulate

struct SimulateCommand {
  SyntheticSpec spec;
  std::vector<double> powers{spec.distortion.powers.begin(), spec.distortion.powers.end()};
  std::string out = "out";
  CLI::App* app = nullptr;

  void attach(CLI::App& parent) {
    app = parent.add_subcommand("simulate", "Generate a synthetic non-metric dataset bundle");
    app->add_option("--m", spec.m, "Number of objects")->capture_default_str()->check(CLI::Range(2, 1000000));
    app->add_option("--clusters", spec.clusters, "Number of clusters")->capture_default_str();
    app->add_option("--dimension", spec.dimension, "Ground-truth dimension")->capture_default_str();
    app->add_option("--fraction", spec.fraction, "Fraction of pairs masked")->capture_default_str();
    app->add_option("--powers", powers, "Tercile powers (lower,middle,upper)")
        ->expected(3)
        ->delimiter(',')
        ->capture_default_str();
    app->add_option("--noise-max", spec.distortion.noise_max, "Upper bound of the multiplicative noise")
        ->capture_default_str();
    app->add_option("--censor-fraction", spec.censor_fraction, "Right-censor the top fraction of values")
        ->capture_default_str();
    app->add_option("--out", out, "Output directory")->capture_default_str();
  }

  void run(Manifest& manifest, const Global&) {
    const auto start = Clock::now();
    std::copy(powers.begin(), powers.end(), spec.distortion.powers.begin());
    spec.seed = manifest.seed.value;
    const auto data = simulate(spec);
    const fs::path dir = out;
    write_bundle(dir, data);
    for (const char* name : {"truth.csv", "input.csv", "coords.csv", "params.json"})
      manifest.outputs.push_back((dir / name).string());
    std::cout << "wrote bundle " << dir.string() << " (" << data.masked_pairs << " of "
              << spec.m * (spec.m - 1) / 2 << " pairs masked)\n";
    manifest.extra["masked_pairs"] = data.masked_pairs;
    manifest.timings["total_seconds"] = seconds_since(start);
    manifest.write(dir / "manifest.json");
  }
};

// ---------------------------------------------------------------------------
// bench

struct BenchCommand {
  std::string plan_path;
  std::string preset = "compare";
  std::string out = "bench_out";
  ExperimentPlan plan;
  BudgetFlags budget;
  RangeFlags ranges;
  std::string methods;
  CLI::App* app = nullptr;
  CLI::Option* m_opt = nullptr;
  CLI::Option* clusters_opt = nullptr;
  CLI::Option* fractions_opt = nullptr;
  CLI::Option* sizes_opt = nullptr;
  CLI::Option* datasets_opt = nullptr;
  CLI::Option* replicates_opt = nullptr;
  CLI::Option* baseline_opt = nullptr;
  CLI::Option* methods_opt = nullptr;

  void attach(CLI::App& parent) {
    app = parent.add_subcommand("bench", "Run a method comparison, sparsity or scale experiment");
    app->add_option("--plan", plan_path, "Experiment plan JSON")->check(CLI::ExistingFile);
    app->add_option("--preset", preset, "Experiment kind when no plan file is given")
        ->check(CLI::IsMember({"compare", "sparsity", "scale"}))
        ->capture_default_str();
    m_opt = app->add_option("--m", plan.m, "Objects per dataset");
    clusters_opt = app->add_option("--clusters", plan.clusters, "Clusters per dataset");
    fractions_opt = app->add_option("--fractions", plan.fractions, "Mask fractions")->delimiter(',');
    sizes_opt = app->add_option("--sizes", plan.sizes, "Dataset sizes (scale)")->delimiter(',');
    datasets_opt = app->add_option("--datasets", plan.datasets, "Independent ground truths per condition");
    replicates_opt = app->add_option("--replicates", plan.replicates, "Fit seeds per dataset variant");
    baseline_opt = app->add_option("--baseline-dim", plan.baseline_dim,
                                   "Classical MDS dimension (0 matches the selected N)");
    methods_opt = app->add_option("--methods", methods, "Comma-separated methods");
    budget.attach(app);
    ranges.attach(app);
    app->add_option("--out", out, "Output root; results go to <out>/<plan hash>")->capture_default_str();
  }

  ExperimentPlan resolve(const Manifest& manifest) const {
    ExperimentPlan p;
    if (!plan_path.empty()) {
      std::ifstream in(plan_path);
      std::stringstream text;
      text << in.rdbuf();
      p = plan_from_json(text.str());
    } else {
      p = ExperimentPlan::preset(experiment_kind_from_string(preset));
    }
    if (plan_path.empty() || manifest.seed.source != "default") p.base_seed = manifest.seed.value;
    if (m_opt->count()) p.m = plan.m;
    if (clusters_opt->count()) p.clusters = plan.clusters;
    if (fractions_opt->count()) p.fractions = plan.fractions;
    if (sizes_opt->count()) p.sizes = plan.sizes;
    if (datasets_opt->count()) p.datasets = plan.datasets;
    if (replicates_opt->count()) p.replicates = plan.replicates;
    if (baseline_opt->count()) p.baseline_dim = plan.baseline_dim;
    if (methods_opt->count()) {
      p.methods.clear();
      for (const auto& field : csv::split_record(methods)) p.methods.emplace_back(field);
    }
    for (const char* name : {"--initial", "--amc-rounds", "--batch", "--folds", "--max-iterations", "--tolerance"}) {
      if (app->get_option(name)->count() == 0) continue;
      const std::string n = name;
      if (n == "--initial") p.budget.initial = budget.budget.initial;
      if (n == "--amc-rounds") p.budget.amc_rounds = budget.budget.amc_rounds;
      if (n == "--batch") p.budget.batch = budget.budget.batch;
      if (n == "--folds") p.budget.folds = budget.budget.folds;
      if (n == "--max-iterations") p.budget.max_iterations = budget.budget.max_iterations;
      if (n == "--tolerance") p.budget.rel_tolerance = budget.budget.rel_tolerance;
    }
    static constexpr const char* range_flags[][2] = {{"--dim-min", "--dim-max"}, {"--k0-min", "--k0-max"},
                                                     {"--c0-min", "--c0-max"}, {"--alpha-min", "--alpha-max"}};
    for (std::size_t k = 0; k < ParameterRanges::kCount; ++k) {
      if (app->get_option(range_flags[k][0])->count()) p.ranges.ranges[k].lower = ranges.ranges.ranges[k].lower;
      if (app->get_option(range_flags[k][1])->count()) p.ranges.ranges[k].upper = ranges.ranges.ranges[k].upper;
    }
    p.check();
    return p;
  }

  int run(Manifest& manifest, const Global& global) {
    const auto start = Clock::now();
    auto p = resolve(manifest);
    p.budget.jobs = global.jobs;
    const auto result = run_experiment(p);
    const auto dir = write_experiment(out, result);
    for (const char* name : {"results.csv", "summary.csv", "searches.csv", "timings.csv", "plan.json"})
      manifest.outputs.push_back((dir / name).string());
    std::cout << "wrote " << dir.string() << '\n';
    write_summary_csv(std::cout, result.summary);

    const auto failed = std::count_if(result.rows.begin(), result.rows.end(), [](const ResultRow& r) { return !r.ok; });
    manifest.extra["plan_hash"] = plan_hash(p);
    manifest.extra["rows"] = result.rows.size();
    manifest.extra["failed_rows"] = failed;
    manifest.timings["total_seconds"] = seconds_since(start);
    manifest.write(dir / "manifest.json");
    if (!result.rows.empty() && static_cast<std::size_t>(failed) == result.rows.size()) {
      std::cerr << "error: every run failed\n";
      return kExitRuntime;
    }
    return kExitOk;
  }
};

// ---------------------------------------------------------------------------

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const UsageError*>(&e) ||
      dynamic_cast<const DomainError*>(&e))
    return kExitUsage;
  if (dynamic_cast<const ValidationError*>(&e)) return kExitValidation;
  return kExitRuntime;
}

std::vector<std::string> replay_args(const std::string& manifest_path, const std::string& out) {
  std::ifstream in(manifest_path);
  if (!in) throw ParseError("cannot open manifest " + manifest_path, 0, 0);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what(), 0, 0);
  }
  if (!j.contains("replay_args")) throw ParseError("manifest has no replay_args", 0, 0);
  auto args = j["replay_args"].get<std::vector<std::string>>();
  if (!args.empty() && args.front() == "replay") throw UsageError("refusing to replay a replay");
  if (!out.empty()) {
    bool replaced = false;
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
      if (args[i] == "--out") {
        args[i + 1] = out;
        replaced = true;
      }
    }
    if (!replaced) {
      args.push_back("--out");
      args.push_back(out);
    }
  }
  return args;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Embed sparse, noisy, non-metric dissimilarity data into Euclidean space", "topolow"};
  app.set_version_flag("--version", std::string("topolow ") + version());
  app.require_subcommand(1);
  app.fallthrough();

  Global global;
  app.add_option("--seed", global.seed, "Random seed (falls back to EUCLIDIFY_SEED, then 1)");
  app.add_option("--jobs", global.jobs, "Concurrent evaluations (0: all cores)")->check(CLI::NonNegativeNumber);

  EuclidifyCommand euclidify;
  SearchCommand search_cmd;
  EvaluateCommand evaluate_cmd;
  SimulateCommand simulate_cmd;
  BenchCommand bench;
  euclidify.attach(app);
  search_cmd.attach(app);
  evaluate_cmd.attach(app);
  simulate_cmd.attach(app);
  bench.attach(app);

  std::string manifest_path;
  std::string replay_out;
  auto* replay = app.add_subcommand("replay", "Rerun a command from its manifest.json");
  replay->add_option("manifest", manifest_path, "Path to manifest.json")->required();
  replay->add_option("--out", replay_out, "Write outputs here instead of the recorded location");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
#ifdef TOPOLOW_HAVE_OPENMP
    if (global.jobs > 0) omp_set_num_threads(global.jobs);
#endif
    if (replay->parsed()) return run(replay_args(manifest_path, replay_out));

    Manifest manifest;
    manifest.args = args;
    manifest.seed = resolve_seed(global);
    manifest.seed_from_flag = global.seed.has_value();
    for (auto* sub : app.get_subcommands()) {
      manifest.subcommand = sub->get_name();
      manifest.options = options_of(*sub);
    }
    manifest.options["seed"] = manifest.seed.value;
    manifest.options["jobs"] = global.jobs;

    if (euclidify.app->parsed()) euclidify.run(manifest, global);
    if (search_cmd.app->parsed()) search_cmd.run(manifest, global);
    if (evaluate_cmd.app->parsed()) evaluate_cmd.run(manifest, global);
    if (simulate_cmd.app->parsed()) simulate_cmd.run(manifest, global);
    if (bench.app->parsed()) return bench.run(manifest, global);
    return kExitOk;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace topolow::cli
