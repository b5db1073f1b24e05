#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "topolow/param_search.hpp"
#include "topolow/synthgen.hpp"

namespace topolow {

enum class ExperimentKind { Compare, Sparsity, Scale };

const char* to_string(ExperimentKind kind) noexcept;
ExperimentKind experiment_kind_from_string(const std::string& name);

inline constexpr const char* kMethodTopolow = "topolow";
inline constexpr const char* kMethodClassicalMds = "classical_mds";

struct ExperimentPlan {
  ExperimentKind kind = ExperimentKind::Compare;
  std::size_t m = 50;
  std::size_t clusters = 5;
  std::vector<double> fractions{0.3};  // Compare and Scale use the first entry
  std::vector<std::size_t> sizes{50};  // Scale only
  std::vector<std::string> methods{kMethodTopolow, kMethodClassicalMds};
  std::size_t datasets = 1;    // independent ground truths per condition
  std::size_t replicates = 10;  // Topolow fit seeds per dataset variant
  std::uint64_t base_seed = 1;
  SearchBudget budget;
  ParameterRanges ranges = ParameterRanges::defaults();
  /// Dimension of the classical MDS baseline; 0 matches Topolow's selected N.
  int baseline_dim = 2;
  DistortionParams distortion;

  /// Throws DomainError on an empty method list, unknown method, zero
  /// replicates or datasets, or an empty fraction/size list.
  void check() const;

  /// Standard presets: sparsity uses fractions {0.3, 0.6, 0.9}, scale uses
  /// sizes {25, 50, 100}.
  static ExperimentPlan preset(ExperimentKind kind);
};

std::string plan_to_json(const ExperimentPlan& plan);
ExperimentPlan plan_from_json(const std::string& text);
/// 16 hex digits identifying the plan (FNV-1a of its canonical JSON).
std::string plan_hash(const ExperimentPlan& plan);

struct ResultRow {
  std::string method;
  std::size_t dataset = 0;
  std::size_t m = 0;
  double fraction = 0.0;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  int dimension = 0;
  double deviation_score = 0.0;  // of the variant's truth matrix
  double normalized_stress = 0.0;
  double pearson_r = 0.0;
  double r_squared = 0.0;
  double runtime_seconds = 0.0;
  bool ok = true;
  std::string error;
};

struct SummaryRow {
  std::string method;
  std::string dataset;  // index, or "all" when pooled across datasets
  std::size_t m = 0;
  double fraction = 0.0;
  std::size_t runs = 0;
  std::size_t failures = 0;
  double mean_stress = 0.0;
  double sd_stress = 0.0;
  double mean_r_squared = 0.0;
  double sd_r_squared = 0.0;
};

struct SearchRecord {
  std::size_t dataset = 0;
  std::size_t m = 0;
  double fraction = 0.0;
  Hyperparameters theta;
  double cv_log_likelihood = 0.0;
  double runtime_seconds = 0.0;
  bool ok = true;
  std::string error;
};

struct ExperimentResult {
  ExperimentPlan plan;
  std::vector<ResultRow> rows;  // sorted by variant, method, replicate
  std::vector<SummaryRow> summary;
  std::vector<SearchRecord> searches;
};

/// Runs every dataset variant of the plan. One hyperparameter search per
/// variant is shared by its replicates; classical MDS is computed once per
/// variant and repeated on every replicate row. Per-run failures become
/// rows with ok = false.
ExperimentResult run_experiment(const ExperimentPlan& plan);

/// Sample s.d. (n - 1) of normalized stress per (method, dataset, m,
/// fraction), plus pooled rows across datasets when there are several.
std::vector<SummaryRow> stability_stats(const std::vector<ResultRow>& rows);

/// Sample mean and s.d.; s.d. is 0 for fewer than two values.
std::pair<double, double> mean_sd(const std::vector<double>& values);

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

/// Writes results.csv, summary.csv, searches.csv, timings.csv and plan.json
/// into root/<plan hash>/ and returns that directory.
std::filesystem::path write_experiment(const std::filesystem::path& root, const ExperimentResult& result);

}  // namespace topolow
