#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rmfgp/benchmarks.hpp"
#include "rmfgp/rmfgp.hpp"

namespace rmfgp {

// One active-learning schedule: the run starts at `start` high-fidelity
// points and ends at start + sum(batch_sizes), which is the N_H column the
// results are reported under.
struct Schedule {
  int start = 0;
  std::vector<int> batch_sizes;

  int final_n_high() const;
};

enum class Baseline { Gp, GpSave, PureSave };

// Parsed and validated experiment configuration; see
// schemas/experiment_config.schema.json for the on-disk format.
struct ExperimentConfig {
  int version = 1;
  std::string problem;
  int n_low = 200;
  int n_test = 500;
  std::vector<Schedule> schedules;
  int flag = 2;  // 0, 1, or 2 = run both variants
  int s = 3;
  int n_slices = 10;
  int n_mc = 100;
  std::vector<std::uint64_t> seeds;
  std::vector<Baseline> baselines;
  std::string output_dir;
  double eta = 0.0;
  int restarts = 10;
  bool pin_noise = true;
  int gpdr_alternations = 5;
  int pure_save_samples = 10000;
  int gp_train_cap = 500;  // cap on GP training size for the pure-SAVE baseline

  struct Up {
    bool enabled = false;
    int n_xi = 2000;
    int grid_size = 50;
    int at_n_high = 0;  // schedule (by final N_H) whose result feeds the study
  } up;

  // Throws ConfigError with a line-oriented message on any violation;
  // unknown keys are rejected at every level.
  static ExperimentConfig from_json(const std::string& json_text);
  std::string to_json() const;
};

// Paper-matching defaults for a problem name.
ExperimentConfig default_config(const std::string& problem);

// One (seed, schedule, method) cell of the report.
struct MethodResult {
  std::string method;  // "rmfgp_flag0", "rmfgp_flag1", "gp", "gp_save", "pure_save"
  double relative_error = 0.0;
  double mse = 0.0;
  std::optional<double> subspace_m;  // distance to the reference subspace
  std::optional<int> bic_d_hat;
  Vector bic_g;
  std::optional<std::string> degeneracy;  // reported, never silently fixed
  std::string surrogate_json;            // fitted hyperparameters, manifest-bound
};

struct CellResult {
  std::uint64_t seed = 0;
  int n_high = 0;
  std::vector<MethodResult> methods;
  std::vector<RmfgpIterationRecord> rmfgp_history;
  std::optional<std::string> failure;  // populated when a method aborted
};

// Test-set predictions kept for the figure CSVs (first seed, largest N_H).
struct PlotBundle {
  std::uint64_t seed = 0;
  int n_high = 0;
  Vector exact;
  std::map<std::string, Vector> predictions;
  Matrix x_reduced;  // test inputs through the final reduction matrix
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<CellResult> cells;
  std::optional<UpCurves> up_curves;
  std::optional<PlotBundle> plot;
  Matrix reference_subspace;  // p x d used for every m metric
  Vector reference_bic_g;     // elliptic only: G(k) of the large-sample SAVE
  double wall_seconds = 0.0;  // excluded from deterministic outputs
  bool has_failures = false;

  // Seed-averaged lookup used by tables and the acceptance suite.
  double mean_relative_error(const std::string& method, int n_high) const;
  double mean_subspace_m(const std::string& method, int n_high) const;
  std::optional<int> modal_bic_d(int n_high) const;
};

// Runs every (seed, schedule) cell: RMFGP (per flag setting) plus requested
// baselines, all metrics, and writes the CSV tables and JSON manifest under
// out_dir. Output bytes are a pure function of (config, seeds).
ExperimentReport run_experiment(const ExperimentConfig& config,
                                const std::string& out_dir);

// SAVE on n_high fresh high-fidelity draws -> top-d reduction -> plain GP on
// the reduced inputs; returns the m metric and test relative error. Degenerate
// slicing is surfaced in MethodResult::degeneracy, never silently fixed.
// out_reduction/out_train capture the pieces the UP study reuses.
MethodResult run_baseline_gp_save(const BenchmarkProblem& problem, int n_high,
                                  std::uint64_t seed, int d,
                                  const Matrix& reference_subspace,
                                  const Matrix& test_X, const Vector& test_y,
                                  const ExperimentConfig& config,
                                  Matrix* out_reduction = nullptr,
                                  Matrix* out_train = nullptr,
                                  Vector* out_pred = nullptr);

// Writes the per-figure CSV files (errors vs N_H, correlation scatter,
// UP curves) for a completed report.
void emit_plot_data(const ExperimentReport& report, const std::string& out_dir);

}  // namespace rmfgp
