#include "rmfgp/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <set>

#include "rmfgp/csv.hpp"
#include "rmfgp/rng.hpp"
#include "rmfgp/version.hpp"

namespace rmfgp {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

int Schedule::final_n_high() const {
  int total = start;
  for (int b : batch_sizes) total += b;
  return total;
}

namespace {

const char* baseline_name(Baseline b) {
  switch (b) {
    case Baseline::Gp: return "gp";
    case Baseline::GpSave: return "gp_save";
    case Baseline::PureSave: return "pure_save";
  }
  return "?";
}

Baseline baseline_from_name(const std::string& name) {
  if (name == "gp") return Baseline::Gp;
  if (name == "gp_save") return Baseline::GpSave;
  if (name == "pure_save") return Baseline::PureSave;
  throw ConfigError("unknown baseline '" + name + "'");
}

void reject_unknown_keys(const ordered_json& j, const std::set<std::string>& known,
                         const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (known.find(key) == known.end()) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
T get_or(const ordered_json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("key '" + key + "' has the wrong type");
  }
}

ordered_json to_json_matrix(const Matrix& M) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json to_json_vector(const Vector& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

double mse_of(const Vector& exact, const Vector& pred) {
  return (exact - pred).squaredNorm() / static_cast<double>(exact.size());
}

GpFitConfig gp_config_from(const ExperimentConfig& config, std::uint64_t seed) {
  GpFitConfig gp;
  gp.restarts = config.restarts;
  gp.seed = seed;
  if (config.pin_noise) gp.pin_noise = 0.0;
  return gp;
}

// Reference central subspace all m metrics are measured against: analytic
// where the construction reveals it, otherwise a large-sample SAVE + BIC.
Matrix compute_reference(const BenchmarkProblem& problem,
                         const ExperimentConfig& config, Vector* bic_g_out) {
  if (problem.true_subspace.has_value()) {
    return orthonormal_columns(*problem.true_subspace);
  }
  const Matrix X = sample_uniform(config.pure_save_samples, problem.p, 0xe111u);
  const Vector y = evaluate_rows(problem.high_eval, X);
  SdrOptions opts;
  opts.n_slices = config.n_slices;
  const SdrResult ref = save(X, y, opts);
  const Vector lambda = ref.eigenvalues.array() + 1.0;
  const BicResult bic =
      bic_dimension(lambda, X.rows(), problem.p, default_bic_penalty(X.rows()));
  if (bic_g_out != nullptr) *bic_g_out = bic.g;
  return orthonormal_columns(ref.directions.leftCols(bic.d_hat));
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  reject_unknown_keys(
      j,
      {"version", "problem", "n_low", "n_test", "schedules", "flag", "s",
       "n_slices", "n_mc", "seeds", "baselines", "output_dir", "eta", "restarts",
       "pin_noise", "gpdr_alternations", "pure_save_samples", "gp_train_cap",
       "up"},
      "config root");

  ExperimentConfig c;
  c.version = get_or<int>(j, "version", 1);
  if (c.version != 1) throw ConfigError("unsupported config version");
  if (!j.contains("problem")) throw ConfigError("missing required key 'problem'");
  c.problem = j.at("problem").get<std::string>();
  problem_by_name(c.problem);  // validates the name

  c.n_low = get_or<int>(j, "n_low", 200);
  c.n_test = get_or<int>(j, "n_test", 500);
  if (c.n_low < 10) throw ConfigError("n_low must be >= 10");
  if (c.n_test < 10) throw ConfigError("n_test must be >= 10");

  if (!j.contains("schedules") || !j.at("schedules").is_array() ||
      j.at("schedules").empty()) {
    throw ConfigError("'schedules' must be a nonempty array");
  }
  for (const auto& js : j.at("schedules")) {
    if (!js.is_object()) throw ConfigError("each schedule must be an object");
    reject_unknown_keys(js, {"start", "batch_sizes"}, "schedule");
    Schedule s;
    if (!js.contains("start")) throw ConfigError("schedule missing 'start'");
    s.start = js.at("start").get<int>();
    s.batch_sizes = get_or<std::vector<int>>(js, "batch_sizes", {});
    if (s.start < 3) throw ConfigError("schedule start must be >= 3");
    for (int b : s.batch_sizes) {
      if (b < 1) throw ConfigError("batch sizes must be >= 1");
    }
    if (s.start > c.n_low) {
      throw ConfigError("schedule start exceeds n_low (nested split impossible)");
    }
    if (s.final_n_high() > c.n_low) {
      throw ConfigError("schedule final N_H exceeds n_low");
    }
    c.schedules.push_back(std::move(s));
  }

  c.flag = get_or<int>(j, "flag", 2);
  if (c.flag < 0 || c.flag > 2) throw ConfigError("flag must be 0, 1 or 2");
  c.s = get_or<int>(j, "s", 3);
  if (c.s < 2) throw ConfigError("s must be >= 2");
  c.n_slices = get_or<int>(j, "n_slices", 10);
  if (c.n_slices < 2) throw ConfigError("n_slices must be >= 2");
  c.n_mc = get_or<int>(j, "n_mc", 100);
  if (c.n_mc < 1) throw ConfigError("n_mc must be >= 1");

  c.seeds = get_or<std::vector<std::uint64_t>>(j, "seeds",
                                               {101, 102, 103, 104, 105});
  if (c.seeds.empty()) throw ConfigError("at least one seed is required");

  if (j.contains("baselines")) {
    for (const auto& name : j.at("baselines")) {
      c.baselines.push_back(baseline_from_name(name.get<std::string>()));
    }
  } else {
    c.baselines = {Baseline::Gp, Baseline::GpSave};
  }
  c.output_dir = get_or<std::string>(j, "output_dir", "");
  c.eta = get_or<double>(j, "eta", 0.0);
  c.restarts = get_or<int>(j, "restarts", 10);
  if (c.restarts < 1) throw ConfigError("restarts must be >= 1");
  c.pin_noise = get_or<bool>(j, "pin_noise", true);
  c.gpdr_alternations = get_or<int>(j, "gpdr_alternations", 5);
  if (c.gpdr_alternations < 1) throw ConfigError("gpdr_alternations must be >= 1");
  c.pure_save_samples = get_or<int>(j, "pure_save_samples", 10000);
  if (c.pure_save_samples < 100) throw ConfigError("pure_save_samples too small");
  c.gp_train_cap = get_or<int>(j, "gp_train_cap", 500);
  if (c.gp_train_cap < 10) throw ConfigError("gp_train_cap must be >= 10");

  if (j.contains("up")) {
    const auto& ju = j.at("up");
    reject_unknown_keys(ju, {"enabled", "n_xi", "grid_size", "at_n_high"}, "up");
    c.up.enabled = get_or<bool>(ju, "enabled", false);
    c.up.n_xi = get_or<int>(ju, "n_xi", 2000);
    c.up.grid_size = get_or<int>(ju, "grid_size", 50);
    c.up.at_n_high = get_or<int>(ju, "at_n_high", 0);
    if (c.up.enabled) {
      if (c.up.n_xi < 10 || c.up.grid_size < 2) {
        throw ConfigError("up.n_xi/grid_size out of range");
      }
      bool found = false;
      for (const auto& s : c.schedules) {
        found = found || s.final_n_high() == c.up.at_n_high;
      }
      if (!found) {
        throw ConfigError("up.at_n_high must equal one schedule's final N_H");
      }
    }
  }
  return c;
}

std::string ExperimentConfig::to_json() const {
  ordered_json j;
  j["version"] = version;
  j["problem"] = problem;
  j["n_low"] = n_low;
  j["n_test"] = n_test;
  j["schedules"] = ordered_json::array();
  for (const auto& s : schedules) {
    j["schedules"].push_back({{"start", s.start}, {"batch_sizes", s.batch_sizes}});
  }
  j["flag"] = flag;
  j["s"] = s;
  j["n_slices"] = n_slices;
  j["n_mc"] = n_mc;
  j["seeds"] = seeds;
  j["baselines"] = ordered_json::array();
  for (Baseline b : baselines) j["baselines"].push_back(baseline_name(b));
  j["output_dir"] = output_dir;
  j["eta"] = eta;
  j["restarts"] = restarts;
  j["pin_noise"] = pin_noise;
  j["gpdr_alternations"] = gpdr_alternations;
  j["pure_save_samples"] = pure_save_samples;
  j["gp_train_cap"] = gp_train_cap;
  j["up"] = {{"enabled", up.enabled},
             {"n_xi", up.n_xi},
             {"grid_size", up.grid_size},
             {"at_n_high", up.at_n_high}};
  return j.dump(2);
}

ExperimentConfig default_config(const std::string& problem) {
  ExperimentConfig c;
  c.problem = problem;
  problem_by_name(problem);
  c.seeds = {101, 102, 103, 104, 105};
  c.baselines = {Baseline::Gp, Baseline::GpSave};
  const auto schedule_set = [&c](std::vector<int> finals, std::vector<int> batches) {
    int added = 0;
    for (int b : batches) added += b;
    for (int f : finals) c.schedules.push_back(Schedule{f - added, batches});
  };
  if (problem == "linear") {
    schedule_set({25, 30, 35, 40}, {5, 5});
  } else if (problem == "nonlinear") {
    schedule_set({10, 15, 20, 25}, {2, 3});
  } else if (problem == "advection") {
    schedule_set({20, 25, 30, 35}, {5, 5});
    c.baselines.push_back(Baseline::PureSave);
    c.up.enabled = true;
    c.up.at_n_high = 35;
  } else if (problem == "elliptic") {
    schedule_set({20, 25, 30, 35}, {2, 3});
    c.baselines.push_back(Baseline::PureSave);
    c.up.enabled = true;
    c.up.at_n_high = 35;
  }
  return c;
}

MethodResult run_baseline_gp_save(const BenchmarkProblem& problem, int n_high,
                                  std::uint64_t seed, int d,
                                  const Matrix& reference_subspace,
                                  const Matrix& test_X, const Vector& test_y,
                                  const ExperimentConfig& config,
                                  Matrix* out_reduction, Matrix* out_train,
                                  Vector* out_pred) {
  MethodResult out;
  out.method = "gp_save";
  const Matrix X = sample_uniform(n_high, problem.p, seed);
  const Vector y = evaluate_rows(problem.high_eval, X);

  SdrOptions opts;
  opts.n_slices = config.n_slices;
  SdrResult sdr_result;
  try {
    sdr_result = save(X, y, opts);
  } catch (const Error& e) {
    out.degeneracy = e.what();
    out.relative_error = std::numeric_limits<double>::quiet_NaN();
    out.mse = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const Matrix reduction = orthonormal_columns(sdr_result.directions.leftCols(d));
  out.subspace_m = subspace_distance(reference_subspace, reduction);

  // GP on the reduced inputs; huge reference sets are subsampled for the fit
  Matrix train_X = X;
  Vector train_y = y;
  if (X.rows() > config.gp_train_cap) {
    Rng rng(mix_seed(seed, 0xcafu));
    const auto keep = rng.sample_without_replacement(
        static_cast<std::size_t>(X.rows()),
        static_cast<std::size_t>(config.gp_train_cap));
    train_X = Matrix(config.gp_train_cap, X.cols());
    train_y = Vector(config.gp_train_cap);
    for (Eigen::Index i = 0; i < train_X.rows(); ++i) {
      train_X.row(i) = X.row(static_cast<Eigen::Index>(keep[static_cast<std::size_t>(i)]));
      train_y(i) = y(static_cast<Eigen::Index>(keep[static_cast<std::size_t>(i)]));
    }
  }
  const GPModel model = fit_gp(train_X * reduction, train_y,
                               gp_config_from(config, mix_seed(seed, 0x95a)));
  const Vector pred = model.predict(test_X * reduction).mean;
  out.relative_error = relative_error(test_y, pred);
  out.mse = mse_of(test_y, pred);
  out.surrogate_json = model.to_json();
  if (out_reduction != nullptr) *out_reduction = reduction;
  if (out_train != nullptr) *out_train = train_X;
  if (out_pred != nullptr) *out_pred = pred;
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& config,
                                const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  const BenchmarkProblem problem = problem_by_name(config.problem);

  ExperimentReport report;
  report.config = config;
  report.reference_subspace = compute_reference(problem, config, &report.reference_bic_g);
  const int d_ref = static_cast<int>(report.reference_subspace.cols());

  int largest_n_high = 0;
  for (const auto& s : config.schedules) {
    largest_n_high = std::max(largest_n_high, s.final_n_high());
  }

  std::optional<RmfgpResult> up_result;
  Matrix up_baseline_reduction;
  Matrix up_baseline_train;
  std::uint64_t up_seed = 0;

  for (std::size_t seed_idx = 0; seed_idx < config.seeds.size(); ++seed_idx) {
    const std::uint64_t seed = config.seeds[seed_idx];
    const Matrix low_X = sample_uniform(config.n_low, problem.p, mix_seed(seed, 1));
    const Dataset low(low_X, evaluate_rows(problem.low_eval, low_X), Fidelity::Low);
    const Matrix test_X = sample_uniform(config.n_test, problem.p, mix_seed(seed, 2));
    const Vector test_y = evaluate_rows(problem.high_eval, test_X);
    const Dataset test(test_X, test_y, Fidelity::Test);

    for (std::size_t sched_idx = 0; sched_idx < config.schedules.size(); ++sched_idx) {
      const Schedule& schedule = config.schedules[sched_idx];
      CellResult cell;
      cell.seed = seed;
      cell.n_high = schedule.final_n_high();
      const std::uint64_t cell_tag = static_cast<std::uint64_t>(sched_idx);

      try {
        RmfgpConfig rc;
        rc.flag = config.flag == 0 ? 0 : 1;
        rc.s = config.s;
        rc.n_slices = config.n_slices;
        rc.batch_sizes = schedule.batch_sizes;
        rc.eta = config.eta;
        rc.n_mc = config.n_mc;
        rc.seed = mix_seed(seed, 0x500u + cell_tag);
        rc.gpdr_alternations = config.gpdr_alternations;
        rc.gp = gp_config_from(config, rc.seed);
        rc.high_eval = problem.high_eval;

        const NestedDataset nested =
            make_nested(low, schedule.start, problem.high_eval,
                        mix_seed(seed, 0x400u + cell_tag));
        const RmfgpResult result = run_rmfgp(low, nested, test, rc);
        cell.rmfgp_history = result.history;

        const bool want_plot = seed_idx == 0 && cell.n_high == largest_n_high;
        if (want_plot) {
          report.plot.emplace();
          report.plot->seed = seed;
          report.plot->n_high = cell.n_high;
          report.plot->exact = test_y;
        }

        if (config.flag != 1) {  // rotation-only variant
          MethodResult m;
          m.method = "rmfgp_flag0";
          std::shared_ptr<const GPModel> surrogate0 =
              config.flag == 0 ? result.surrogate
                               : build_final_surrogate(result, *result.final_high,
                                                       rc, 0);
          const Vector pred = surrogate0->predict(test_X * result.M1).mean;
          m.relative_error = relative_error(test_y, pred);
          m.mse = mse_of(test_y, pred);
          m.surrogate_json = surrogate0->to_json();
          if (want_plot) report.plot->predictions["rmfgp_flag0"] = pred;
          cell.methods.push_back(std::move(m));
        }
        if (config.flag != 0) {  // reduced variant
          MethodResult m;
          m.method = "rmfgp_flag1";
          const Vector pred = result.predict(test_X).mean;
          m.relative_error = relative_error(test_y, pred);
          m.mse = mse_of(test_y, pred);
          m.subspace_m = subspace_distance(report.reference_subspace, result.M);
          m.bic_d_hat = result.d_hat;
          m.bic_g = result.bic_g;
          m.surrogate_json = result.surrogate->to_json();
          if (want_plot) {
            report.plot->predictions["rmfgp_flag1"] = pred;
            report.plot->x_reduced = test_X * result.M;
          }
          cell.methods.push_back(std::move(m));
        }

        for (Baseline b : config.baselines) {
          if (b == Baseline::Gp) {
            const Matrix bx = sample_uniform(cell.n_high, problem.p,
                                             mix_seed(seed, 0x600u + cell_tag));
            const Vector by = evaluate_rows(problem.high_eval, bx);
            MethodResult m;
            m.method = "gp";
            const GPModel model = fit_gp(
                bx, by, gp_config_from(config, mix_seed(seed, 0x700u + cell_tag)));
            const Vector pred = model.predict(test_X).mean;
            m.relative_error = relative_error(test_y, pred);
            m.mse = mse_of(test_y, pred);
            m.surrogate_json = model.to_json();
            if (want_plot) report.plot->predictions["gp"] = pred;
            cell.methods.push_back(std::move(m));
          } else if (b == Baseline::GpSave) {
            Matrix reduction, train;
            Vector pred;
            MethodResult m = run_baseline_gp_save(
                problem, cell.n_high, mix_seed(seed, 0x600u + cell_tag), d_ref,
                report.reference_subspace, test_X, test_y, config, &reduction,
                &train, &pred);
            if (want_plot && !m.degeneracy.has_value()) {
              report.plot->predictions["gp_save"] = pred;
            }
            if (config.up.enabled && seed_idx == 0 &&
                cell.n_high == config.up.at_n_high && !m.degeneracy.has_value()) {
              up_baseline_reduction = reduction;
              up_baseline_train = train;
            }
            cell.methods.push_back(std::move(m));
          } else {
            MethodResult m = run_baseline_gp_save(
                problem, config.pure_save_samples, mix_seed(seed, 0x800u + cell_tag),
                d_ref, report.reference_subspace, test_X, test_y, config);
            m.method = "pure_save";
            cell.methods.push_back(std::move(m));
          }
        }

        if (config.up.enabled && seed_idx == 0 &&
            cell.n_high == config.up.at_n_high) {
          up_result = result;
          up_seed = mix_seed(seed, 0x11bu);
        }
      } catch (const Error& e) {
        cell.failure = e.what();
        report.has_failures = true;
      }
      report.cells.push_back(std::move(cell));
    }
  }

  if (config.up.enabled && up_result.has_value() &&
      up_baseline_reduction.size() > 0) {
    RmfgpConfig rc;
    rc.gp = gp_config_from(config, up_seed);
    rc.seed = up_seed;
    UpOptions options;
    options.grid_size = config.up.grid_size;
    options.n_xi = config.up.n_xi;
    options.seed = mix_seed(up_seed, 0x77u);
    report.up_curves = uncertainty_propagation(problem, *up_result,
                                               up_baseline_reduction,
                                               up_baseline_train, rc, options);
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);

    // seed-averaged method x N_H tables
    std::vector<int> n_highs;
    for (const auto& s : config.schedules) n_highs.push_back(s.final_n_high());
    std::vector<std::string> error_methods;
    if (config.flag != 1) error_methods.push_back("rmfgp_flag0");
    for (Baseline b : config.baselines) {
      if (b == Baseline::Gp) error_methods.push_back("gp");
    }
    if (config.flag != 0) error_methods.push_back("rmfgp_flag1");
    for (Baseline b : config.baselines) {
      if (b == Baseline::GpSave) error_methods.push_back("gp_save");
      if (b == Baseline::PureSave) error_methods.push_back("pure_save");
    }

    CsvWriter err_table(out_dir + "/error_table.csv");
    err_table.cell("method");
    for (int nh : n_highs) err_table.cell("N_H=" + std::to_string(nh));
    err_table.end_row();
    for (const auto& method : error_methods) {
      err_table.cell(method);
      for (int nh : n_highs) err_table.cell(report.mean_relative_error(method, nh));
      err_table.end_row();
    }
    err_table.flush();

    CsvWriter m_table(out_dir + "/m_table.csv");
    m_table.cell("method");
    for (int nh : n_highs) m_table.cell("N_H=" + std::to_string(nh));
    m_table.end_row();
    std::vector<std::string> m_methods;
    if (config.flag != 0) m_methods.push_back("rmfgp_flag1");
    for (Baseline b : config.baselines) {
      if (b == Baseline::GpSave) m_methods.push_back("gp_save");
      if (b == Baseline::PureSave) m_methods.push_back("pure_save");
    }
    for (const auto& method : m_methods) {
      m_table.cell(method);
      for (int nh : n_highs) m_table.cell(report.mean_subspace_m(method, nh));
      m_table.end_row();
    }
    m_table.flush();

    // per-seed records backing every aggregate above
    CsvWriter cells_csv(out_dir + "/cells.csv");
    cells_csv.cell("seed").cell("n_high").cell("method").cell("relative_error")
        .cell("mse").cell("subspace_m").cell("bic_d_hat").cell("status");
    cells_csv.end_row();
    for (const auto& cell : report.cells) {
      if (cell.failure.has_value()) {
        cells_csv.cell(static_cast<long long>(cell.seed))
            .cell(static_cast<long long>(cell.n_high)).cell("-").cell("nan")
            .cell("nan").cell("nan").cell("-").cell("failed: " + *cell.failure);
        cells_csv.end_row();
        continue;
      }
      for (const auto& m : cell.methods) {
        cells_csv.cell(static_cast<long long>(cell.seed))
            .cell(static_cast<long long>(cell.n_high)).cell(m.method)
            .cell(m.relative_error).cell(m.mse)
            .cell(m.subspace_m.has_value() ? CsvWriter::format_double(*m.subspace_m)
                                           : std::string("-"))
            .cell(m.bic_d_hat.has_value() ? std::to_string(*m.bic_d_hat)
                                          : std::string("-"))
            .cell(m.degeneracy.value_or("ok"));
        cells_csv.end_row();
      }
    }
    cells_csv.flush();

    // BIC G(k) rows: raw and a display normalization exp(G/n) per seed at the
    // largest N_H, plus the large-sample reference when it exists
    CsvWriter bic_csv(out_dir + "/bic.csv");
    bic_csv.cell("source").cell("scale").cell("d_hat");
    const Eigen::Index p = problem.p;
    for (Eigen::Index k = 1; k < p; ++k) bic_csv.cell("k=" + std::to_string(k));
    bic_csv.end_row();
    for (const auto& cell : report.cells) {
      if (cell.failure.has_value() || cell.n_high != largest_n_high) continue;
      for (const auto& m : cell.methods) {
        if (m.method != "rmfgp_flag1" || m.bic_g.size() == 0) continue;
        bic_csv.cell("seed=" + std::to_string(cell.seed)).cell("raw")
            .cell(static_cast<long long>(*m.bic_d_hat));
        for (Eigen::Index k = 0; k < m.bic_g.size(); ++k) bic_csv.cell(m.bic_g(k));
        bic_csv.end_row();
        bic_csv.cell("seed=" + std::to_string(cell.seed)).cell("display")
            .cell(static_cast<long long>(*m.bic_d_hat));
        for (Eigen::Index k = 0; k < m.bic_g.size(); ++k) {
          bic_csv.cell(std::exp(m.bic_g(k) / static_cast<double>(config.n_test)));
        }
        bic_csv.end_row();
      }
    }
    if (report.reference_bic_g.size() > 0) {
      const auto n = static_cast<double>(config.pure_save_samples);
      int d_hat_ref = 1;
      for (Eigen::Index k = 1; k < report.reference_bic_g.size(); ++k) {
        if (report.reference_bic_g(k) > report.reference_bic_g(d_hat_ref - 1)) {
          d_hat_ref = static_cast<int>(k) + 1;
        }
      }
      bic_csv.cell("pure_save_reference").cell("raw")
          .cell(static_cast<long long>(d_hat_ref));
      for (Eigen::Index k = 0; k < report.reference_bic_g.size(); ++k) {
        bic_csv.cell(report.reference_bic_g(k));
      }
      bic_csv.end_row();
      bic_csv.cell("pure_save_reference").cell("display")
          .cell(static_cast<long long>(d_hat_ref));
      for (Eigen::Index k = 0; k < report.reference_bic_g.size(); ++k) {
        bic_csv.cell(std::exp(report.reference_bic_g(k) / n));
      }
      bic_csv.end_row();
    }
    bic_csv.flush();

    emit_plot_data(report, out_dir);

    // manifest: everything needed to re-derive the tables; wall time kept out
    ordered_json manifest;
    manifest["tool"] = "rmfgp";
    manifest["version"] = kVersion;
    manifest["rng_algorithm"] = Rng::kAlgorithmId;
    manifest["config"] = ordered_json::parse(config.to_json());
    manifest["reference_subspace"] = to_json_matrix(report.reference_subspace);
    manifest["cells"] = ordered_json::array();
    for (const auto& cell : report.cells) {
      ordered_json jc;
      jc["seed"] = cell.seed;
      jc["n_high"] = cell.n_high;
      if (cell.failure.has_value()) {
        jc["failure"] = *cell.failure;
      } else {
        jc["methods"] = ordered_json::array();
        for (const auto& m : cell.methods) {
          ordered_json jm;
          jm["method"] = m.method;
          jm["relative_error"] = m.relative_error;
          jm["mse"] = m.mse;
          if (m.subspace_m.has_value()) jm["subspace_m"] = *m.subspace_m;
          if (m.bic_d_hat.has_value()) jm["bic_d_hat"] = *m.bic_d_hat;
          if (m.bic_g.size() > 0) jm["bic_g"] = to_json_vector(m.bic_g);
          if (m.degeneracy.has_value()) jm["degeneracy"] = *m.degeneracy;
          if (!m.surrogate_json.empty()) {
            jm["surrogate"] = ordered_json::parse(m.surrogate_json);
          }
          jc["methods"].push_back(std::move(jm));
        }
        jc["iterations"] = ordered_json::array();
        for (const auto& it : cell.rmfgp_history) {
          ordered_json ji;
          ji["save_eigenvalues"] = to_json_vector(it.save_eigenvalues);
          ji["test_relative_error"] = it.test_relative_error;
          ji["acquired"] = it.acquired;
          jc["iterations"].push_back(std::move(ji));
        }
      }
      manifest["cells"].push_back(std::move(jc));
    }
    manifest["n_mc"] = config.n_mc;
    std::ofstream mf(out_dir + "/manifest.json", std::ios::binary);
    if (!mf) throw IoError("cannot write manifest.json");
    mf << manifest.dump(2) << "\n";

    ordered_json timing;
    timing["wall_seconds"] = report.wall_seconds;
    std::ofstream tf(out_dir + "/timing.json", std::ios::binary);
    tf << timing.dump(2) << "\n";
  }
  return report;
}

double ExperimentReport::mean_relative_error(const std::string& method,
                                             int n_high) const {
  double total = 0.0;
  int count = 0;
  for (const auto& cell : cells) {
    if (cell.n_high != n_high || cell.failure.has_value()) continue;
    for (const auto& m : cell.methods) {
      if (m.method == method && std::isfinite(m.relative_error)) {
        total += m.relative_error;
        ++count;
      }
    }
  }
  return count > 0 ? total / count : std::numeric_limits<double>::quiet_NaN();
}

double ExperimentReport::mean_subspace_m(const std::string& method,
                                         int n_high) const {
  double total = 0.0;
  int count = 0;
  for (const auto& cell : cells) {
    if (cell.n_high != n_high || cell.failure.has_value()) continue;
    for (const auto& m : cell.methods) {
      if (m.method == method && m.subspace_m.has_value() &&
          std::isfinite(*m.subspace_m)) {
        total += *m.subspace_m;
        ++count;
      }
    }
  }
  return count > 0 ? total / count : std::numeric_limits<double>::quiet_NaN();
}

std::optional<int> ExperimentReport::modal_bic_d(int n_high) const {
  std::map<int, int> counts;
  for (const auto& cell : cells) {
    if (cell.n_high != n_high || cell.failure.has_value()) continue;
    for (const auto& m : cell.methods) {
      if (m.method == "rmfgp_flag1" && m.bic_d_hat.has_value()) {
        counts[*m.bic_d_hat]++;
      }
    }
  }
  if (counts.empty()) return std::nullopt;
  int best_d = counts.begin()->first;
  int best_count = 0;
  for (const auto& [d, c] : counts) {
    if (c > best_count) {
      best_count = c;
      best_d = d;
    }
  }
  return best_d;
}

void emit_plot_data(const ExperimentReport& report, const std::string& out_dir) {
  const std::string fig_dir = out_dir + "/figures";
  fs::create_directories(fig_dir);

  std::set<std::string> methods;
  std::set<int> n_highs;
  for (const auto& cell : report.cells) {
    if (cell.failure.has_value()) continue;
    n_highs.insert(cell.n_high);
    for (const auto& m : cell.methods) methods.insert(m.method);
  }

  CsvWriter mse_csv(fig_dir + "/mse_vs_nh.csv");
  mse_csv.cell("method").cell("n_high").cell("mse").cell("relative_error");
  mse_csv.end_row();
  for (const auto& method : methods) {
    for (int nh : n_highs) {
      double total = 0.0;
      int count = 0;
      for (const auto& cell : report.cells) {
        if (cell.n_high != nh || cell.failure.has_value()) continue;
        for (const auto& m : cell.methods) {
          if (m.method == method && std::isfinite(m.mse)) {
            total += m.mse;
            ++count;
          }
        }
      }
      if (count == 0) continue;
      mse_csv.cell(method).cell(static_cast<long long>(nh)).cell(total / count)
          .cell(report.mean_relative_error(method, nh));
      mse_csv.end_row();
    }
  }
  mse_csv.flush();

  if (report.plot.has_value()) {
    const PlotBundle& plot = *report.plot;
    CsvWriter corr(fig_dir + "/correlation.csv");
    corr.cell("exact");
    for (const auto& [name, pred] : plot.predictions) corr.cell(name);
    corr.end_row();
    for (Eigen::Index i = 0; i < plot.exact.size(); ++i) {
      corr.cell(plot.exact(i));
      for (const auto& [name, pred] : plot.predictions) corr.cell(pred(i));
      corr.end_row();
    }
    corr.flush();

    if (plot.x_reduced.size() > 0 &&
        plot.predictions.count("rmfgp_flag1") > 0) {
      CsvWriter pv(fig_dir + "/prediction_vs_xd.csv");
      for (Eigen::Index j = 0; j < plot.x_reduced.cols(); ++j) {
        pv.cell("x_d" + std::to_string(j + 1));
      }
      pv.cell("exact").cell("rmfgp_flag1");
      const bool with_save = plot.predictions.count("gp_save") > 0;
      if (with_save) pv.cell("gp_save");
      pv.end_row();
      const Vector& pred = plot.predictions.at("rmfgp_flag1");
      for (Eigen::Index i = 0; i < plot.exact.size(); ++i) {
        for (Eigen::Index j = 0; j < plot.x_reduced.cols(); ++j) {
          pv.cell(plot.x_reduced(i, j));
        }
        pv.cell(plot.exact(i)).cell(pred(i));
        if (with_save) pv.cell(plot.predictions.at("gp_save")(i));
        pv.end_row();
      }
      pv.flush();
    }
  }

  if (report.up_curves.has_value()) {
    const UpCurves& up = *report.up_curves;
    CsvWriter up_csv(fig_dir + "/up_curves.csv");
    up_csv.cell("x_index").cell("x").cell("mean_truth").cell("mean_rmfgp")
        .cell("mean_baseline").cell("std_truth").cell("std_rmfgp")
        .cell("std_baseline");
    up_csv.end_row();
    for (Eigen::Index i = 0; i < up.x_grid.size(); ++i) {
      up_csv.cell(static_cast<long long>(i)).cell(up.x_grid(i))
          .cell(up.mean_truth(i)).cell(up.mean_rmfgp(i)).cell(up.mean_baseline(i))
          .cell(up.std_truth(i)).cell(up.std_rmfgp(i)).cell(up.std_baseline(i));
      up_csv.end_row();
    }
    up_csv.flush();
  }
}

}  // namespace rmfgp
