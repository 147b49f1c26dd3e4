#include "rmfgp.h"

#include <cstring>
#include <json.hpp>
#include <sstream>
#include <string>

#include "rmfgp/benchmarks.hpp"
#include "rmfgp/dataset.hpp"
#include "rmfgp/experiment.hpp"
#include "rmfgp/gp.hpp"
#include "rmfgp/multifidelity.hpp"
#include "rmfgp/sdr.hpp"
#include "rmfgp/version.hpp"

namespace {

thread_local std::string g_last_error;

int set_error(int code, const std::string& message) {
  g_last_error = message;
  return code;
}

int classify(const rmfgp::Error& e) {
  using namespace rmfgp;
  if (dynamic_cast<const ConfigError*>(&e) != nullptr) return RMFGP_ERR_CONFIG;
  if (dynamic_cast<const DimensionMismatch*>(&e) != nullptr) {
    return RMFGP_ERR_DIMENSION_MISMATCH;
  }
  if (dynamic_cast<const IoError*>(&e) != nullptr) return RMFGP_ERR_IO;
  if (dynamic_cast<const InvalidArgument*>(&e) != nullptr ||
      dynamic_cast<const NonFiniteValue*>(&e) != nullptr) {
    return RMFGP_ERR_INVALID_ARGUMENT;
  }
  if (dynamic_cast<const SingularCovariance*>(&e) != nullptr ||
      dynamic_cast<const NotPositiveDefinite*>(&e) != nullptr ||
      dynamic_cast<const OptimizerFailure*>(&e) != nullptr ||
      dynamic_cast<const InvalidEigenvalue*>(&e) != nullptr ||
      dynamic_cast<const RankDeficient*>(&e) != nullptr ||
      dynamic_cast<const NotOrthogonal*>(&e) != nullptr) {
    return RMFGP_ERR_NUMERIC;
  }
  return RMFGP_ERR_RUNTIME;
}

template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const rmfgp::Error& e) {
    return set_error(classify(e), e.what());
  } catch (const std::exception& e) {
    return set_error(RMFGP_ERR_RUNTIME, e.what());
  } catch (...) {
    return set_error(RMFGP_ERR_RUNTIME, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

rmfgp::Fidelity to_fidelity(int value) {
  switch (value) {
    case RMFGP_FIDELITY_LOW: return rmfgp::Fidelity::Low;
    case RMFGP_FIDELITY_HIGH: return rmfgp::Fidelity::High;
    case RMFGP_FIDELITY_TEST: return rmfgp::Fidelity::Test;
    default: throw rmfgp::InvalidArgument("invalid fidelity tag");
  }
}

rmfgp::GpFitConfig to_fit_config(const rmfgp_fit_options* options) {
  rmfgp::GpFitConfig cfg;
  if (options == nullptr) return cfg;
  if (options->restarts > 0) cfg.restarts = options->restarts;
  cfg.seed = options->seed;
  if (options->pin_noise_to_zero != 0) cfg.pin_noise = 0.0;
  if (options->max_iters > 0) cfg.max_iters = options->max_iters;
  return cfg;
}

int sdr_fit_impl(const rmfgp_dataset_t* data, int n_slices, bool use_save,
                 rmfgp_sdr_t** out);
int copy_matrix(const rmfgp::Matrix& M, double* out, size_t capacity);

}  // namespace

struct rmfgp_dataset_st {
  rmfgp::Dataset data;
};

struct rmfgp_gp_st {
  rmfgp::GPModel model;
};

struct rmfgp_nargp_st {
  rmfgp::NARGPModel model;
};

struct rmfgp_sdr_st {
  rmfgp::SdrResult result;
};

namespace {

int sdr_fit_impl(const rmfgp_dataset_t* data, int n_slices, bool use_save,
                 rmfgp_sdr_t** out) {
  return guarded([&] {
    if (data == nullptr || out == nullptr) {
      return set_error(RMFGP_ERR_INVALID_ARGUMENT, "null argument");
    }
    rmfgp::SdrOptions opts;
    if (n_slices > 0) opts.n_slices = n_slices;
    *out = new rmfgp_sdr_st{use_save
                                ? rmfgp::save(data->data.X(), data->data.y(), opts)
                                : rmfgp::sir(data->data.X(), data->data.y(), opts)};
    return RMFGP_OK;
  });
}

int copy_matrix(const rmfgp::Matrix& M, double* out, size_t capacity) {
  if (out == nullptr) {
    return set_error(RMFGP_ERR_INVALID_ARGUMENT, "null output buffer");
  }
  if (capacity < static_cast<size_t>(M.size())) {
    return set_error(RMFGP_ERR_BUFFER_TOO_SMALL,
                     "need capacity " + std::to_string(M.size()));
  }
  Eigen::Map<rmfgp::Matrix>(out, M.rows(), M.cols()) = M;  // column-major
  return RMFGP_OK;
}

}  // namespace

extern "C" {

const char* rmfgp_version(void) { return rmfgp::kVersion; }

const char* rmfgp_last_error(void) { return g_last_error.c_str(); }

void rmfgp_string_free(char* s) { delete[] s; }

int rmfgp_dataset_create(const double* X, const double* y, size_t n, size_t p,
                         int fidelity, rmfgp_dataset_t** out) {
  return guarded([&] {
    if (X == nullptr || y == nullptr || out == nullptr) {
      return set_error(RMFGP_ERR_INVALID_ARGUMENT, "null argument");
    }
    rmfgp::Matrix Xm(n, p);
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < p; ++j) {
        Xm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            X[i * p + j];
      }
    }
    rmfgp::Vector yv = Eigen::Map<const rmfgp::Vector>(y, static_cast<Eigen::Index>(n));
    *out = new rmfgp_dataset_st{
        rmfgp::Dataset(std::move(Xm), std::move(yv), to_fidelity(fidelity))};
    return RMFGP_OK;
  });
}

int rmfgp_dataset_from_csv(const char* path, int fidelity, rmfgp_dataset_t** out) {
  return guarded([&] {
    if (path == nullptr || out == nullptr) {
      return set_error(RMFGP_ERR_INVALID_ARGUMENT, "null argument");
    }
    *out = new rmfgp_dataset_st{
        rmfgp::Dataset::from_csv(path, to_fidelity(fidelity))};
    return RMFGP_OK;
  });
}

int rmfgp_dataset_to_csv(const rmfgp_dataset_t* dataset, const char* path) {
  return guarded([&] {
    if (dataset == nullptr || path == nullptr) {
      return set_error(RMFGP_ERR_INVALID_ARGUMENT, "null argument");
    }
    dataset->data.to_csv(path);
    return RMFGP_OK;
  });
}

int rmfgp_dataset_dims(const rmfgp_dataset_t* dataset, size_t* n, size_t* p) {
  return guarded([&] {
    if (dataset == nullptr) {
      return set_error(RMFGP_ERR_INVALID_ARGUMENT, "null dataset");
    }
    if (n != nullptr) *n = static_cast<size_t>(dataset->data.n());
    if (p != nullptr) *p = static_cast<size_t>(dataset->data.p());
    return RMFGP_OK;
  });
}

int rmfgp_dataset_copy(const rmfgp_dataset_t* dataset, double* X_out,
                       double* y_out) {
  return guarded([&] {
    if (dataset == nullptr) {
      return set_error(RMFGP_ERR_INVALID_ARGUMENT, "null dataset");
    }
    const auto& d = dataset->data;
    if (X_out != nullptr) {
      for (Eigen::Index i = 0; i < d.n(); ++i) {
        for (Eigen::Index j = 0; j < d.p(); ++j) {
          X_out[static_cast<size_t>(i) * static_cast<size_t>(d.p()) +
                static_cast<size_t>(j)] = d.X()(i, j);
        }
      }
    }
    if (y_out != nullptr) {
      Eigen::Map<rmfgp::Vector>(y_out, d.n()) = d.y();
    }
    return RMFGP_OK;
  });
}

void rmfgp_dataset_free(rmfgp_dataset_t* dataset) { delete dataset; }

int rmfgp_sample_uniform(size_t n, size_t p, uint64_t seed, double* X_out) {
  return guarded([&] {
    if (X_out == nullptr) {
      return set_error(RMFGP_ERR_INVALID_ARGUMENT, "null output buffer");
    }
    const rmfgp::Matrix X = rmfgp::sample_uniform(
        static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p), seed);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      for (Eigen::Index j = 0; j < X.cols(); ++j) {
        X_out[static_cast<size_t>(i) * p + static_cast<size_t>(j)] = X(i, j);
      }
    }
    return RMFGP_OK;
  });
}

int rmfgp_gp_fit(const rmfgp_dataset_t* data, const rmfgp_fit_options* options,
                 rmfgp_gp_t** out) {
  return guarded([&] {
    if (data == nullptr || out == nullptr) {
      return set_error(RMFGP_ERR_INVALID_ARGUMENT, "null argument");
    }
    *out = new rmfgp_gp_st{
        rmfgp::fit_gp(data->data.X(), data->data.y(), to_fit_config(options))};
    return RMFGP_OK;
  });
}

int rmfgp_gp_predict(const rmfgp_gp_t* model, const double* X, size_t m, size_t p,
                     double* mean, double* variance) {
  return guarded([&] {
    if (model == nullptr || X == nullptr) {
      return set_error(RMFGP_ERR_INVALID_ARGUMENT, "null argument");
    }
    rmfgp::Matrix Xm(m, p);
    for (size_t i = 0; i < m; ++i) {
      for (size_t j = 0; j < p; ++j) {
        Xm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            X[i * p + j];
      }
    }
    const rmfgp::PredictResult pred = model->model.predict(Xm);
    if (mean != nullptr) {
      Eigen::Map<rmfgp::Vector>(mean, pred.mean.size()) = pred.mean;
    }
    if (variance != nullptr) {
      Eigen::Map<rmfgp::Vector>(variance, pred.variance.size()) = pred.variance;
    }
    return RMFGP_OK;
  });
}

int rmfgp_gp_to_json(const rmfgp_gp_t* model, char** json_out) {
  return guarded([&] {
    if (model == nullptr || json_out == nullptr) {
      return set_error(RMFGP_ERR_INVALID_ARGUMENT, "null argument");
    }
    *json_out = dup_string(model->model.to_json());
    return RMFGP_OK;
  });
}

void rmfgp_gp_free(rmfgp_gp_t* model) { delete model; }

int rmfgp_nargp_fit(const rmfgp_dataset_t* low, const rmfgp_dataset_t* high,
                    const rmfgp_fit_options* options, rmfgp_nargp_t** out) {
  return guarded([&] {
    if (low == nullptr || high == nullptr || out == nullptr) {
      return set_error(RMFGP_ERR_INVALID_ARGUMENT, "null argument");
    }
    rmfgp::MultiFidelityConfig cfg;
    cfg.gp = to_fit_config(options);
    *out = new rmfgp_nargp_st{rmfgp::fit_nargp(low->data, high->data, cfg)};
    return RMFGP_OK;
  });
}

int rmfgp_nargp_predict(const rmfgp_nargp_t* model, const double* X, size_t m,
                        size_t p, int n_mc, uint64_t seed, double* mean,
                        double* variance) {
  return guarded([&] {
    if (model == nullptr || X == nullptr) {
      return set_error(RMFGP_ERR_INVALID_ARGUMENT, "null argument");
    }
    rmfgp::Matrix Xm(m, p);
    for (size_t i = 0; i < m; ++i) {
      for (size_t j = 0; j < p; ++j) {
        Xm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            X[i * p + j];
      }
    }
    const rmfgp::PredictResult pred =
        rmfgp::predict_nargp(model->model, Xm, n_mc, seed);
    if (mean != nullptr) {
      Eigen::Map<rmfgp::Vector>(mean, pred.mean.size()) = pred.mean;
    }
    if (variance != nullptr) {
      Eigen::Map<rmfgp::Vector>(variance, pred.variance.size()) = pred.variance;
    }
    return RMFGP_OK;
  });
}

void rmfgp_nargp_free(rmfgp_nargp_t* model) { delete model; }

int rmfgp_save_fit(const rmfgp_dataset_t* data, int n_slices, rmfgp_sdr_t** out) {
  return sdr_fit_impl(data, n_slices, true, out);
}

int rmfgp_sir_fit(const rmfgp_dataset_t* data, int n_slices, rmfgp_sdr_t** out) {
  return sdr_fit_impl(data, n_slices, false, out);
}

int rmfgp_sdr_eigenvalues(const rmfgp_sdr_t* sdr, double* out, size_t capacity) {
  return guarded([&] {
    if (sdr == nullptr) return set_error(RMFGP_ERR_INVALID_ARGUMENT, "null handle");
    return copy_matrix(sdr->result.eigenvalues, out, capacity);
  });
}

int rmfgp_sdr_rotation(const rmfgp_sdr_t* sdr, double* out, size_t capacity) {
  return guarded([&] {
    if (sdr == nullptr) return set_error(RMFGP_ERR_INVALID_ARGUMENT, "null handle");
    return copy_matrix(sdr->result.rotation, out, capacity);
  });
}

int rmfgp_sdr_directions(const rmfgp_sdr_t* sdr, double* out, size_t capacity) {
  return guarded([&] {
    if (sdr == nullptr) return set_error(RMFGP_ERR_INVALID_ARGUMENT, "null handle");
    return copy_matrix(sdr->result.directions, out, capacity);
  });
}

void rmfgp_sdr_free(rmfgp_sdr_t* sdr) { delete sdr; }

int rmfgp_bic_dimension(const double* eigenvalues, size_t p, size_t n, double c_n,
                        size_t* d_hat, double* g_out) {
  return guarded([&] {
    if (eigenvalues == nullptr || d_hat == nullptr || p < 2) {
      return set_error(RMFGP_ERR_INVALID_ARGUMENT, "bad arguments");
    }
    const rmfgp::Vector lam =
        Eigen::Map<const rmfgp::Vector>(eigenvalues, static_cast<Eigen::Index>(p));
    const double penalty =
        c_n > 0.0 ? c_n
                  : rmfgp::default_bic_penalty(static_cast<Eigen::Index>(n));
    const rmfgp::BicResult res = rmfgp::bic_dimension(
        lam, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p), penalty);
    *d_hat = static_cast<size_t>(res.d_hat);
    if (g_out != nullptr) {
      Eigen::Map<rmfgp::Vector>(g_out, res.g.size()) = res.g;
    }
    return RMFGP_OK;
  });
}

int rmfgp_subspace_distance(const double* A, size_t p, size_t d1,
                            const double* A_hat, size_t d2, double* out) {
  return guarded([&] {
    if (A == nullptr || A_hat == nullptr || out == nullptr) {
      return set_error(RMFGP_ERR_INVALID_ARGUMENT, "null argument");
    }
    const rmfgp::Matrix Am = Eigen::Map<const rmfgp::Matrix>(
        A, static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(d1));
    const rmfgp::Matrix Bm = Eigen::Map<const rmfgp::Matrix>(
        A_hat, static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(d2));
    *out = rmfgp::subspace_distance(Am, Bm);
    return RMFGP_OK;
  });
}

int rmfgp_experiment_default_config(const char* problem, char** json_out) {
  return guarded([&] {
    if (problem == nullptr || json_out == nullptr) {
      return set_error(RMFGP_ERR_INVALID_ARGUMENT, "null argument");
    }
    *json_out = dup_string(rmfgp::default_config(problem).to_json());
    return RMFGP_OK;
  });
}

int rmfgp_experiment_run(const char* config_json, const char* out_dir,
                         const char* seed_override, char** summary_json_out) {
  return guarded([&] {
    if (config_json == nullptr || out_dir == nullptr) {
      return set_error(RMFGP_ERR_INVALID_ARGUMENT, "null argument");
    }
    rmfgp::ExperimentConfig config =
        rmfgp::ExperimentConfig::from_json(config_json);
    if (seed_override != nullptr && seed_override[0] != '\0') {
      std::vector<std::uint64_t> seeds;
      std::stringstream ss(seed_override);
      std::string token;
      while (std::getline(ss, token, ',')) {
        try {
          seeds.push_back(std::stoull(token));
        } catch (const std::exception&) {
          throw rmfgp::ConfigError("invalid seed override '" + token + "'");
        }
      }
      if (seeds.empty()) throw rmfgp::ConfigError("empty seed override");
      config.seeds = std::move(seeds);
    }

    const rmfgp::ExperimentReport report = rmfgp::run_experiment(config, out_dir);

    nlohmann::ordered_json summary;
    summary["problem"] = config.problem;
    summary["cells"] = report.cells.size();
    summary["failures"] = report.has_failures;
    summary["wall_seconds"] = report.wall_seconds;
    summary["out_dir"] = out_dir;
    if (summary_json_out != nullptr) {
      *summary_json_out = dup_string(summary.dump(2));
    }
    if (report.has_failures) {
      return set_error(RMFGP_ERR_RUNTIME,
                       "one or more cells failed; see manifest.json");
    }
    return RMFGP_OK;
  });
}

} /* extern "C" */
