#pragma once

#include "oversmooth/interpolation.hpp"
#include "oversmooth/param_choice.hpp"
#include "oversmooth/solver.hpp"

namespace oversmooth {

/// Discrete white-noise model: n iid N(0, sigma_tilde^2) samples, which
/// approximates white noise on [0,1] at level sigma = sigma_tilde / sqrt(n).
struct NoiseModel {
  double sigma_tilde = 0.0;
  int n = 0;
  std::uint64_t seed = 0;

  double sigma() const { return sigma_tilde / std::sqrt(static_cast<double>(n)); }
};

/// Deterministic seeded Gaussian sample vector; identical seed gives an
/// identical vector bit for bit.
Signal simulate_noise(const NoiseModel& model);

/// Stable per-row seed derived from the master seed and row coordinates.
std::uint64_t row_seed(std::uint64_t master, int noise_index, int repetition);

struct RateRow {
  double sigma_tilde = 0.0;
  int rep = 0;
  double alpha = 0.0;
  double residual = 0.0;
  double err_l2 = 0.0;
  double err_lpbar = 0.0;
  double err_bminus = 0.0;
  double penalty_value = 0.0;
  std::string flag;  // empty when the row is valid
};

struct LevelSummary {
  double sigma_tilde = 0.0;
  int valid = 0;
  double mean_l2 = 0.0, sd_l2 = 0.0;
  double mean_lpbar = 0.0, sd_lpbar = 0.0;
  double mean_bminus = 0.0, sd_bminus = 0.0;
};

enum class ErrColumn { l2, lpbar, bminus };

struct SlopeFit {
  double slope = 0.0;
  double stderr_ = 0.0;
};

struct RateTable {
  std::vector<RateRow> rows;
  std::vector<LevelSummary> summaries;
  SlopeFit slope_l2, slope_lpbar, slope_bminus;
  double c_alpha_used = 0.0;
  double rho_used = 0.0;

  void recompute_summaries(const std::vector<double>& noise_grid);
};

/// Full Monte Carlo sweep: for each noise level and repetition, simulate
/// data, choose alpha by the configured rule, solve, and record errors
/// against the truth.  Deterministic given the config (seed included),
/// independent of the worker count (0 = hardware parallelism).
RateTable run_rate_experiment(const ExperimentConfig& cfg, int workers = 0);

/// Least-squares slope of log(mean error) versus log(sigma_tilde).
SlopeFit fit_rate(const RateTable& table, ErrColumn column);

/// CSV with header sigma_tilde,rep,alpha,residual,err_l2,err_lpbar,
/// err_bminus,penalty_value,flag in full-precision decimal.
void write_rate_csv(const RateTable& table, const std::string& path);
RateTable read_rate_csv(const std::string& path);

/// Log-log plot of per-level mean errors of the target column with error
/// bars and the fitted trend line.
void write_rate_svg(const RateTable& table, TargetNorm target, const std::string& path);

/// CSV + SVG emission; returns the written paths.
std::vector<std::string> emit_results(const RateTable& table, TargetNorm target,
                                      const std::string& csv_path,
                                      const std::string& svg_path);

}  // namespace oversmooth
