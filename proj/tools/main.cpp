// Command-line front end: config parsing, subcommand dispatch, result emission.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "oversmooth/experiments.hpp"

namespace fs = std::filesystem;
using namespace oversmooth;

namespace {

struct GlobalArgs {
  std::string config_path;
  std::string out_dir;
  int workers = 0;
  long long seed_override = -1;
  bool quiet = false;
};

std::string hash8(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[12];
  std::snprintf(buf, sizeof(buf), "%08llx", static_cast<unsigned long long>(h & 0xffffffffull));
  return buf;
}

std::string timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::tm tm_buf{};
  gmtime_r(&now, &tm_buf);
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm_buf);
  return buf;
}

ExperimentConfig load_config(const GlobalArgs& args) {
  if (args.config_path.empty()) throw Error("usage-error", "--config is required");
  ExperimentConfig cfg = parse_config_file(args.config_path);
  if (args.seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed_override);
  ValidationReport rep = validate_config(cfg);
  if (!rep.ok()) {
    std::string msg = "invalid config:";
    for (const auto& issue : rep.issues) msg += "\n  " + issue;
    throw Error("config-error", msg);
  }
  return cfg;
}

fs::path make_run_dir(const GlobalArgs& args, const ExperimentConfig& cfg) {
  std::string base = args.out_dir;
  if (base.empty()) {
    if (const char* env = std::getenv("OVERSMOOTH_OUT")) base = env;
  }
  if (base.empty()) base = "out";
  fs::path dir = fs::path(base) / (hash8(config_to_text(cfg)) + "-" + timestamp());
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("io-error", "cannot create " + dir.string());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("io-error", "cannot open " + path.string());
  out << text;
}

Signal load_observation(const std::string& path, const Grid& grid) {
  std::ifstream in(path);
  if (!in) throw Error("io-error", "cannot open data file " + path);
  Signal g = Signal::zeros(grid);
  for (int i = 0; i < grid.n; ++i)
    if (!(in >> g.values[i]))
      throw Error("io-error", "data file has fewer than n samples");
  return g;
}

int cmd_rates(const GlobalArgs& args) {
  ExperimentConfig cfg = load_config(args);
  fs::path dir = make_run_dir(args, cfg);

  RateTable table = run_rate_experiment(cfg, args.workers);
  auto written = emit_results(table, cfg.target, (dir / "rates.csv").string(),
                              (dir / "rates.svg").string());
  write_text(dir / "config.txt", config_to_text(cfg));

  if (!args.quiet) {
    for (const auto& p : written) std::cout << "wrote " << p << "\n";
    if (cfg.rule == ChoiceRule::apriori_stoch)
      std::cout << "c_alpha=" << table.c_alpha_used << " rho=" << table.rho_used << "\n";
    char line[128];
    std::snprintf(line, sizeof(line), "slope(L2)=%.4f stderr=%.4f", table.slope_l2.slope,
                  table.slope_l2.stderr_);
    std::cout << line << "\n";
    std::snprintf(line, sizeof(line), "slope(Lpbar)=%.4f stderr=%.4f",
                  table.slope_lpbar.slope, table.slope_lpbar.stderr_);
    std::cout << line << "\n";
  }
  for (const auto& row : table.rows)
    if (!row.flag.empty()) {
      std::cerr << "flagged row: sigma_tilde=" << row.sigma_tilde << " rep=" << row.rep
                << " (" << row.flag << ")\n";
      return 1;
    }
  return 0;
}

int solve_like(const GlobalArgs& args, bool denoise) {
  ExperimentConfig cfg = load_config(args);
  fs::path dir = make_run_dir(args, cfg);

  Grid grid = Grid::uniform(cfg.n);
  Signal truth = make_truth(cfg.truth, grid);
  WaveletSpec wavelet = WaveletSpec::make(cfg.wavelet_order, cfg.n);

  std::unique_ptr<ForwardOp> op;
  if (denoise)
    op = std::make_unique<DiagonalOp>(DiagonalOp::identity(cfg.n));
  else
    op = std::make_unique<EllipticBVP>(make_rhs(cfg.rhs, grid));

  double sigma_tilde = cfg.noise_grid.front();
  Signal g_obs = Signal::zeros(grid);
  Signal noise = Signal::zeros(grid);
  if (cfg.data) {
    g_obs = load_observation(*cfg.data, grid);
  } else {
    noise = simulate_noise(NoiseModel{sigma_tilde, cfg.n, row_seed(cfg.seed, 0, 0)});
    g_obs = op->apply(truth) + noise;
  }

  SolveOptions opts;
  SmoothnessSpec spec = cfg.smoothness();
  if (!cfg.rho) {
    SeqNormSpec minus{-cfg.smoothness_a, 2.0, 2.0, cfg.smoothness_d};
    SeqNormSpec r_spec{cfg.penalty.r, cfg.penalty.p, cfg.penalty.q, cfg.smoothness_d};
    auto fit = fit_smoothness(analyze(truth, wavelet), minus, r_spec,
                              log_grid(cfg.t_min, cfg.t_max, std::max(cfg.t_count, 10)));
    spec.rho = fit.rho_hat;
  }

  double alpha;
  SolveReport report;
  if (cfg.alpha) {
    alpha = *cfg.alpha;
    report = minimize_tikhonov(*op, g_obs, alpha, cfg.penalty, wavelet, opts);
  } else if (cfg.rule == ChoiceRule::discrepancy) {
    if (cfg.data)
      throw Error("config-error", "discrepancy rule with a data file needs alpha");
    double delta = residual_norm(*op, noise);
    auto dr =
        discrepancy_search(*op, g_obs, delta, cfg.c_D, cfg.C_D, cfg.penalty, wavelet, opts);
    alpha = dr.alpha;
    report = std::move(dr.report);
  } else if (cfg.rule == ChoiceRule::apriori_stoch) {
    double sigma = sigma_tilde / std::sqrt(static_cast<double>(cfg.n));
    alpha = apriori_stochastic(sigma, spec, cfg.penalty.u, cfg.c_alpha.value_or(1.0));
    report = minimize_tikhonov(*op, g_obs, alpha, cfg.penalty, wavelet, opts);
  } else {
    double delta = cfg.data ? sigma_tilde : residual_norm(*op, noise);
    alpha = apriori_deterministic(delta, spec, cfg.penalty.u, std::sqrt(cfg.c_l * cfg.c_r));
    report = minimize_tikhonov(*op, g_obs, alpha, cfg.penalty, wavelet, opts);
  }

  std::ostringstream rep;
  rep << "alpha = " << alpha << "\n"
      << "residual = " << report.residual << "\n"
      << "status = " << report.status << "\n"
      << "outer_iterations = " << report.outer_iterations << "\n"
      << "inner_iterations = " << report.inner_iterations << "\n"
      << "objective = " << report.objective_trace.back() << "\n"
      << "err_l2_vs_truth = " << lp_norm(report.reconstruction - truth, 2.0) << "\n";
  write_text(dir / "report.txt", rep.str());

  std::ostringstream sol;
  sol << "x,truth,data,estimate\n";
  char line[160];
  for (int i = 0; i < cfg.n; ++i) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g\n", grid.nodes[i],
                  truth.values[i], g_obs.values[i], report.reconstruction.values[i]);
    sol << line;
  }
  write_text(dir / "solution.csv", sol.str());

  if (!args.quiet) {
    std::cout << "wrote " << (dir / "solution.csv").string() << "\n";
    std::cout << "wrote " << (dir / "report.txt").string() << "\n";
    std::cout << "alpha=" << alpha << " residual=" << report.residual
              << " status=" << report.status << "\n";
  }
  return report.status == "no-descent" ? 1 : 0;
}

int cmd_kfun(const GlobalArgs& args) {
  ExperimentConfig cfg = load_config(args);
  fs::path dir = make_run_dir(args, cfg);

  Grid grid = Grid::uniform(cfg.n);
  WaveletSpec wavelet = WaveletSpec::make(cfg.wavelet_order, cfg.n);
  CoeffTree f = analyze(make_truth(cfg.truth, grid), wavelet);
  SeqNormSpec minus{-cfg.smoothness_a, 2.0, 2.0, cfg.smoothness_d};
  SeqNormSpec r_spec{cfg.penalty.r, cfg.penalty.p, cfg.penalty.q, cfg.smoothness_d};

  std::ostringstream csv;
  csv << "t,k\n";
  char line[80];
  for (double t : log_grid(cfg.t_min, cfg.t_max, cfg.t_count)) {
    KResult k = k_functional(f, t, minus, r_spec);
    std::snprintf(line, sizeof(line), "%.17g,%.17g\n", t, k.value);
    csv << line;
  }
  write_text(dir / "kfun.csv", csv.str());
  if (!args.quiet) std::cout << "wrote " << (dir / "kfun.csv").string() << "\n";
  return 0;
}

int cmd_filters(int order, bool quiet) {
  auto h = daubechies_filter(order);
  double sum = 0.0, sumsq = 0.0;
  for (double v : h) {
    sum += v;
    sumsq += v * v;
  }
  double moment_residual = 0.0;
  for (int m = 0; m < order; ++m) {
    double g = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
      double w = std::pow(static_cast<double>(k) / (h.size() - 1), m);
      g += (k % 2 ? -1.0 : 1.0) * w * h[k];
      scale += std::abs(w * h[k]);
    }
    moment_residual = std::max(moment_residual, std::abs(g) / std::max(scale, 1e-300));
  }
  char line[64];
  std::printf("db%d lowpass (%zu taps):\n", order, h.size());
  for (double v : h) {
    std::snprintf(line, sizeof(line), "  % .15f", v);
    std::printf("%s\n", line);
  }
  if (!quiet) {
    std::printf("sum - sqrt2      = % .3e\n", sum - std::sqrt(2.0));
    std::printf("sum of squares-1 = % .3e\n", sumsq - 1.0);
    std::printf("max moment resid = % .3e\n", moment_residual);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tikhonov regularization with oversmoothing Besov and BV penalties"};
  app.require_subcommand(0, 1);

  GlobalArgs args;
  app.add_option("--config", args.config_path, "experiment config file");
  app.add_option("--out", args.out_dir, "output directory (default $OVERSMOOTH_OUT or ./out)");
  app.add_option("--workers", args.workers, "parallel rows (default: hardware)");
  app.add_option("--seed", args.seed_override, "override the config seed");
  app.add_flag("--quiet", args.quiet, "suppress progress output");

  auto* rates = app.add_subcommand("rates", "Monte Carlo convergence-rate sweep (CSV + SVG)");
  auto* solve = app.add_subcommand("solve", "single Tikhonov minimization with report");
  auto* kfun = app.add_subcommand("kfun", "K-functional values over a log t grid (CSV)");
  auto* denoise = app.add_subcommand("denoise", "identity-operator shortcut: shrinkage/TV denoising");
  auto* filters = app.add_subcommand("filters", "print a Daubechies filter and its residuals");
  int filter_order = 7;
  filters->add_option("--order", filter_order, "family order (1..10)");

  std::ostringstream footer;
  footer << "Config keys:";
  for (const auto& k : config_keys()) footer << " " << k;
  app.footer(footer.str());

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage-error: " << e.what() << "\n" << app.help();
    return 2;
  }

  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 2;
  }

  try {
    if (rates->parsed()) return cmd_rates(args);
    if (solve->parsed()) return solve_like(args, false);
    if (denoise->parsed()) return solve_like(args, true);
    if (kfun->parsed()) return cmd_kfun(args);
    if (filters->parsed()) return cmd_filters(filter_order, args.quiet);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.code() == "usage-error" ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
