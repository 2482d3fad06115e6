#include "oversmooth/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

namespace oversmooth {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::uint64_t row_seed(std::uint64_t master, int noise_index, int repetition) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ (0x100000001ull * static_cast<std::uint64_t>(noise_index + 1)));
  s = splitmix64(s ^ (0x200000003ull * static_cast<std::uint64_t>(repetition + 1)));
  return s;
}

Signal simulate_noise(const NoiseModel& model) {
  Signal out = Signal::zeros(Grid::uniform(model.n));
  if (model.sigma_tilde == 0.0) return out;
  std::mt19937_64 gen(model.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < model.n; ++i) out.values[i] = model.sigma_tilde * gauss(gen);
  return out;
}

void RateTable::recompute_summaries(const std::vector<double>& noise_grid) {
  summaries.clear();
  for (double sig : noise_grid) {
    LevelSummary s;
    s.sigma_tilde = sig;
    std::vector<double> l2, lp, bm;
    for (const auto& row : rows) {
      if (row.sigma_tilde != sig || !row.flag.empty()) continue;
      l2.push_back(row.err_l2);
      lp.push_back(row.err_lpbar);
      bm.push_back(row.err_bminus);
    }
    s.valid = static_cast<int>(l2.size());
    auto mean_sd = [](const std::vector<double>& v, double& mean, double& sd) {
      mean = 0.0;
      sd = 0.0;
      if (v.empty()) return;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      if (v.size() > 1) {
        for (double x : v) sd += (x - mean) * (x - mean);
        sd = std::sqrt(sd / static_cast<double>(v.size() - 1));
      }
    };
    mean_sd(l2, s.mean_l2, s.sd_l2);
    mean_sd(lp, s.mean_lpbar, s.sd_lpbar);
    mean_sd(bm, s.mean_bminus, s.sd_bminus);
    summaries.push_back(s);
  }
  auto safe_fit = [this](ErrColumn col) {
    try {
      return fit_rate(*this, col);
    } catch (const Error&) {
      return SlopeFit{std::numeric_limits<double>::quiet_NaN(),
                      std::numeric_limits<double>::quiet_NaN()};
    }
  };
  slope_l2 = safe_fit(ErrColumn::l2);
  slope_lpbar = safe_fit(ErrColumn::lpbar);
  slope_bminus = safe_fit(ErrColumn::bminus);
}

namespace {

struct ExperimentSetup {
  Grid grid;
  Signal truth;
  std::unique_ptr<EllipticBVP> op;
  WaveletSpec wavelet;
  SmoothnessSpec smoothness;
  SeqNormSpec minus_spec;
  double p_bar = 2.0;
  double rho = 1.0;
};

ExperimentSetup make_setup(const ExperimentConfig& cfg) {
  ExperimentSetup st;
  st.grid = Grid::uniform(cfg.n);
  st.truth = make_truth(cfg.truth, st.grid);
  st.op = std::make_unique<EllipticBVP>(make_rhs(cfg.rhs, st.grid));
  st.op->degree_a = cfg.smoothness_a;
  st.wavelet = WaveletSpec::make(cfg.wavelet_order, cfg.n);
  st.smoothness = cfg.smoothness();
  st.minus_spec = SeqNormSpec{-cfg.smoothness_a, 2.0, 2.0, cfg.smoothness_d};
  st.p_bar = st.smoothness.p_bar(cfg.penalty.p);

  if (cfg.rho) {
    st.rho = *cfg.rho;
  } else {
    SeqNormSpec r_spec{cfg.penalty.r, cfg.penalty.p, cfg.penalty.q, cfg.smoothness_d};
    auto grid_t = log_grid(cfg.t_min, cfg.t_max, std::max(cfg.t_count, 10));
    auto fit = fit_smoothness(analyze(st.truth, st.wavelet), st.minus_spec, r_spec, grid_t);
    st.rho = fit.rho_hat;
  }
  st.smoothness.rho = st.rho;
  return st;
}

RateRow run_single_row(const ExperimentConfig& cfg, const ExperimentSetup& st,
                       double sigma_tilde, int rep, std::uint64_t seed) {
  RateRow row;
  row.sigma_tilde = sigma_tilde;
  row.rep = rep;
  try {
    Signal clean = st.op->apply(st.truth);
    Signal noise = simulate_noise(NoiseModel{sigma_tilde, cfg.n, seed});
    Signal g_obs = clean + noise;

    SolveOptions opts;
    SolveReport report;
    if (cfg.rule == ChoiceRule::discrepancy) {
      double delta = residual_norm(*st.op, noise);
      auto dr = discrepancy_search(*st.op, g_obs, delta, cfg.c_D, cfg.C_D, cfg.penalty,
                                   st.wavelet, opts);
      row.alpha = dr.alpha;
      report = std::move(dr.report);
    } else {
      if (cfg.rule == ChoiceRule::apriori_det) {
        double delta = std::max(residual_norm(*st.op, noise), 1e-12);
        double c = std::sqrt(cfg.c_l * cfg.c_r);
        row.alpha = apriori_deterministic(delta, st.smoothness, cfg.penalty.u, c);
      } else {
        double sigma = sigma_tilde > 0.0
                           ? sigma_tilde / std::sqrt(static_cast<double>(cfg.n))
                           : 1e-12;
        row.alpha = apriori_stochastic(sigma, st.smoothness, cfg.penalty.u,
                                       cfg.c_alpha.value_or(1.0));
      }
      report = minimize_tikhonov_whitenoise(*st.op, g_obs, row.alpha, cfg.penalty,
                                            st.wavelet, opts);
      if (report.status == "no-descent") row.flag = "no-descent";
    }

    Signal diff = report.reconstruction - st.truth;
    row.residual = report.residual;
    row.err_l2 = lp_norm(diff, 2.0);
    row.err_lpbar = lp_norm(diff, st.p_bar);
    row.err_bminus = besov_error_norm(diff, st.minus_spec, st.wavelet);
    row.penalty_value = penalty_value(report.minimizer, cfg.penalty, cfg.smoothness_d);
  } catch (const Error& e) {
    row.flag = e.code();
  } catch (const std::exception&) {
    row.flag = "runtime-error";
  }
  return row;
}

double calibrate_c_alpha(const ExperimentConfig& cfg, const ExperimentSetup& st,
                         int workers) {
  // Grid over quarter-decade steps at the median noise level: 3 pilot data
  // sets with a dedicated seed family, shared across candidates.
  const int median_index = static_cast<int>(cfg.noise_grid.size()) / 2;
  const double sigma_tilde = cfg.noise_grid[median_index];
  const std::uint64_t pilot_master = splitmix64(cfg.seed ^ 0x70696c6f74ull);

  std::vector<double> candidates;
  for (int k = -12; k <= 12; ++k) candidates.push_back(std::pow(10.0, 0.25 * k));

  ExperimentConfig pilot_cfg = cfg;
  std::vector<std::pair<int, int>> jobs;  // candidate index, pilot rep
  for (int ci = 0; ci < static_cast<int>(candidates.size()); ++ci)
    for (int rep = 0; rep < 3; ++rep) jobs.emplace_back(ci, rep);
  std::vector<double> errs(jobs.size(), 0.0);

  auto run_job = [&](std::size_t j) {
    auto [ci, rep] = jobs[j];
    ExperimentConfig c = pilot_cfg;
    c.c_alpha = candidates[ci];
    RateRow row = run_single_row(c, st, sigma_tilde, rep,
                                 row_seed(pilot_master, median_index, rep));
    if (!row.flag.empty()) {
      errs[j] = std::numeric_limits<double>::infinity();
      return;
    }
    errs[j] = cfg.target == TargetNorm::lpbar ? row.err_lpbar : row.err_l2;
  };

  if (workers > 1) {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t)
      pool.emplace_back([&]() {
        for (std::size_t j = next.fetch_add(1); j < jobs.size(); j = next.fetch_add(1))
          run_job(j);
      });
    for (auto& th : pool) th.join();
  } else {
    for (std::size_t j = 0; j < jobs.size(); ++j) run_job(j);
  }

  double best_c = candidates[0];
  double best_err = std::numeric_limits<double>::infinity();
  for (int ci = 0; ci < static_cast<int>(candidates.size()); ++ci) {
    double mean = (errs[3 * ci] + errs[3 * ci + 1] + errs[3 * ci + 2]) / 3.0;
    if (mean < best_err) {
      best_err = mean;
      best_c = candidates[ci];
    }
  }
  if (!std::isfinite(best_err))
    throw Error("no-bracket", "calibration failed on every candidate c_alpha");
  return best_c;
}

}  // namespace

RateTable run_rate_experiment(const ExperimentConfig& cfg, int workers) {
  ExperimentSetup st = make_setup(cfg);

  ExperimentConfig run_cfg = cfg;
  if (workers <= 0)
    workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  RateTable table;
  table.rho_used = st.rho;
  run_cfg.rho = st.rho;
  if (cfg.rule == ChoiceRule::apriori_stoch) {
    run_cfg.c_alpha = cfg.c_alpha ? *cfg.c_alpha : calibrate_c_alpha(run_cfg, st, workers);
    table.c_alpha_used = *run_cfg.c_alpha;
  }

  const int levels = static_cast<int>(cfg.noise_grid.size());
  table.rows.resize(static_cast<std::size_t>(levels) * cfg.repetitions);

  auto run_job = [&](std::size_t idx) {
    int i = static_cast<int>(idx) / cfg.repetitions;
    int rep = static_cast<int>(idx) % cfg.repetitions;
    table.rows[idx] = run_single_row(run_cfg, st, cfg.noise_grid[i], rep,
                                     row_seed(cfg.seed, i, rep));
  };

  if (workers > 1) {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t)
      pool.emplace_back([&]() {
        for (std::size_t j = next.fetch_add(1); j < table.rows.size();
             j = next.fetch_add(1))
          run_job(j);
      });
    for (auto& th : pool) th.join();
  } else {
    for (std::size_t j = 0; j < table.rows.size(); ++j) run_job(j);
  }

  table.recompute_summaries(cfg.noise_grid);
  return table;
}

SlopeFit fit_rate(const RateTable& table, ErrColumn column) {
  std::vector<double> xs, ys;
  for (const auto& s : table.summaries) {
    double mean = column == ErrColumn::l2
                      ? s.mean_l2
                      : (column == ErrColumn::lpbar ? s.mean_lpbar : s.mean_bminus);
    if (s.valid == 0 || !(mean > 0.0)) continue;
    xs.push_back(std::log(s.sigma_tilde));
    ys.push_back(std::log(mean));
  }
  const int m = static_cast<int>(xs.size());
  if (m < 4) throw Error("insufficient-data", "need at least 4 valid noise levels");

  double sx = 0.0, sy = 0.0;
  for (int i = 0; i < m; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  double mx = sx / m, my = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < m; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx <= 0.0) throw Error("insufficient-data", "noise grid has no spread");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  double ss_res = 0.0;
  for (int i = 0; i < m; ++i) {
    double pred = my + fit.slope * (xs[i] - mx);
    ss_res += (ys[i] - pred) * (ys[i] - pred);
  }
  fit.stderr_ = m > 2 ? std::sqrt(ss_res / (m - 2) / sxx) : 0.0;
  return fit;
}

void write_rate_csv(const RateTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("io-error", "cannot open " + path + " for writing");
  out << "sigma_tilde,rep,alpha,residual,err_l2,err_lpbar,err_bminus,penalty_value,flag\n";
  for (const auto& r : table.rows) {
    out << fmt(r.sigma_tilde) << ',' << r.rep << ',' << fmt(r.alpha) << ','
        << fmt(r.residual) << ',' << fmt(r.err_l2) << ',' << fmt(r.err_lpbar) << ','
        << fmt(r.err_bminus) << ',' << fmt(r.penalty_value) << ',' << r.flag << '\n';
  }
  if (!out) throw Error("io-error", "write failed for " + path);
}

RateTable read_rate_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io-error", "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error("io-error", "empty file " + path);
  RateTable table;
  std::vector<double> grid;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    RateRow r;
    auto next = [&](const char* what) {
      if (!std::getline(ls, tok, ',')) throw Error("io-error", std::string("missing ") + what);
      return tok;
    };
    r.sigma_tilde = std::stod(next("sigma_tilde"));
    r.rep = std::stoi(next("rep"));
    r.alpha = std::stod(next("alpha"));
    r.residual = std::stod(next("residual"));
    r.err_l2 = std::stod(next("err_l2"));
    r.err_lpbar = std::stod(next("err_lpbar"));
    r.err_bminus = std::stod(next("err_bminus"));
    r.penalty_value = std::stod(next("penalty_value"));
    std::getline(ls, r.flag, ',');
    table.rows.push_back(std::move(r));
    if (std::find(grid.begin(), grid.end(), table.rows.back().sigma_tilde) == grid.end())
      grid.push_back(table.rows.back().sigma_tilde);
  }
  table.recompute_summaries(grid);
  return table;
}

void write_rate_svg(const RateTable& table, TargetNorm target, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("io-error", "cannot open " + path + " for writing");

  const double W = 640, H = 480, ml = 70, mr = 20, mt = 20, mb = 50;
  std::vector<double> xs, ys, sds;
  for (const auto& s : table.summaries) {
    double mean = target == TargetNorm::lpbar ? s.mean_lpbar : s.mean_l2;
    double sd = target == TargetNorm::lpbar ? s.sd_lpbar : s.sd_l2;
    if (s.valid == 0 || !(mean > 0.0)) continue;
    xs.push_back(std::log10(s.sigma_tilde));
    ys.push_back(std::log10(mean));
    sds.push_back(sd);
  }

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H
      << "\" fill=\"white\"/>\n";

  if (!xs.empty()) {
    double xmin = *std::min_element(xs.begin(), xs.end());
    double xmax = *std::max_element(xs.begin(), xs.end());
    double ymin = *std::min_element(ys.begin(), ys.end());
    double ymax = *std::max_element(ys.begin(), ys.end());
    if (xmax == xmin) xmax = xmin + 1.0;
    double ypad = 0.15 * std::max(ymax - ymin, 0.2);
    ymin -= ypad;
    ymax += ypad;
    auto X = [&](double lx) { return ml + (lx - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto Y = [&](double ly) { return H - mb - (ly - ymin) / (ymax - ymin) * (H - mt - mb); };

    out << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
        << H - mb << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << H - mb << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12
        << "\" text-anchor=\"middle\" font-size=\"13\">log10 sigma-tilde</text>\n";
    out << "<text x=\"16\" y=\"" << (mt + H - mb) / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
        << (mt + H - mb) / 2 << ")\">log10 mean error</text>\n";

    // trend line from the least-squares fit on the plotted points
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int m = static_cast<int>(xs.size());
    for (int i = 0; i < m; ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    if (m >= 2 && m * sxx - sx * sx > 0.0) {
      double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
      double icept = (sy - slope * sx) / m;
      out << "<line class=\"trend\" x1=\"" << X(xmin) << "\" y1=\"" << Y(icept + slope * xmin)
          << "\" x2=\"" << X(xmax) << "\" y2=\"" << Y(icept + slope * xmax)
          << "\" stroke=\"#888\" stroke-dasharray=\"6 3\"/>\n";
      out << "<text x=\"" << W - mr - 8 << "\" y=\"" << mt + 16
          << "\" text-anchor=\"end\" font-size=\"13\">slope " << slope << "</text>\n";
    }

    for (int i = 0; i < m; ++i) {
      double cx = X(xs[i]), cy = Y(ys[i]);
      double mean = std::pow(10.0, ys[i]);
      double up = std::log10(mean + sds[i]);
      double dn = mean > sds[i] ? std::log10(mean - sds[i]) : ys[i] - ypad;
      out << "<line x1=\"" << cx << "\" y1=\"" << Y(dn) << "\" x2=\"" << cx << "\" y2=\""
          << Y(up) << "\" stroke=\"#cc3333\"/>\n";
      out << "<circle cx=\"" << cx << "\" cy=\"" << cy
          << "\" r=\"4\" fill=\"#cc3333\"/>\n";
    }
  }
  out << "</svg>\n";
  if (!out) throw Error("io-error", "write failed for " + path);
}

std::vector<std::string> emit_results(const RateTable& table, TargetNorm target,
                                      const std::string& csv_path,
                                      const std::string& svg_path) {
  std::vector<std::string> written;
  write_rate_csv(table, csv_path);
  written.push_back(csv_path);
  bool any_valid = false;
  for (const auto& s : table.summaries) any_valid |= s.valid > 0;
  if (!table.rows.empty() && any_valid) {
    write_rate_svg(table, target, svg_path);
    written.push_back(svg_path);
  }
  return written;
}

}  // namespace oversmooth
