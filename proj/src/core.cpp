#include "oversmooth/core.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace oversmooth {

Grid Grid::uniform(int n) {
  if (n <= 0) throw Error("invalid-parameter", "n: must be positive");
  Grid g;
  g.n = n;
  g.h = 1.0 / n;
  g.nodes.resize(n);
  for (int i = 0; i < n; ++i) g.nodes[i] = (i + 0.5) / n;
  return g;
}

static void check_same_grid(const Signal& a, const Signal& b) {
  if (a.grid.n != b.grid.n)
    throw Error("size-mismatch", "signals live on different grids");
}

Signal operator+(const Signal& a, const Signal& b) {
  check_same_grid(a, b);
  Signal out = a;
  for (int i = 0; i < a.n(); ++i) out.values[i] += b.values[i];
  return out;
}

Signal operator-(const Signal& a, const Signal& b) {
  check_same_grid(a, b);
  Signal out = a;
  for (int i = 0; i < a.n(); ++i) out.values[i] -= b.values[i];
  return out;
}

Signal operator*(double s, const Signal& a) {
  Signal out = a;
  for (double& v : out.values) v *= s;
  return out;
}

CoeffTree CoeffTree::zeros_like(const CoeffTree& shape) {
  CoeffTree t;
  t.max_level = shape.max_level;
  t.scaling.assign(shape.scaling.size(), 0.0);
  t.detail.resize(shape.detail.size());
  for (std::size_t j = 0; j < shape.detail.size(); ++j)
    t.detail[j].assign(shape.detail[j].size(), 0.0);
  return t;
}

CoeffTree CoeffTree::zeros(int coarse_len, int levels) {
  CoeffTree t;
  t.max_level = levels;
  t.scaling.assign(coarse_len, 0.0);
  t.detail.resize(levels);
  for (int j = 0; j < levels; ++j) t.detail[j].assign(coarse_len << j, 0.0);
  return t;
}

std::size_t CoeffTree::size() const {
  std::size_t s = scaling.size();
  for (const auto& d : detail) s += d.size();
  return s;
}

std::vector<double> CoeffTree::flatten() const {
  std::vector<double> out;
  out.reserve(size());
  out.insert(out.end(), scaling.begin(), scaling.end());
  for (const auto& d : detail) out.insert(out.end(), d.begin(), d.end());
  return out;
}

CoeffTree CoeffTree::unflatten(std::span<const double> flat, int coarse_len, int levels) {
  CoeffTree t = zeros(coarse_len, levels);
  if (flat.size() != t.size())
    throw Error("size-mismatch", "flat buffer does not match tree shape");
  std::size_t pos = 0;
  for (auto& v : t.scaling) v = flat[pos++];
  for (auto& lvl : t.detail)
    for (auto& v : lvl) v = flat[pos++];
  return t;
}

bool CoeffTree::same_shape(const CoeffTree& other) const {
  if (max_level != other.max_level || scaling.size() != other.scaling.size()) return false;
  for (std::size_t j = 0; j < detail.size(); ++j)
    if (detail[j].size() != other.detail[j].size()) return false;
  return true;
}

static void check_same_shape(const CoeffTree& a, const CoeffTree& b) {
  if (!a.same_shape(b)) throw Error("size-mismatch", "coefficient trees differ in shape");
}

CoeffTree operator+(const CoeffTree& a, const CoeffTree& b) {
  check_same_shape(a, b);
  CoeffTree out = a;
  for (std::size_t i = 0; i < a.scaling.size(); ++i) out.scaling[i] += b.scaling[i];
  for (std::size_t j = 0; j < a.detail.size(); ++j)
    for (std::size_t i = 0; i < a.detail[j].size(); ++i) out.detail[j][i] += b.detail[j][i];
  return out;
}

CoeffTree operator-(const CoeffTree& a, const CoeffTree& b) {
  check_same_shape(a, b);
  CoeffTree out = a;
  for (std::size_t i = 0; i < a.scaling.size(); ++i) out.scaling[i] -= b.scaling[i];
  for (std::size_t j = 0; j < a.detail.size(); ++j)
    for (std::size_t i = 0; i < a.detail[j].size(); ++i) out.detail[j][i] -= b.detail[j][i];
  return out;
}

CoeffTree operator*(double s, const CoeffTree& a) {
  CoeffTree out = a;
  for (auto& v : out.scaling) v *= s;
  for (auto& lvl : out.detail)
    for (auto& v : lvl) v *= s;
  return out;
}

double dot(const CoeffTree& a, const CoeffTree& b) {
  check_same_shape(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.scaling.size(); ++i) s += a.scaling[i] * b.scaling[i];
  for (std::size_t j = 0; j < a.detail.size(); ++j)
    for (std::size_t i = 0; i < a.detail[j].size(); ++i) s += a.detail[j][i] * b.detail[j][i];
  return s;
}

double norm_l2(const CoeffTree& a) { return std::sqrt(dot(a, a)); }

void axpy(CoeffTree& a, double s, const CoeffTree& b) {
  check_same_shape(a, b);
  for (std::size_t i = 0; i < a.scaling.size(); ++i) a.scaling[i] += s * b.scaling[i];
  for (std::size_t j = 0; j < a.detail.size(); ++j)
    for (std::size_t i = 0; i < a.detail[j].size(); ++i) a.detail[j][i] += s * b.detail[j][i];
}

ValidationReport validate_config(const ExperimentConfig& cfg) {
  ValidationReport rep;
  auto bad = [&rep](const std::string& field, const std::string& what) {
    rep.issues.push_back(field + ": " + what);
  };

  if (!is_power_of_two(cfg.n)) bad("n", "power of two required");
  if (cfg.wavelet_order < 1 || cfg.wavelet_order > 10)
    bad("wavelet_order", "supported range is 1..10");
  if (cfg.repetitions < 1) bad("repetitions", "must be at least 1");
  if (cfg.noise_grid.empty()) bad("noise_grid", "must not be empty");
  for (double v : cfg.noise_grid)
    if (!(v > 0.0)) {
      bad("noise_grid", "entries must be strictly positive");
      break;
    }
  if (!std::is_sorted(cfg.noise_grid.begin(), cfg.noise_grid.end()))
    bad("noise_grid", "must be sorted ascending");

  const PenaltySpec& pen = cfg.penalty;
  if (!(pen.r > 0.0)) bad("penalty.r", "must be positive");
  if (!(pen.p > 0.0)) bad("penalty.p", "must be positive");
  if (!(pen.q > 0.0)) bad("penalty.q", "must be positive");
  if (!(pen.u > 0.0)) bad("penalty.u", "must be positive");
  if (pen.kind == PenaltyKind::bv_1d) {
    if (pen.r != 1.0 || pen.p != 1.0 || pen.q != 1.0)
      bad("penalty.kind", "bv-1d requires (r,p,q) = (1,1,1)");
    if (pen.u != 1.0) bad("penalty.u", "bv-1d requires u = 1");
  } else {
    const bool supported = (pen.p == 1.0 && pen.q == 1.0 && pen.u == 1.0) ||
                           (pen.p == 2.0 && pen.q == 1.0 && pen.u == 1.0) ||
                           (pen.p == 2.0 && pen.q == 2.0 && pen.u == 2.0);
    if (!supported)
      bad("penalty", "solver supports (p,q,u) in {(1,1,1),(2,1,1),(2,2,2)}");
  }

  SmoothnessSpec sm = cfg.smoothness();
  if (!(sm.s > 0.0 && sm.s <= sm.r)) bad("smoothness.s", "required s in (0, r]");
  if (sm.a < 0.0) bad("smoothness.a", "must be nonnegative");
  if (sm.d < 1) bad("smoothness.d", "must be at least 1");
  if (!(sm.xi() >= 0.0 && sm.xi() < sm.theta() && sm.theta() <= 1.0))
    bad("smoothness", "required 0 <= xi < theta <= 1");
  if (cfg.penalty.kind == PenaltyKind::besov_sequence && sm.p_bar(pen.p) < 1.0)
    bad("smoothness", "p-bar = 2p(a+r)/(2a+pr) must be >= 1");
  if (cfg.rho && !(*cfg.rho > 0.0)) bad("rho", "must be positive");

  if (cfg.rule == ChoiceRule::discrepancy) {
    if (!(cfg.c_D > 1.0)) bad("c_D", "must exceed 1");
    if (!(cfg.c_D <= cfg.C_D)) bad("C_D", "required c_D <= C_D");
  }
  if (!(cfg.c_l > 0.0 && cfg.c_l <= cfg.c_r)) bad("c_l", "required 0 < c_l <= c_r");
  if (cfg.c_alpha && !(*cfg.c_alpha > 0.0)) bad("c_alpha", "must be positive");
  if (cfg.tau && !(*cfg.tau > 0.0)) bad("tau", "must be positive");
  if (cfg.truth != "jump" && cfg.truth != "smooth")
    bad("truth", "unknown id (expected jump or smooth)");
  if (cfg.rhs != "one" && cfg.rhs != "bump")
    bad("rhs", "unknown id (expected one or bump)");
  if (!(cfg.t_min > 0.0 && cfg.t_min < cfg.t_max)) bad("t_min", "required 0 < t_min < t_max");
  if (cfg.t_count < 2) bad("t_count", "must be at least 2");
  if (cfg.alpha && !(*cfg.alpha > 0.0)) bad("alpha", "must be positive");
  return rep;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "n",            "wavelet_order", "noise_grid",   "repetitions", "seed",
      "penalty.kind", "penalty.r",     "penalty.p",    "penalty.q",   "penalty.u",
      "smoothness.s", "smoothness.a",  "smoothness.d", "rho",         "rule",
      "c_alpha",      "c_D",           "C_D",          "c_l",         "c_r",
      "truth",        "rhs",           "tau",          "target",      "t_min",
      "t_max",        "t_count",       "alpha",        "data"};
  return keys;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error("config-error", key + ": cannot parse number '" + v + "'");
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    long long d = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error("config-error", key + ": cannot parse integer '" + v + "'");
  }
}

}  // namespace

std::vector<double> default_noise_grid() {
  std::vector<double> grid(8);
  for (int i = 0; i < 8; ++i) grid[i] = std::pow(10.0, -4.0 + 2.0 * i / 7.0);
  return grid;
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string stripped = line;
    if (auto hash = stripped.find('#'); hash != std::string::npos)
      stripped = stripped.substr(0, hash);
    stripped = trim(stripped);
    if (stripped.empty()) continue;
    auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw Error("config-error",
                  "line " + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(stripped.substr(0, eq));
    std::string val = trim(stripped.substr(eq + 1));
    if (key == "n") {
      cfg.n = static_cast<int>(parse_int(key, val));
    } else if (key == "wavelet_order") {
      cfg.wavelet_order = static_cast<int>(parse_int(key, val));
    } else if (key == "noise_grid") {
      cfg.noise_grid.clear();
      std::istringstream vs(val);
      std::string tok;
      while (std::getline(vs, tok, ',')) cfg.noise_grid.push_back(parse_double(key, trim(tok)));
    } else if (key == "repetitions") {
      cfg.repetitions = static_cast<int>(parse_int(key, val));
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(parse_int(key, val));
    } else if (key == "penalty.kind") {
      if (val == "besov-sequence")
        cfg.penalty.kind = PenaltyKind::besov_sequence;
      else if (val == "bv-1d")
        cfg.penalty.kind = PenaltyKind::bv_1d;
      else
        throw Error("config-error", "penalty.kind: unknown value '" + val + "'");
    } else if (key == "penalty.r") {
      cfg.penalty.r = parse_double(key, val);
    } else if (key == "penalty.p") {
      cfg.penalty.p = parse_double(key, val);
    } else if (key == "penalty.q") {
      cfg.penalty.q = parse_double(key, val);
    } else if (key == "penalty.u") {
      cfg.penalty.u = parse_double(key, val);
    } else if (key == "smoothness.s") {
      cfg.smoothness_s = parse_double(key, val);
    } else if (key == "smoothness.a") {
      cfg.smoothness_a = parse_double(key, val);
    } else if (key == "smoothness.d") {
      cfg.smoothness_d = static_cast<int>(parse_int(key, val));
    } else if (key == "rho") {
      if (val != "auto") cfg.rho = parse_double(key, val);
    } else if (key == "rule") {
      if (val == "apriori-det")
        cfg.rule = ChoiceRule::apriori_det;
      else if (val == "apriori-stoch")
        cfg.rule = ChoiceRule::apriori_stoch;
      else if (val == "discrepancy")
        cfg.rule = ChoiceRule::discrepancy;
      else
        throw Error("config-error", "rule: unknown value '" + val + "'");
    } else if (key == "c_alpha") {
      if (val != "auto") cfg.c_alpha = parse_double(key, val);
    } else if (key == "c_D") {
      cfg.c_D = parse_double(key, val);
    } else if (key == "C_D") {
      cfg.C_D = parse_double(key, val);
    } else if (key == "c_l") {
      cfg.c_l = parse_double(key, val);
    } else if (key == "c_r") {
      cfg.c_r = parse_double(key, val);
    } else if (key == "truth") {
      cfg.truth = val;
    } else if (key == "rhs") {
      cfg.rhs = val;
    } else if (key == "tau") {
      cfg.tau = parse_double(key, val);
    } else if (key == "target") {
      if (val == "l2")
        cfg.target = TargetNorm::l2;
      else if (val == "lpbar")
        cfg.target = TargetNorm::lpbar;
      else
        throw Error("config-error", "target: unknown value '" + val + "'");
    } else if (key == "t_min") {
      cfg.t_min = parse_double(key, val);
    } else if (key == "t_max") {
      cfg.t_max = parse_double(key, val);
    } else if (key == "t_count") {
      cfg.t_count = static_cast<int>(parse_int(key, val));
    } else if (key == "alpha") {
      cfg.alpha = parse_double(key, val);
    } else if (key == "data") {
      cfg.data = val;
    } else {
      throw Error("config-error", "unknown key '" + key + "'");
    }
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io-error", "cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string config_to_text(const ExperimentConfig& cfg) {
  char line[128];
  std::ostringstream out;
  auto num = [&line](double v) {
    std::snprintf(line, sizeof(line), "%.17g", v);
    return std::string(line);
  };
  out << "n = " << cfg.n << "\n";
  out << "wavelet_order = " << cfg.wavelet_order << "\n";
  out << "noise_grid = ";
  for (std::size_t i = 0; i < cfg.noise_grid.size(); ++i)
    out << (i ? "," : "") << num(cfg.noise_grid[i]);
  out << "\n";
  out << "repetitions = " << cfg.repetitions << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "penalty.kind = "
      << (cfg.penalty.kind == PenaltyKind::bv_1d ? "bv-1d" : "besov-sequence") << "\n";
  out << "penalty.r = " << num(cfg.penalty.r) << "\n";
  out << "penalty.p = " << num(cfg.penalty.p) << "\n";
  out << "penalty.q = " << num(cfg.penalty.q) << "\n";
  out << "penalty.u = " << num(cfg.penalty.u) << "\n";
  out << "smoothness.s = " << num(cfg.smoothness_s) << "\n";
  out << "smoothness.a = " << num(cfg.smoothness_a) << "\n";
  out << "smoothness.d = " << cfg.smoothness_d << "\n";
  out << "rho = " << (cfg.rho ? num(*cfg.rho) : "auto") << "\n";
  out << "rule = "
      << (cfg.rule == ChoiceRule::apriori_det
              ? "apriori-det"
              : (cfg.rule == ChoiceRule::apriori_stoch ? "apriori-stoch" : "discrepancy"))
      << "\n";
  out << "c_alpha = " << (cfg.c_alpha ? num(*cfg.c_alpha) : "auto") << "\n";
  out << "c_D = " << num(cfg.c_D) << "\n";
  out << "C_D = " << num(cfg.C_D) << "\n";
  out << "c_l = " << num(cfg.c_l) << "\n";
  out << "c_r = " << num(cfg.c_r) << "\n";
  out << "truth = " << cfg.truth << "\n";
  out << "rhs = " << cfg.rhs << "\n";
  if (cfg.tau) out << "tau = " << num(*cfg.tau) << "\n";
  out << "target = " << (cfg.target == TargetNorm::l2 ? "l2" : "lpbar") << "\n";
  out << "t_min = " << num(cfg.t_min) << "\n";
  out << "t_max = " << num(cfg.t_max) << "\n";
  out << "t_count = " << cfg.t_count << "\n";
  if (cfg.alpha) out << "alpha = " << num(*cfg.alpha) << "\n";
  if (cfg.data) out << "data = " << *cfg.data << "\n";
  return out.str();
}

Signal make_truth(const std::string& id, const Grid& g) {
  Signal s = Signal::zeros(g);
  if (id == "jump") {
    // piecewise smooth with two interior jumps; 1-periodic across the wrap
    for (int i = 0; i < g.n; ++i) {
      double x = g.nodes[i];
      s.values[i] = 1.0 + (x >= 0.3 && x < 0.6 ? 2.0 : 0.0) +
                    0.5 * std::sin(2.0 * std::numbers::pi * x);
    }
  } else if (id == "smooth") {
    for (int i = 0; i < g.n; ++i) {
      double x = g.nodes[i];
      s.values[i] = 1.5 + std::sin(2.0 * std::numbers::pi * x);
    }
  } else {
    throw Error("invalid-parameter", "truth: unknown id '" + id + "'");
  }
  return s;
}

Signal make_rhs(const std::string& id, const Grid& g) {
  if (id == "one") return Signal::constant(g, 1.0);
  if (id == "bump") {
    Signal s = Signal::zeros(g);
    for (int i = 0; i < g.n; ++i) {
      double x = g.nodes[i];
      s.values[i] = 1.0 + std::exp(-50.0 * (x - 0.5) * (x - 0.5));
    }
    return s;
  }
  throw Error("invalid-parameter", "rhs: unknown id '" + id + "'");
}

}  // namespace oversmooth
