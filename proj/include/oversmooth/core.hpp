#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace oversmooth {

/// Error with a stable machine-readable category code alongside the message.
/// Codes in use: invalid-parameter, unsupported-order, size-mismatch,
/// unsupported-pair, degenerate-fit, nonpositive-coefficient, singular-system,
/// no-bracket, non-monotone, no-descent, iteration-cap, insufficient-data,
/// io-error, usage-error, config-error.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

inline bool is_power_of_two(long long v) { return v > 0 && (v & (v - 1)) == 0; }

/// Uniform sampling grid on (0,1): n midpoints (i+1/2)/n, spacing h = 1/n.
struct Grid {
  int n = 0;
  double h = 0.0;
  std::vector<double> nodes;

  static Grid uniform(int n);

  bool operator==(const Grid& other) const { return n == other.n; }
};

/// A function on [0,1] sampled at the grid nodes.
struct Signal {
  Grid grid;
  std::vector<double> values;

  static Signal zeros(const Grid& g) { return Signal{g, std::vector<double>(g.n, 0.0)}; }
  static Signal constant(const Grid& g, double v) { return Signal{g, std::vector<double>(g.n, v)}; }

  int n() const { return grid.n; }
};

Signal operator+(const Signal& a, const Signal& b);
Signal operator-(const Signal& a, const Signal& b);
Signal operator*(double s, const Signal& a);

/// Wavelet coefficients of one signal, organized by dyadic levels.
/// `scaling` holds the coarsest-level scaling block; `detail[j]` holds the
/// detail coefficients of level j, ordered coarse to fine, |detail[j]| =
/// |scaling| * 2^j.  Total count equals the originating signal length.
struct CoeffTree {
  int max_level = 0;  // J, the number of detail levels
  std::vector<double> scaling;
  std::vector<std::vector<double>> detail;

  static CoeffTree zeros_like(const CoeffTree& shape);
  /// Shape with coarse scaling block of length `coarse_len` and J detail
  /// levels; total size coarse_len * 2^J.
  static CoeffTree zeros(int coarse_len, int levels);

  std::size_t size() const;
  /// Number of weight levels: level 0 covers scaling plus detail[0],
  /// level j >= 1 is detail[j].  Trees with no detail have one level.
  int weight_levels() const { return max_level > 0 ? max_level : 1; }

  std::vector<double> flatten() const;
  static CoeffTree unflatten(std::span<const double> flat, int coarse_len, int levels);

  bool same_shape(const CoeffTree& other) const;
};

// Elementwise arithmetic used by the iterative solvers.
CoeffTree operator+(const CoeffTree& a, const CoeffTree& b);
CoeffTree operator-(const CoeffTree& a, const CoeffTree& b);
CoeffTree operator*(double s, const CoeffTree& a);
double dot(const CoeffTree& a, const CoeffTree& b);
double norm_l2(const CoeffTree& a);
/// a += s * b
void axpy(CoeffTree& a, double s, const CoeffTree& b);

enum class PenaltyKind { besov_sequence, bv_1d };

/// Identity of the penalty term: the space parameters of the (quasi-)norm,
/// the power u it is raised to, and which prox family realizes it.
struct PenaltySpec {
  double r = 2.0;  // smoothness
  double p = 1.0;  // integrability
  double q = 1.0;  // fine index
  double u = 1.0;  // norm power
  PenaltyKind kind = PenaltyKind::besov_sequence;
};

/// (theta, s, a, r, d, rho) bundle tying a truth to its interpolation class
/// and the exponents of the parameter choice rules.
struct SmoothnessSpec {
  double s = 0.5;    // truth smoothness
  double a = 2.0;    // degree of ill-posedness
  double r = 2.0;    // penalty smoothness
  int d = 1;         // dimension
  double rho = 1.0;  // smoothness budget

  double theta() const { return (s + a) / (a + r); }
  double xi() const { return a / (a + r); }
  double p_bar(double p) const { return 2.0 * p * (a + r) / (2.0 * a + p * r); }
  double t_s() const { return (2.0 * a + 2.0 * r) / (s + 2.0 * a + r); }
};

enum class ChoiceRule { apriori_det, apriori_stoch, discrepancy };

enum class TargetNorm { l2, lpbar };

/// Default noise grid: 8 log-spaced sigma-tilde levels over [1e-4, 1e-2].
std::vector<double> default_noise_grid();

/// One experiment: grid size, noise levels, penalty, smoothness class,
/// parameter choice rule and its constants, truth/rhs selection.
struct ExperimentConfig {
  int n = 1024;
  int wavelet_order = 7;
  std::vector<double> noise_grid = default_noise_grid();  // sorted ascending
  int repetitions = 10;
  std::uint64_t seed = 1;
  PenaltySpec penalty;
  double smoothness_s = 0.5;
  double smoothness_a = 2.0;
  int smoothness_d = 1;
  std::optional<double> rho;  // empty: estimate from the truth
  ChoiceRule rule = ChoiceRule::apriori_stoch;
  std::optional<double> c_alpha;  // empty: calibrate at the median noise level
  double c_D = 1.5;
  double C_D = 2.0;
  double c_l = 1.0;
  double c_r = 1.0;
  std::string truth = "jump";
  std::string rhs = "one";
  std::optional<double> tau;  // domain-ball radius, carried but not enforced
  TargetNorm target = TargetNorm::l2;
  // t grid for the kfun subcommand
  double t_min = 1e-4;
  double t_max = 1e2;
  int t_count = 25;
  std::optional<double> alpha;       // fixed alpha for solve/denoise
  std::optional<std::string> data;   // observation file for solve

  SmoothnessSpec smoothness() const {
    return SmoothnessSpec{smoothness_s, smoothness_a, penalty.r, smoothness_d,
                          rho.value_or(1.0)};
  }
};

struct ValidationReport {
  std::vector<std::string> issues;  // "field: violated constraint"
  bool ok() const { return issues.empty(); }
};

/// Checks every type invariant of the config.  Returns an empty report iff
/// the config is accepted; idempotent on accepted configs.
ValidationReport validate_config(const ExperimentConfig& cfg);

/// Keys accepted by the config file parser, in documentation order.
const std::vector<std::string>& config_keys();

/// Flat key-value config file: `key = value` lines, `#` comments.
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);
std::string config_to_text(const ExperimentConfig& cfg);

/// Built-in truths and right-hand sides for the identification experiments.
Signal make_truth(const std::string& id, const Grid& g);
Signal make_rhs(const std::string& id, const Grid& g);

}  // namespace oversmooth
