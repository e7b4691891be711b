#pragma once

#include <array>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace radlab {

/// Raised when a quantity is requested outside the parameter range where it
/// is defined (e.g. the amplitude constant when q >= 2p/(p+1)).
class NotApplicable : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// The equation -Δu = |u|^{p-1}u + M|∇u|^q in dimension N.
struct ProblemParams {
  int N = 3;
  double p = 3.0;
  double q = 1.5;
  double M = 0.0;

  friend bool operator==(const ProblemParams&, const ProblemParams&) = default;
};

/// Throws std::invalid_argument unless N >= 1, p > 1, q > 1 and all finite.
void validate(const ProblemParams& params);

/// 2p/(p+1): the gradient exponent making the equation scale invariant.
double critical_q(double p);

/// Every closed-form exponent and threshold depending on (N, p, q).
/// Quantities that only make sense on part of parameter space are optional;
/// an empty optional means "not applicable" for these parameters.
struct CriticalConstants {
  double p_serrin = kInfinity;   // N/(N-2), +inf for N <= 2
  double p_sobolev = kInfinity;  // (N+2)/(N-2), +inf for N <= 2
  double q_crit = 0.0;
  double K = 0.0;          // ((N-2)p - N)/(p-1)
  double L = 0.0;          // K - 2/(p-1)
  double omega = 0.0;      // ((p+1)q - 2p)/(p-1), log-variable exponent
  double omega_bar = 0.0;  // (p-1) omega/(q-1)
  std::optional<double> mu_star;
  double m_dagger = 0.0;
  std::optional<double> Q_Np;
  std::optional<double> q_bar;
  bool q_bar_ambiguous = false;  // both quadratic roots fell in (q_crit, p)
  std::optional<double> c_amplitude;
};

CriticalConstants critical_constants(const ProblemParams& params);

/// Closed form of mu* = (p+1)((N-(N-2)p)/(2p))^{p/(p+1)}; empty when
/// N - (N-2)p < 0.
std::optional<double> mu_star(int N, double p);

/// M_dagger = ((p-1)/(p+1))^{(p-1)/(p+1)} (N(p+1)^2/(4p))^{p/(p+1)}.
double m_dagger(int N, double p);

/// Coefficients (a, b, c) of a X^2 + b X + c for the q-bar quadratic
/// (N-1)(X-p)^2 - (N+2-(N-2)p)((p+1)X - 2p)X.
std::array<double, 3> q_bar_quadratic(int N, double p);

enum class Regime { GradientDominant, Balanced, SourceDominant };

std::string_view to_string(Regime regime);

inline constexpr double kBalancedTolerance = 1e-12;

Regime regime(const ProblemParams& params, double eq_tol = kBalancedTolerance);

enum class ScalingKind { Tk, Sk, NormalizeM };

/// A change of unknowns between two equivalent problems. The convention is
///
///   u(x) = amplitude_factor * v(length_factor * x)
///
/// where u solves the original problem and v solves
///   -Δv = source_coefficient * v^p + new_params.M |∇v|^q.
struct ScalingMap {
  double amplitude_factor = 1.0;
  double length_factor = 1.0;
  double source_coefficient = 1.0;
  ProblemParams new_params;
};

/// Map from a problem with unit source coefficient.
ScalingMap apply_scaling(const ProblemParams& params, ScalingKind kind, double k);

/// Chain a further transform after `prior`. NormalizeM requires a unit
/// source coefficient in `prior`.
ScalingMap apply_scaling(const ScalingMap& prior, ScalingKind kind, double k);

ScalingMap compose(const ScalingMap& first, const ScalingMap& second);

/// Constraint evaluation for the (m, d) pair of the integral method.
struct IntegralMethodCheck {
  bool distinct = false;        // d != m + 2
  bool d_lower = false;         // 2(N-1)p/(N+2) < d
  bool m_window = false;        // max{-2, 1-p, ((N-4)p-N)/2} < m <= 0
  bool quadratic = false;       // 2(N-m)d - (N-1)(m^2 + d^2) > 0
  bool all() const { return distinct && d_lower && m_window && quadratic; }
};

IntegralMethodCheck integral_method_check(int N, double p, double m, double d);

/// Deterministic grid-and-refine search for a feasible (m, d). Throws
/// std::invalid_argument outside N >= 3, 1 < p < (N+2)/(N-2) and
/// std::runtime_error if no feasible point is found.
std::pair<double, double> integral_method_params(int N, double p);

}  // namespace radlab
