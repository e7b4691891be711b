#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "radlab/params.hpp"
#include "radlab/radial_ode.hpp"

namespace radlab {

// ---- energy -------------------------------------------------------------

/// H = u^{p+1}/(p+1) + u'^2/2.
double energy_H(const RadialState& s, const ProblemParams& params);

/// H' = M|u'|^{q+1} - (N-1)/r u'^2. Throws std::domain_error for r <= 0.
double energy_Hprime(const RadialState& s, const ProblemParams& params);

// ---- log-variable systems ---------------------------------------------

/// x = r^{2/(p-1)} u, y = -r^{(p+1)/(p-1)} u', t = ln r.
struct LogStateXY {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
};

/// xi = r^{(2-q)/(q-1)} u, eta = -r^{1/(q-1)} u', t = ln r.
struct LogStateXiEta {
  double t = 0.0;
  double xi = 0.0;
  double eta = 0.0;
};

/// Derivatives of a log system. negative_base is set when a non-integer
/// power had to be taken of a negative value (odd extension |y|^{q-1}y).
struct LogRhs {
  double d1 = 0.0;
  double d2 = 0.0;
  bool negative_base = false;
};

LogStateXY to_log_xy(const RadialState& s, const ProblemParams& params);
RadialState from_log_xy(const LogStateXY& ls, const ProblemParams& params);

/// (2x/(p-1) - y, -K y + x^p + M e^{-omega t} y^q).
LogRhs xy_rhs(const LogStateXY& ls, const ProblemParams& params);

/// Throws NotApplicable at q = 2, where xi degenerates to u.
LogStateXiEta to_log_xieta(const RadialState& s, const ProblemParams& params);
RadialState from_log_xieta(const LogStateXiEta& ls, const ProblemParams& params);

/// ((2-q)/(q-1) xi - eta, -((N-1)q-N)/(q-1) eta + e^{omega_bar t} xi^p + M eta^q).
LogRhs xieta_rhs(const LogStateXiEta& ls, const ProblemParams& params);

/// Leighton-type function of the (x, y) system and its t-derivative along
/// solutions.
double leighton_N(const LogStateXY& ls, const ProblemParams& params);
double leighton_Nprime(const LogStateXY& ls, const ProblemParams& params);

/// Fixed point of the M = 0 (x, y) system; empty unless K > 0.
std::optional<LogStateXY> xy_fixed_point(const ProblemParams& params);

/// eta* = (((N-1)q-N)/((q-1)M))^{1/(q-1)}; empty unless M > 0, q > N/(N-1).
std::optional<double> eta_fixed_point(const ProblemParams& params);

struct LogTolerance {
  double rel = 1e-11;
  double abs = 1e-13;
};

template <class State>
struct LogPath {
  std::vector<State> states;  // at the requested output times
  bool negative_base = false;
};

/// Integrate the (x, y) system from `start` and report states at the given
/// increasing output times (all >= start.t).
LogPath<LogStateXY> integrate_log_xy(const ProblemParams& params, const LogStateXY& start,
                                     const std::vector<double>& t_out, const LogTolerance& tol = {});

LogPath<LogStateXiEta> integrate_log_xieta(const ProblemParams& params,
                                           const LogStateXiEta& start,
                                           const std::vector<double>& t_out,
                                           const LogTolerance& tol = {});

// ---- Pohozaev-Pucci-Serrin function -------------------------------------

struct PPSParams {
  double kappa = 1.0;
  double alpha = 1.0;
  double gamma = 0.0;
  double theta = 0.0;

  /// Throws std::invalid_argument unless kappa > 0 and alpha > 0.
  void validate() const;
};

/// Z = r^kappa (u'^2/2 + u^{p+1}/(p+1) + alpha u u'/r - gamma u |u'|^q).
double pps_Z(const RadialState& s, const PPSParams& pp, const ProblemParams& params);

/// U defined by Z' + theta |u'|^{q-1} Z = r^{kappa-1} U along decreasing
/// solutions (u' <= 0).
double pps_U(const RadialState& s, const PPSParams& pp, const ProblemParams& params);

struct NonexistencePPS {
  PPSParams pp;
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
};

/// kappa = 2(p+1)(N-1)/(p+3), alpha = kappa/(p+1), gamma = -2M/(q(p+1)+2),
/// theta = q(p+1) gamma; A, B, C the coefficients of the factored U.
NonexistencePPS nonexistence_pps(const ProblemParams& params);

struct FactoredU {
  double value = 0.0;
  bool outside_regime = false;  // u' >= 0 or u <= 0
};

/// 2/(p+3)^2 (u|u'|/r)(A + B M chi + C M^2 chi^2),
/// chi = (p+3)/(2+q(p+1)) r |u'|^{q-1}.
FactoredU pps_U_factored(const RadialState& s, const ProblemParams& params);

/// Largest centered-difference defect of the Z/U identity over the interior
/// of a uniformly spaced, strictly positive sample sequence.
double pps_identity_defect(const std::vector<RadialState>& uniform, const PPSParams& pp,
                           const ProblemParams& params);

/// Integrate at amplitude a with uniform output spacing h on [r_lo, r_hi]
/// and return the identity defect.
double pps_identity_defect(const ProblemParams& params, double a, const PPSParams& pp,
                           double r_lo, double r_hi, double h, const IntegratorConfig& cfg = {});

// ---- a priori bounds ---------------------------------------------------

enum class BoundId {
  SourceDecay,       // u r^{2/(p-1)} <= c0
  SourceGradient,    // |u'| r^{(p+1)/(p-1)} <= (N-2) c0
  GradientDecay,     // |u'| r^{1/(q-1)} <= (((q-1)(N-1)-1)/((q-1)M))^{1/(q-1)}
  GradientProfile,   // u r^{(2-q)/(q-1)} <= (q-1)/(2-q) * same
  UniversalGradient, // |u'| <= c (M^{-(p+1)/((p+1)q-2p)} + (M dist)^{-1/(q-1)})
  PuncturedDecay,    // u r^{2/(p-1)} <= c_{N,p} (constant not explicit)
};

std::string_view to_string(BoundId id);

/// Throws std::invalid_argument for an unknown name.
BoundId parse_bound_id(std::string_view name);

inline constexpr BoundId kAllBounds[] = {BoundId::SourceDecay,     BoundId::SourceGradient,
                                         BoundId::GradientDecay,   BoundId::GradientProfile,
                                         BoundId::UniversalGradient, BoundId::PuncturedDecay};

struct BoundReport {
  BoundId id = BoundId::SourceDecay;
  double minimal_constant = 0.0;
  std::optional<double> reference_constant;
  std::optional<bool> satisfied;
  double r_lo = 0.0;
  double r_hi = 0.0;
  std::string convention;
};

/// Supremum of the normalized quantity over the positive part of the
/// trajectory. Interior maxima are refined by a parabola through the three
/// neighbouring samples.
BoundReport bound_check(const Trajectory& traj, BoundId id);

}  // namespace radlab
