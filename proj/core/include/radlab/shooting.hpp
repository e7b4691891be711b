#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "radlab/params.hpp"
#include "radlab/radial_ode.hpp"

namespace radlab {

enum class ShootingVerdict { FoundCandidate, NoSignChangeInBracket, BudgetExhausted };

std::string_view to_string(ShootingVerdict v);

struct BracketRecord {
  double a_lo = 0.0;
  double a_hi = 0.0;
  ClassTag tag_lo = ClassTag::Undetermined;
  ClassTag tag_hi = ClassTag::Undetermined;
};

struct ShootingOptions {
  double a_rel_tol = 1e-10;
  std::size_t budget = 200;
};

struct ShootingResult {
  std::optional<double> a_star;
  std::vector<BracketRecord> bracket_history;
  /// Trajectory at a_star; for NoSignChangeInBracket the endpoint
  /// trajectories are in endpoints instead.
  std::optional<Trajectory> final_trajectory;
  std::vector<Trajectory> endpoints;
  ShootingVerdict verdict = ShootingVerdict::NoSignChangeInBracket;
};

/// Bisection on the initial amplitude between two differently classified
/// endpoints. A bracket whose two ends are both GroundStateCandidate is
/// reported as FoundCandidate at its midpoint.
ShootingResult find_ground_state(const ProblemParams& params, double a_lo, double a_hi,
                                 const IntegratorConfig& cfg = {},
                                 const ShootingOptions& opts = {});

struct DecayEstimate {
  double gamma = 0.0;
  double r_lo = 0.0;
  double r_hi = 0.0;
  double fit_residual = 0.0;  // RMS of log-log residuals
  std::size_t samples = 0;
};

inline constexpr double kDefaultDecayWindow = 0.4;

/// Fit u ~ C r^{-gamma} on the last window_fraction of the log-radius range.
/// Throws std::invalid_argument for a bad fraction and std::runtime_error
/// when fewer than 10 positive samples fall in the window.
DecayEstimate decay_exponent(const Trajectory& traj, double window_fraction = kDefaultDecayWindow);

/// Same fit over an explicit radius window [r_lo, r_hi].
DecayEstimate decay_exponent(const Trajectory& traj, double r_lo, double r_hi);

/// Least-squares fit on raw (r, u) samples.
DecayEstimate decay_exponent(const std::vector<RadialState>& samples, double r_lo, double r_hi);

/// Lower bound c * M^{2/(2p-(p+1)q)} on u(0) for ground states when q < q_crit
/// and M > 0. Throws NotApplicable otherwise.
double amplitude_threshold(const ProblemParams& params);

struct GradientCap {
  double h_cap = 0.0;  // sqrt(2/(p+1)) a^{(p+1)/2}
  /// M^{-(p+1)/((p+1)q-2p)}, the M-dependence of the universal gradient
  /// bound with unit constant; set only for q > q_crit, M > 0.
  std::optional<double> universal_shape;
};

GradientCap gradient_cap(const ProblemParams& params, double a);

struct AmplitudeOutcome {
  double a = 0.0;
  ClassTag tag = ClassTag::Undetermined;
  std::optional<double> r_event;
  Termination termination = Termination::Horizon;
};

struct NonexistenceReport {
  ProblemParams params;
  std::vector<AmplitudeOutcome> outcomes;  // in grid order
  std::size_t candidate_count = 0;
  bool no_candidate_found() const { return candidate_count == 0; }
};

/// Classify every amplitude in a_grid. With jobs > 1 amplitudes are
/// integrated on worker threads; results are stored in grid order.
NonexistenceReport nonexistence_scan(const ProblemParams& params, const std::vector<double>& a_grid,
                                     const IntegratorConfig& cfg = {}, unsigned jobs = 1);

/// Smallest M in an increasing M grid from which no larger grid value
/// produces a GroundStateCandidate for any amplitude in a_grid. Empty when
/// the largest M still produces one.
std::optional<double> candidates_vanish_from(const ProblemParams& params,
                                             const std::vector<double>& M_grid,
                                             const std::vector<double>& a_grid,
                                             const IntegratorConfig& cfg = {}, unsigned jobs = 1);

/// count points spaced linearly or logarithmically over [lo, hi].
std::vector<double> make_grid(double lo, double hi, std::size_t count, bool log_spacing);

}  // namespace radlab
