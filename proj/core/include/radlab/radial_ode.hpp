#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "radlab/params.hpp"

namespace radlab {

struct RadialState {
  double r = 0.0;
  double u = 0.0;
  double du = 0.0;
};

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double r0 = 1e-3;  // series hand-off radius
  double r_max = 100.0;
  std::size_t max_steps = 1'000'000;
  /// Absolute decay threshold for GroundStateCandidate; default 0.25 * a.
  std::optional<double> zero_threshold;
  /// Magnitude of u or u' treated as blow-up; default 1e8 * a.
  std::optional<double> blowup_threshold;
  /// Largest accepted step; default (r_max - r0) / 2000.
  std::optional<double> max_step;
  /// When non-empty, samples are r0 followed by these radii (dense output)
  /// instead of every accepted step. Must be increasing.
  std::vector<double> output_radii;

  static constexpr double kDefaultZeroFraction = 0.25;
  static constexpr double kDefaultBlowupFactor = 1e8;

  double zero_threshold_for(double a) const {
    return zero_threshold ? *zero_threshold : kDefaultZeroFraction * a;
  }
  double blowup_threshold_for(double a) const {
    return blowup_threshold ? *blowup_threshold : kDefaultBlowupFactor * a;
  }
  double max_step_value() const { return max_step ? *max_step : (r_max - r0) / 2000.0; }

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

enum class EventKind { UZero, DuZero, BlowUp, Horizon };

std::string_view to_string(EventKind kind);

/// A located event. For sign-change events [r_lo, r_hi] is the final
/// bisection bracket and value_lo/value_hi the bracketed function values.
struct Event {
  EventKind kind = EventKind::Horizon;
  double r = 0.0;
  double r_lo = 0.0;
  double r_hi = 0.0;
  double value_lo = 0.0;
  double value_hi = 0.0;
};

enum class Termination {
  UZero,
  DuZero,
  BlowUp,
  NonFinite,
  Horizon,
  StepBudget,
  StepUnderflow,
  SeriesStartInvalid,  // a^p r0^2/(2N) exceeds kSeriesStartLimit * a; use a smaller r0
};

/// Largest relative drop a - u(r0) accepted from the Taylor start.
inline constexpr double kSeriesStartLimit = 1e-4;

std::string_view to_string(Termination t);

struct Crossing {
  double r_cross = 0.0;
};
struct PositiveMinimum {
  double r_min = 0.0;
  double u_min = 0.0;
};
/// decay_estimate is the local log-slope -r u'/u at the horizon.
struct GroundStateCandidate {
  double decay_estimate = 0.0;
};
struct BlowUp {
  double r_blow = 0.0;
};
struct Undetermined {};

using Classification =
    std::variant<Crossing, PositiveMinimum, GroundStateCandidate, BlowUp, Undetermined>;

enum class ClassTag { Crossing, PositiveMinimum, GroundStateCandidate, BlowUp, Undetermined };

ClassTag tag_of(const Classification& c);
std::string_view to_string(ClassTag tag);

/// Radius attached to the classification (crossing, minimum or blow-up),
/// if any.
std::optional<double> event_radius(const Classification& c);

struct Trajectory {
  ProblemParams params;
  double a = 0.0;
  std::vector<RadialState> samples;
  std::vector<Event> events;
  Classification classification = Undetermined{};
  Termination termination = Termination::Horizon;
  double zero_threshold = 0.0;
  double blowup_threshold = 0.0;
  double r_max = 0.0;
  std::size_t steps = 0;

  ClassTag tag() const { return tag_of(classification); }
};

/// (u', u'') from the radial equation. Throws std::domain_error for r <= 0.
std::pair<double, double> rhs(const RadialState& state, const ProblemParams& params);

/// Second-order Taylor start at r0: u = a - a^p r0^2/(2N), u' = -a^p r0/N.
RadialState series_start(double a, double r0, const ProblemParams& params);

Trajectory integrate(const ProblemParams& params, double a, const IntegratorConfig& cfg = {});

Classification classify(const Trajectory& traj, const IntegratorConfig& cfg);

/// Sobolev-critical bubble (N(N-2)λ)^{(N-2)/4} / (λ + r^2)^{(N-2)/2}.
double exact_aubin_talenti(double r, double lambda, int N);

/// Separable radial profile X r^{-2/(p-1)}. Throws std::domain_error for r <= 0.
double exact_singular(double r, double X, double p);

/// Relative residual of the radial equation for a state with known u''.
/// Normalized by the sum of magnitudes of all terms.
double ode_relative_residual(const RadialState& state, double ddu, const ProblemParams& params);

/// Relative residual of X r^{-2/(p-1)} at radius r, derivatives taken exactly.
double singular_profile_residual(double r, double X, const ProblemParams& params);

}  // namespace radlab
