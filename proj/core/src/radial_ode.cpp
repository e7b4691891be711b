#include "radlab/radial_ode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "radlab/detail/dopri5.hpp"

namespace radlab {

using detail::Vec;

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
    throw std::invalid_argument("integrator tolerances must be > 0");
  if (!(r0 > 0.0) || !(r0 < r_max) || !std::isfinite(r_max))
    throw std::invalid_argument("need 0 < r0 < r_max < inf");
  if (max_steps == 0) throw std::invalid_argument("max_steps must be > 0");
  if (zero_threshold && !(*zero_threshold > 0.0))
    throw std::invalid_argument("zero_threshold must be > 0");
  if (blowup_threshold && !(*blowup_threshold > 0.0))
    throw std::invalid_argument("blowup_threshold must be > 0");
  if (max_step && !(*max_step > 0.0)) throw std::invalid_argument("max_step must be > 0");
  for (std::size_t i = 0; i < output_radii.size(); ++i) {
    if (!(output_radii[i] > r0))
      throw std::invalid_argument("output radii must exceed r0");
    if (i > 0 && !(output_radii[i] > output_radii[i - 1]))
      throw std::invalid_argument("output radii must be strictly increasing");
  }
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::UZero: return "u_zero";
    case EventKind::DuZero: return "du_zero";
    case EventKind::BlowUp: return "blow_up";
    case EventKind::Horizon: return "horizon";
  }
  return "?";
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::UZero: return "u_zero";
    case Termination::DuZero: return "du_zero";
    case Termination::BlowUp: return "blow_up";
    case Termination::NonFinite: return "non_finite";
    case Termination::Horizon: return "horizon";
    case Termination::StepBudget: return "step_budget";
    case Termination::StepUnderflow: return "step_underflow";
    case Termination::SeriesStartInvalid: return "series_start_invalid";
  }
  return "?";
}

ClassTag tag_of(const Classification& c) { return static_cast<ClassTag>(c.index()); }

std::string_view to_string(ClassTag tag) {
  switch (tag) {
    case ClassTag::Crossing: return "Crossing";
    case ClassTag::PositiveMinimum: return "PositiveMinimum";
    case ClassTag::GroundStateCandidate: return "GroundStateCandidate";
    case ClassTag::BlowUp: return "BlowUp";
    case ClassTag::Undetermined: return "Undetermined";
  }
  return "?";
}

std::optional<double> event_radius(const Classification& c) {
  if (const auto* x = std::get_if<Crossing>(&c)) return x->r_cross;
  if (const auto* x = std::get_if<PositiveMinimum>(&c)) return x->r_min;
  if (const auto* x = std::get_if<BlowUp>(&c)) return x->r_blow;
  return std::nullopt;
}

namespace {

inline double signed_power(double x, double e) {
  return std::copysign(std::pow(std::abs(x), e), x);
}

inline double source_term(double u, double p) { return signed_power(u, p); }

}  // namespace

std::pair<double, double> rhs(const RadialState& s, const ProblemParams& params) {
  if (!(s.r > 0.0)) throw std::domain_error("rhs: r must be > 0 (use series_start at the origin)");
  const double ddu = -((params.N - 1.0) / s.r) * s.du - source_term(s.u, params.p) -
                     params.M * std::pow(std::abs(s.du), params.q);
  return {s.du, ddu};
}

RadialState series_start(double a, double r0, const ProblemParams& params) {
  const double ap = std::pow(a, params.p);
  return {r0, a - ap * r0 * r0 / (2.0 * params.N), -ap * r0 / params.N};
}

double exact_aubin_talenti(double r, double lambda, int N) {
  if (N < 3) throw std::invalid_argument("exact_aubin_talenti needs N >= 3");
  return std::pow(N * (N - 2.0) * lambda, (N - 2.0) / 4.0) /
         std::pow(lambda + r * r, (N - 2.0) / 2.0);
}

double exact_singular(double r, double X, double p) {
  if (!(r > 0.0)) throw std::domain_error("exact_singular: r must be > 0");
  return X * std::pow(r, -2.0 / (p - 1.0));
}

double ode_relative_residual(const RadialState& s, double ddu, const ProblemParams& params) {
  const double t1 = ddu;
  const double t2 = (params.N - 1.0) / s.r * s.du;
  const double t3 = source_term(s.u, params.p);
  const double t4 = params.M * std::pow(std::abs(s.du), params.q);
  const double scale = std::abs(t1) + std::abs(t2) + std::abs(t3) + std::abs(t4);
  const double res = t1 + t2 + t3 + t4;
  return scale > 0.0 ? std::abs(res) / scale : std::abs(res);
}

double singular_profile_residual(double r, double X, const ProblemParams& params) {
  const double b = 2.0 / (params.p - 1.0);
  const double u = X * std::pow(r, -b);
  const double du = -b * X * std::pow(r, -b - 1.0);
  const double ddu = b * (b + 1.0) * X * std::pow(r, -b - 2.0);
  return ode_relative_residual({r, u, du}, ddu, params);
}

Classification classify(const Trajectory& traj, const IntegratorConfig& cfg) {
  const double blow = traj.blowup_threshold > 0.0 ? traj.blowup_threshold
                                                  : cfg.blowup_threshold_for(traj.a);
  const double delta =
      traj.zero_threshold > 0.0 ? traj.zero_threshold : cfg.zero_threshold_for(traj.a);

  const auto find_event = [&](EventKind k) -> const Event* {
    for (const auto& e : traj.events)
      if (e.kind == k) return &e;
    return nullptr;
  };

  const auto& s = traj.samples;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& cur = s[i];
    if (!std::isfinite(cur.u) || !std::isfinite(cur.du) || std::abs(cur.u) > blow ||
        std::abs(cur.du) > blow) {
      if (const auto* e = find_event(EventKind::BlowUp)) return BlowUp{e->r};
      return BlowUp{cur.r};
    }
    if (i == 0) continue;
    const auto& prev = s[i - 1];
    if (cur.u <= 0.0 && prev.u > 0.0) {
      if (const auto* e = find_event(EventKind::UZero)) return Crossing{e->r};
      const double w = prev.u / (prev.u - cur.u);
      return Crossing{prev.r + w * (cur.r - prev.r)};
    }
    if (prev.du < 0.0 && cur.du >= 0.0 && cur.u > 0.0) {
      if (const auto* e = find_event(EventKind::DuZero)) {
        // value_hi carries u at the located minimum.
        return PositiveMinimum{e->r, e->value_hi};
      }
      const double w = -prev.du / (cur.du - prev.du);
      return PositiveMinimum{prev.r + w * (cur.r - prev.r), prev.u + w * (cur.u - prev.u)};
    }
  }

  // Events located between output samples.
  if (const auto* e = find_event(EventKind::UZero)) return Crossing{e->r};
  if (const auto* e = find_event(EventKind::DuZero)) return PositiveMinimum{e->r, e->value_hi};
  if (const auto* e = find_event(EventKind::BlowUp)) return BlowUp{e->r};
  if (traj.termination == Termination::BlowUp || traj.termination == Termination::NonFinite)
    return BlowUp{s.empty() ? 0.0 : s.back().r};

  if (traj.termination != Termination::Horizon || s.empty()) return Undetermined{};
  for (const auto& x : s)
    if (!(x.u > 0.0) || !(x.du < 0.0)) return Undetermined{};
  const auto& last = s.back();
  if (!(last.u < delta)) return Undetermined{};
  return GroundStateCandidate{-last.r * last.du / last.u};
}

namespace {

using State = Vec<2>;

State to_vec(const RadialState& s) { return {s.u, s.du}; }

/// Bisect g on the dense output of `step` over [lo, hi] where g changes sign.
template <class G>
Event locate(const detail::Dopri5Step<2>& step, EventKind kind, double lo, double hi, G g,
             double tol) {
  double glo = g(step.at(lo));
  double ghi = g(step.at(hi));
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(step.at(mid));
    if ((gm > 0.0) == (glo > 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
      ghi = gm;
    }
  }
  Event e;
  e.kind = kind;
  e.r = 0.5 * (lo + hi);
  e.r_lo = lo;
  e.r_hi = hi;
  e.value_lo = glo;
  e.value_hi = ghi;
  return e;
}

}  // namespace

Trajectory integrate(const ProblemParams& params, double a, const IntegratorConfig& cfg) {
  validate(params);
  cfg.validate();
  if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("amplitude a must be > 0");

  Trajectory traj;
  traj.params = params;
  traj.a = a;
  traj.zero_threshold = cfg.zero_threshold_for(a);
  traj.blowup_threshold = cfg.blowup_threshold_for(a);
  traj.r_max = cfg.r_max;

  const detail::StepTolerance tol{cfg.rel_tol, cfg.abs_tol};
  const double h_max = cfg.max_step_value();
  const double event_tol = cfg.abs_tol;
  const double blow = traj.blowup_threshold;

  const auto f = [&](double r, const State& y) -> State {
    const auto [du, ddu] = rhs({r, y[0], y[1]}, params);
    return {du, ddu};
  };

  RadialState start = series_start(a, cfg.r0, params);
  traj.samples.push_back(start);
  // The truncated series is only trustworthy while its correction is small;
  // otherwise r0 lies many length scales a^{-(p-1)/2} away from the origin.
  if (!(a - start.u <= kSeriesStartLimit * a)) {
    traj.termination = Termination::SeriesStartInvalid;
    return traj;
  }

  double r = cfg.r0;
  State y = to_vec(start);
  State fy = f(r, y);
  double h = std::min(detail::initial_step<2>(y, fy, tol, cfg.r_max - r), h_max);
  std::size_t next_out = 0;
  const bool dense_mode = !cfg.output_radii.empty();

  detail::Dopri5Step<2> step;
  traj.termination = Termination::StepBudget;
  while (traj.steps < cfg.max_steps) {
    const double remaining = cfg.r_max - r;
    if (h >= remaining) h = remaining;
    if (h < 1e-14 * std::max(1.0, r)) {
      traj.termination = Termination::StepUnderflow;
      break;
    }
    const bool finite = detail::dopri5_attempt<2>(f, r, y, fy, h, tol, step);
    if (!finite) {
      // Shrink and retry; if the step is already tiny the solution has left
      // the representable range.
      if (h < 1e-12 * std::max(1.0, r)) {
        traj.termination = Termination::NonFinite;
        Event e;
        e.kind = EventKind::BlowUp;
        e.r = e.r_lo = e.r_hi = r;
        traj.events.push_back(e);
        break;
      }
      h *= 0.25;
      continue;
    }
    if (step.error > 1.0) {
      h *= std::max(0.2, detail::dopri5_step_factor(step.error));
      continue;
    }
    ++traj.steps;
    const double r1 = r + h;
    const State& y1 = step.y1;

    std::optional<Event> ev;
    Termination term = Termination::Horizon;
    if (y[0] > 0.0 && y1[0] <= 0.0) {
      ev = locate(step, EventKind::UZero, r, r1, [](const State& s) { return s[0]; }, event_tol);
      term = Termination::UZero;
    } else if (y[1] < 0.0 && y1[1] >= 0.0) {
      Event e = locate(step, EventKind::DuZero, r, r1, [](const State& s) { return s[1]; },
                       event_tol);
      const double u_at = step.at(e.r)[0];
      if (u_at > 0.0) {
        e.value_hi = u_at;  // u at the minimum (du value is ~0 there)
        ev = e;
        term = Termination::DuZero;
      }
    }
    if (!ev && (std::abs(y1[0]) > blow || std::abs(y1[1]) > blow)) {
      const auto g = [blow](const State& s) {
        return std::max(std::abs(s[0]), std::abs(s[1])) - blow;
      };
      ev = locate(step, EventKind::BlowUp, r, r1, g, event_tol);
      term = Termination::BlowUp;
    }

    const double r_stop = ev ? ev->r : r1;
    if (dense_mode) {
      while (next_out < cfg.output_radii.size() && cfg.output_radii[next_out] <= r_stop) {
        const double ro = cfg.output_radii[next_out++];
        const State yo = ro >= r1 ? y1 : step.at(ro);
        traj.samples.push_back({ro, yo[0], yo[1]});
      }
    } else {
      traj.samples.push_back({r1, y1[0], y1[1]});
    }

    if (ev) {
      traj.events.push_back(*ev);
      traj.termination = term;
      break;
    }

    r = r1;
    y = y1;
    fy = step.f1;
    if (r >= cfg.r_max) {
      traj.termination = Termination::Horizon;
      Event e;
      e.kind = EventKind::Horizon;
      e.r = e.r_lo = e.r_hi = r;
      traj.events.push_back(e);
      break;
    }
    h = std::min(h * detail::dopri5_step_factor(step.error), h_max);
  }

  traj.classification = classify(traj, cfg);
  return traj;
}

}  // namespace radlab
