#include "radlab/shooting.hpp"

#include <cmath>
#include <stdexcept>

#include "radlab/detail/parallel.hpp"

namespace radlab {

std::string_view to_string(ShootingVerdict v) {
  switch (v) {
    case ShootingVerdict::FoundCandidate: return "FoundCandidate";
    case ShootingVerdict::NoSignChangeInBracket: return "NoSignChangeInBracket";
    case ShootingVerdict::BudgetExhausted: return "BudgetExhausted";
  }
  return "?";
}

ShootingResult find_ground_state(const ProblemParams& params, double a_lo, double a_hi,
                                 const IntegratorConfig& cfg, const ShootingOptions& opts) {
  if (!(a_lo > 0.0) || !(a_hi > a_lo) || !std::isfinite(a_hi))
    throw std::invalid_argument("bracket must satisfy 0 < a_lo < a_hi");
  if (!(opts.a_rel_tol > 0.0)) throw std::invalid_argument("a_rel_tol must be > 0");

  ShootingResult res;
  Trajectory lo = integrate(params, a_lo, cfg);
  Trajectory hi = integrate(params, a_hi, cfg);
  ClassTag tlo = lo.tag();
  ClassTag thi = hi.tag();

  if (tlo == ClassTag::GroundStateCandidate && thi == ClassTag::GroundStateCandidate) {
    const double mid = 0.5 * (a_lo + a_hi);
    Trajectory t = integrate(params, mid, cfg);
    if (t.tag() == ClassTag::GroundStateCandidate) {
      res.a_star = mid;
      res.final_trajectory = std::move(t);
      res.verdict = ShootingVerdict::FoundCandidate;
      return res;
    }
  }
  if (tlo == thi || tlo == ClassTag::Undetermined || thi == ClassTag::Undetermined) {
    res.endpoints = {std::move(lo), std::move(hi)};
    res.verdict = ShootingVerdict::NoSignChangeInBracket;
    return res;
  }

  res.bracket_history.push_back({a_lo, a_hi, tlo, thi});
  for (std::size_t it = 0; it < opts.budget; ++it) {
    if (a_hi - a_lo <= opts.a_rel_tol * a_hi) {
      const double mid = 0.5 * (a_lo + a_hi);
      res.a_star = mid;
      res.final_trajectory = integrate(params, mid, cfg);
      res.verdict = ShootingVerdict::FoundCandidate;
      return res;
    }
    const double mid = 0.5 * (a_lo + a_hi);
    Trajectory t = integrate(params, mid, cfg);
    const ClassTag tm = t.tag();
    if (tm == ClassTag::GroundStateCandidate) {
      res.a_star = mid;
      res.final_trajectory = std::move(t);
      res.verdict = ShootingVerdict::FoundCandidate;
      return res;
    }
    if (tm == tlo) {
      a_lo = mid;
    } else {
      // Matches the upper tag, or is a third outcome: keep the lower side.
      a_hi = mid;
      thi = tm;
    }
    res.bracket_history.push_back({a_lo, a_hi, tlo, thi});
  }

  const double mid = 0.5 * (a_lo + a_hi);
  res.a_star = mid;
  res.final_trajectory = integrate(params, mid, cfg);
  res.verdict = ShootingVerdict::BudgetExhausted;
  return res;
}

DecayEstimate decay_exponent(const std::vector<RadialState>& samples, double r_lo, double r_hi) {
  if (!(r_lo > 0.0) || !(r_hi > r_lo)) throw std::invalid_argument("need 0 < r_lo < r_hi");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (const auto& s : samples) {
    if (s.r < r_lo || s.r > r_hi || !(s.u > 0.0)) continue;
    const double x = std::log(s.r);
    const double y = std::log(s.u);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 10) throw std::runtime_error("decay fit needs at least 10 positive samples in window");
  const double dn = static_cast<double>(n);
  const double den = dn * sxx - sx * sx;
  if (!(den > 0.0)) throw std::runtime_error("decay fit window is degenerate");
  const double slope = (dn * sxy - sx * sy) / den;
  const double icpt = (sy - slope * sx) / dn;

  double rss = 0.0;
  double used_lo = kInfinity, used_hi = 0.0;
  for (const auto& s : samples) {
    if (s.r < r_lo || s.r > r_hi || !(s.u > 0.0)) continue;
    const double e = std::log(s.u) - (icpt + slope * std::log(s.r));
    rss += e * e;
    used_lo = std::min(used_lo, s.r);
    used_hi = std::max(used_hi, s.r);
  }
  DecayEstimate d;
  d.gamma = -slope;
  d.r_lo = used_lo;
  d.r_hi = used_hi;
  d.fit_residual = std::sqrt(rss / dn);
  d.samples = n;
  return d;
}

DecayEstimate decay_exponent(const Trajectory& traj, double r_lo, double r_hi) {
  return decay_exponent(traj.samples, r_lo, r_hi);
}

DecayEstimate decay_exponent(const Trajectory& traj, double window_fraction) {
  if (!(window_fraction > 0.0 && window_fraction < 1.0))
    throw std::invalid_argument("window_fraction must lie in (0, 1)");
  if (traj.samples.size() < 2) throw std::runtime_error("trajectory has too few samples");
  // Stop at the last positive sample so a crossing does not end the window.
  std::size_t last = traj.samples.size() - 1;
  while (last > 0 && !(traj.samples[last].u > 0.0)) --last;
  const double r_first = traj.samples.front().r;
  const double r_last = traj.samples[last].r;
  const double l0 = std::log(r_first);
  const double l1 = std::log(r_last);
  const double r_lo = std::exp(l1 - window_fraction * (l1 - l0));
  return decay_exponent(traj.samples, r_lo, r_last);
}

double amplitude_threshold(const ProblemParams& params) {
  const auto cc = critical_constants(params);
  if (!cc.c_amplitude) throw NotApplicable("amplitude threshold needs q < 2p/(p+1)");
  if (!(params.M > 0.0)) throw NotApplicable("amplitude threshold needs M > 0");
  const double gap = 2.0 * params.p - (params.p + 1.0) * params.q;
  return *cc.c_amplitude * std::pow(params.M, 2.0 / gap);
}

GradientCap gradient_cap(const ProblemParams& params, double a) {
  validate(params);
  if (a < 0.0) throw std::invalid_argument("amplitude must be >= 0");
  GradientCap g;
  g.h_cap = std::sqrt(2.0 / (params.p + 1.0)) * std::pow(a, (params.p + 1.0) / 2.0);
  const double gap = (params.p + 1.0) * params.q - 2.0 * params.p;
  if (gap > kBalancedTolerance && params.M > 0.0)
    g.universal_shape = std::pow(params.M, -(params.p + 1.0) / gap);
  return g;
}

NonexistenceReport nonexistence_scan(const ProblemParams& params, const std::vector<double>& a_grid,
                                     const IntegratorConfig& cfg, unsigned jobs) {
  if (a_grid.empty()) throw std::invalid_argument("a_grid must be nonempty");
  validate(params);
  NonexistenceReport rep;
  rep.params = params;
  rep.outcomes.resize(a_grid.size());
  detail::parallel_for(a_grid.size(), jobs, [&](std::size_t i) {
    const Trajectory t = integrate(params, a_grid[i], cfg);
    rep.outcomes[i] = {a_grid[i], t.tag(), event_radius(t.classification), t.termination};
  });
  for (const auto& o : rep.outcomes)
    if (o.tag == ClassTag::GroundStateCandidate) ++rep.candidate_count;
  return rep;
}

std::optional<double> candidates_vanish_from(const ProblemParams& params,
                                             const std::vector<double>& M_grid,
                                             const std::vector<double>& a_grid,
                                             const IntegratorConfig& cfg, unsigned jobs) {
  std::optional<double> from;
  for (auto it = M_grid.rbegin(); it != M_grid.rend(); ++it) {
    ProblemParams pm = params;
    pm.M = *it;
    if (!nonexistence_scan(pm, a_grid, cfg, jobs).no_candidate_found()) break;
    from = *it;
  }
  return from;
}

std::vector<double> make_grid(double lo, double hi, std::size_t count, bool log_spacing) {
  if (count == 0) throw std::invalid_argument("grid count must be >= 1");
  if (log_spacing && !(lo > 0.0 && hi > 0.0))
    throw std::invalid_argument("log grid needs positive bounds");
  std::vector<double> g(count);
  if (count == 1) {
    g[0] = lo;
    return g;
  }
  for (std::size_t i = 0; i < count; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(count - 1);
    g[i] = log_spacing ? std::exp(std::log(lo) + s * (std::log(hi) - std::log(lo)))
                       : lo + s * (hi - lo);
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

}  // namespace radlab
