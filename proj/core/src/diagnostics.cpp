#include "radlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>

#include "radlab/detail/dopri5.hpp"

namespace radlab {

namespace {

inline double spow(double x, double e) { return std::copysign(std::pow(std::abs(x), e), x); }

double k_const(const ProblemParams& P) { return ((P.N - 2.0) * P.p - P.N) / (P.p - 1.0); }
double omega(const ProblemParams& P) {
  return ((P.p + 1.0) * P.q - 2.0 * P.p) / (P.p - 1.0);
}
double omega_bar(const ProblemParams& P) {
  return ((P.p + 1.0) * P.q - 2.0 * P.p) / (P.q - 1.0);
}

void require_not_q2(const ProblemParams& P) {
  if (std::abs(P.q - 2.0) <= 1e-14) throw NotApplicable("(xi, eta) variables degenerate at q = 2");
}

}  // namespace

double energy_H(const RadialState& s, const ProblemParams& P) {
  return std::pow(std::abs(s.u), P.p + 1.0) / (P.p + 1.0) + 0.5 * s.du * s.du;
}

double energy_Hprime(const RadialState& s, const ProblemParams& P) {
  if (!(s.r > 0.0)) throw std::domain_error("energy_Hprime: r must be > 0");
  return P.M * std::pow(std::abs(s.du), P.q + 1.0) - (P.N - 1.0) / s.r * s.du * s.du;
}

LogStateXY to_log_xy(const RadialState& s, const ProblemParams& P) {
  if (!(s.r > 0.0)) throw std::domain_error("to_log_xy: r must be > 0");
  return {std::log(s.r), std::pow(s.r, 2.0 / (P.p - 1.0)) * s.u,
          -std::pow(s.r, (P.p + 1.0) / (P.p - 1.0)) * s.du};
}

RadialState from_log_xy(const LogStateXY& ls, const ProblemParams& P) {
  const double r = std::exp(ls.t);
  return {r, ls.x * std::pow(r, -2.0 / (P.p - 1.0)),
          -ls.y * std::pow(r, -(P.p + 1.0) / (P.p - 1.0))};
}

LogRhs xy_rhs(const LogStateXY& ls, const ProblemParams& P) {
  LogRhs d;
  d.d1 = 2.0 * ls.x / (P.p - 1.0) - ls.y;
  d.d2 = -k_const(P) * ls.y + spow(ls.x, P.p) +
         P.M * std::exp(-omega(P) * ls.t) * spow(ls.y, P.q);
  d.negative_base = ls.y < 0.0 || ls.x < 0.0;
  return d;
}

LogStateXiEta to_log_xieta(const RadialState& s, const ProblemParams& P) {
  require_not_q2(P);
  if (!(s.r > 0.0)) throw std::domain_error("to_log_xieta: r must be > 0");
  return {std::log(s.r), std::pow(s.r, (2.0 - P.q) / (P.q - 1.0)) * s.u,
          -std::pow(s.r, 1.0 / (P.q - 1.0)) * s.du};
}

RadialState from_log_xieta(const LogStateXiEta& ls, const ProblemParams& P) {
  require_not_q2(P);
  const double r = std::exp(ls.t);
  return {r, ls.xi * std::pow(r, -(2.0 - P.q) / (P.q - 1.0)),
          -ls.eta * std::pow(r, -1.0 / (P.q - 1.0))};
}

LogRhs xieta_rhs(const LogStateXiEta& ls, const ProblemParams& P) {
  require_not_q2(P);
  LogRhs d;
  const double q = P.q;
  d.d1 = (2.0 - q) / (q - 1.0) * ls.xi - ls.eta;
  d.d2 = -((P.N - 1.0) * q - P.N) / (q - 1.0) * ls.eta +
         std::exp(omega_bar(P) * ls.t) * spow(ls.xi, P.p) + P.M * spow(ls.eta, q);
  d.negative_base = ls.eta < 0.0 || ls.xi < 0.0;
  return d;
}

double leighton_N(const LogStateXY& ls, const ProblemParams& P) {
  const double p = P.p, q = P.q;
  const double x = ls.x;
  const double w = 2.0 * x / (p - 1.0) - ls.y;
  return k_const(P) / (p - 1.0) * x * x - spow(x, p + 1.0) / (p + 1.0) -
         std::pow(2.0 / (p - 1.0), q) * P.M * std::exp(-omega(P) * ls.t) * spow(x, q + 1.0) /
             (q + 1.0) -
         0.5 * w * w;
}

double leighton_Nprime(const LogStateXY& ls, const ProblemParams& P) {
  const double p = P.p, q = P.q;
  const double x = ls.x;
  const double K = k_const(P);
  const double L = K - 2.0 / (p - 1.0);
  const double om = omega(P);
  const double e = std::exp(-om * ls.t);
  const double w = 2.0 * x / (p - 1.0) - ls.y;
  return w * (L * w - P.M * e * (spow(2.0 * x / (p - 1.0), q) - spow(ls.y, q))) +
         om * std::pow(2.0 / (p - 1.0), q) * P.M * e * spow(x, q + 1.0) / (q + 1.0);
}

std::optional<LogStateXY> xy_fixed_point(const ProblemParams& P) {
  const double K = k_const(P);
  if (!(K > 0.0)) return std::nullopt;
  const double x = std::pow(2.0 * K / (P.p - 1.0), 1.0 / (P.p - 1.0));
  return LogStateXY{0.0, x, 2.0 * x / (P.p - 1.0)};
}

std::optional<double> eta_fixed_point(const ProblemParams& P) {
  const double num = (P.N - 1.0) * P.q - P.N;
  if (!(P.M > 0.0) || !(num > 0.0)) return std::nullopt;
  return std::pow(num / ((P.q - 1.0) * P.M), 1.0 / (P.q - 1.0));
}

namespace {

using V2 = detail::Vec<2>;

/// Adaptive integration of a 2-d system with dense output at t_out.
template <class F>
std::vector<V2> integrate_plane(const F& f, double t0, V2 y, const std::vector<double>& t_out,
                                const LogTolerance& tol) {
  std::vector<V2> out;
  out.reserve(t_out.size());
  for (std::size_t i = 0; i < t_out.size(); ++i) {
    if (t_out[i] < t0) throw std::invalid_argument("output times must be >= start time");
    if (i > 0 && !(t_out[i] > t_out[i - 1]))
      throw std::invalid_argument("output times must be strictly increasing");
  }
  if (t_out.empty()) return out;

  const detail::StepTolerance st{tol.rel, tol.abs};
  const double t_end = t_out.back();
  double t = t0;
  V2 fy = f(t, y);
  std::size_t next = 0;
  while (next < t_out.size() && t_out[next] <= t) out.push_back(y), ++next;
  double h = detail::initial_step<2>(y, fy, st, t_end - t);
  detail::Dopri5Step<2> step;
  for (std::size_t it = 0; next < t_out.size(); ++it) {
    if (it > 5'000'000) throw std::runtime_error("log-system integration exceeded step budget");
    h = std::min(h, t_end - t);
    if (h < 1e-14 * std::max(1.0, std::abs(t)))
      throw std::runtime_error("log-system integration step underflow");
    if (!detail::dopri5_attempt<2>(f, t, y, fy, h, st, step)) {
      h *= 0.25;
      continue;
    }
    if (step.error > 1.0) {
      h *= std::max(0.2, detail::dopri5_step_factor(step.error));
      continue;
    }
    const double t1 = t + h;
    while (next < t_out.size() && t_out[next] <= t1) {
      out.push_back(t_out[next] >= t1 ? step.y1 : step.at(t_out[next]));
      ++next;
    }
    t = t1;
    y = step.y1;
    fy = step.f1;
    h *= detail::dopri5_step_factor(step.error);
  }
  return out;
}

}  // namespace

LogPath<LogStateXY> integrate_log_xy(const ProblemParams& P, const LogStateXY& start,
                                     const std::vector<double>& t_out, const LogTolerance& tol) {
  LogPath<LogStateXY> path;
  bool neg = false;
  const auto f = [&](double t, const V2& y) -> V2 {
    const LogRhs d = xy_rhs({t, y[0], y[1]}, P);
    neg = neg || d.negative_base;
    return {d.d1, d.d2};
  };
  const auto ys = integrate_plane(f, start.t, {start.x, start.y}, t_out, tol);
  for (std::size_t i = 0; i < ys.size(); ++i) path.states.push_back({t_out[i], ys[i][0], ys[i][1]});
  path.negative_base = neg;
  return path;
}

LogPath<LogStateXiEta> integrate_log_xieta(const ProblemParams& P, const LogStateXiEta& start,
                                           const std::vector<double>& t_out,
                                           const LogTolerance& tol) {
  require_not_q2(P);
  LogPath<LogStateXiEta> path;
  bool neg = false;
  const auto f = [&](double t, const V2& y) -> V2 {
    const LogRhs d = xieta_rhs({t, y[0], y[1]}, P);
    neg = neg || d.negative_base;
    return {d.d1, d.d2};
  };
  const auto ys = integrate_plane(f, start.t, {start.xi, start.eta}, t_out, tol);
  for (std::size_t i = 0; i < ys.size(); ++i) path.states.push_back({t_out[i], ys[i][0], ys[i][1]});
  path.negative_base = neg;
  return path;
}

void PPSParams::validate() const {
  if (!(kappa > 0.0) || !(alpha > 0.0))
    throw std::invalid_argument("PPS parameters need kappa > 0 and alpha > 0");
}

double pps_Z(const RadialState& s, const PPSParams& pp, const ProblemParams& P) {
  if (!(s.r > 0.0)) throw std::domain_error("pps_Z: r must be > 0");
  const double w = std::abs(s.du);
  return std::pow(s.r, pp.kappa) *
         (0.5 * s.du * s.du + spow(s.u, P.p + 1.0) / (P.p + 1.0) + pp.alpha * s.u * s.du / s.r -
          pp.gamma * s.u * std::pow(w, P.q));
}

double pps_U(const RadialState& s, const PPSParams& pp, const ProblemParams& P) {
  if (!(s.r > 0.0)) throw std::domain_error("pps_U: r must be > 0");
  const double N = P.N, p = P.p, q = P.q, M = P.M;
  const double k = pp.kappa, al = pp.alpha, ga = pp.gamma, th = pp.theta;
  const double r = s.r, u = s.u, du = s.du, w = std::abs(du);
  const double up1 = spow(u, p + 1.0);
  return (k / 2.0 + al + 1.0 - N) * du * du + (k / (p + 1.0) - al) * up1 +
         al * (k - N) * u * du / r + (th / (p + 1.0) - ga * q) * r * up1 * std::pow(w, q - 1.0) +
         (M + ga + th / 2.0) * r * std::pow(w, q + 1.0) +
         (((N - 1.0) * q - k) * ga - al * (th + M)) * u * std::pow(w, q) -
         ga * (th + q * M) * r * u * std::pow(w, 2.0 * q - 1.0);
}

NonexistencePPS nonexistence_pps(const ProblemParams& P) {
  const double N = P.N, p = P.p, q = P.q, M = P.M;
  NonexistencePPS c;
  c.pp.kappa = 2.0 * (p + 1.0) * (N - 1.0) / (p + 3.0);
  c.pp.alpha = c.pp.kappa / (p + 1.0);
  c.pp.gamma = -2.0 * M / (q * (p + 1.0) + 2.0);
  c.pp.theta = q * (p + 1.0) * c.pp.gamma;
  c.A = (N - 1.0) * (N + 2.0 - (N - 2.0) * p);
  c.B = 2.0 * (N - 1.0) * (p - q);
  c.C = q * (q * (p + 1.0) - 2.0 * p);
  return c;
}

FactoredU pps_U_factored(const RadialState& s, const ProblemParams& P) {
  if (!(s.r > 0.0)) throw std::domain_error("pps_U_factored: r must be > 0");
  const double p = P.p, q = P.q, M = P.M;
  const auto c = nonexistence_pps(P);
  const double w = std::abs(s.du);
  const double chi = (p + 3.0) / (2.0 + q * (p + 1.0)) * s.r * std::pow(w, q - 1.0);
  FactoredU f;
  f.value = 2.0 / ((p + 3.0) * (p + 3.0)) * (s.u * w / s.r) *
            (c.A + c.B * M * chi + c.C * M * M * chi * chi);
  f.outside_regime = !(s.du < 0.0) || !(s.u > 0.0);
  return f;
}

double pps_identity_defect(const std::vector<RadialState>& uni, const PPSParams& pp,
                           const ProblemParams& P) {
  if (uni.size() < 3) throw std::invalid_argument("need at least 3 samples");
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < uni.size(); ++i) {
    const auto& s = uni[i];
    const double dz = (pps_Z(uni[i + 1], pp, P) - pps_Z(uni[i - 1], pp, P)) /
                      (uni[i + 1].r - uni[i - 1].r);
    const double res = dz + pp.theta * std::pow(std::abs(s.du), P.q - 1.0) * pps_Z(s, pp, P) -
                       std::pow(s.r, pp.kappa - 1.0) * pps_U(s, pp, P);
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

double pps_identity_defect(const ProblemParams& P, double a, const PPSParams& pp, double r_lo,
                           double r_hi, double h, const IntegratorConfig& cfg) {
  if (!(h > 0.0) || !(r_hi > r_lo)) throw std::invalid_argument("need h > 0 and r_lo < r_hi");
  IntegratorConfig c = cfg;
  c.output_radii.clear();
  const auto n = static_cast<std::size_t>(std::llround((r_hi - r_lo) / h));
  for (std::size_t i = 0; i <= n + 2; ++i)
    c.output_radii.push_back(r_lo - h + static_cast<double>(i) * h);
  c.r_max = std::max(c.r_max, c.output_radii.back() * (1.0 + 1e-12));
  if (!(c.output_radii.front() > c.r0))
    throw std::invalid_argument("r_lo - h must exceed the series radius r0");
  const Trajectory t = integrate(P, a, c);
  std::vector<RadialState> uni(t.samples.begin() + 1, t.samples.end());
  if (uni.size() != c.output_radii.size())
    throw std::runtime_error("trajectory ended before the identity window");
  for (const auto& s : uni)
    if (!(s.u > 0.0)) throw std::runtime_error("identity window must lie where u > 0");
  return pps_identity_defect(uni, pp, P);
}

std::string_view to_string(BoundId id) {
  switch (id) {
    case BoundId::SourceDecay: return "source_decay";
    case BoundId::SourceGradient: return "source_gradient";
    case BoundId::GradientDecay: return "gradient_decay";
    case BoundId::GradientProfile: return "gradient_profile";
    case BoundId::UniversalGradient: return "universal_gradient";
    case BoundId::PuncturedDecay: return "punctured_decay";
  }
  return "?";
}

BoundId parse_bound_id(std::string_view name) {
  for (BoundId id : kAllBounds)
    if (to_string(id) == name) return id;
  throw std::invalid_argument("unknown bound id: " + std::string(name));
}

namespace {

/// Vertex value of the parabola through three points, or the middle value
/// when the points are not concave.
double parabola_peak(double x0, double y0, double x1, double y1, double x2, double y2) {
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double c2 = (d12 - d01) / (x2 - x0);
  if (!(c2 < 0.0)) return y1;
  const double c1 = d01 - c2 * (x0 + x1);
  const double xv = -c1 / (2.0 * c2);
  if (xv < x0 || xv > x2) return y1;
  const double yv = y0 + (xv - x0) * (d01 + c2 * (xv - x1));
  return std::max(y1, yv);
}

}  // namespace

BoundReport bound_check(const Trajectory& traj, BoundId id) {
  const ProblemParams& P = traj.params;
  const double N = P.N, p = P.p, q = P.q, M = P.M;
  BoundReport rep;
  rep.id = id;

  std::size_t n = 0;
  while (n < traj.samples.size() && traj.samples[n].u > 0.0 && traj.samples[n].r > 0.0) ++n;
  if (n == 0) throw std::invalid_argument("trajectory has no positive samples");
  const double r_end = event_radius(traj.classification).value_or(traj.samples[n - 1].r);

  const double c0 = std::pow(2.0 * N / (p - 1.0), 1.0 / (p - 1.0));
  const bool supercritical_source = P.N >= 3 && p > N / (N - 2.0);
  const double gnum = (q - 1.0) * (N - 1.0) - 1.0;
  const bool gradient_case = M > 0.0 && q > N / (N - 1.0);
  const double gconst = gradient_case ? std::pow(gnum / ((q - 1.0) * M), 1.0 / (q - 1.0)) : 0.0;

  std::function<double(const RadialState&)> g;
  switch (id) {
    case BoundId::SourceDecay:
    case BoundId::PuncturedDecay:
      g = [&](const RadialState& s) { return s.u * std::pow(s.r, 2.0 / (p - 1.0)); };
      break;
    case BoundId::SourceGradient:
      g = [&](const RadialState& s) {
        return std::abs(s.du) * std::pow(s.r, (p + 1.0) / (p - 1.0));
      };
      break;
    case BoundId::GradientDecay:
      g = [&](const RadialState& s) { return std::abs(s.du) * std::pow(s.r, 1.0 / (q - 1.0)); };
      break;
    case BoundId::GradientProfile:
      g = [&](const RadialState& s) { return s.u * std::pow(s.r, (2.0 - q) / (q - 1.0)); };
      break;
    case BoundId::UniversalGradient: {
      const double gap = (p + 1.0) * q - 2.0 * p;
      if (!(M > 0.0) || !(gap > 0.0))
        throw NotApplicable("universal gradient bound needs M > 0 and q > 2p/(p+1)");
      const double base = std::pow(M, -(p + 1.0) / gap);
      g = [&, base](const RadialState& s) {
        const double dist = r_end - s.r;
        const double shape =
            base + (dist > 0.0 ? std::pow(M * dist, -1.0 / (q - 1.0)) : kInfinity);
        return std::abs(s.du) / shape;
      };
      break;
    }
  }

  std::size_t imax = 0;
  std::vector<double> vals(n);
  for (std::size_t i = 0; i < n; ++i) {
    vals[i] = g(traj.samples[i]);
    if (vals[i] > vals[imax]) imax = i;
  }
  double sup = vals[imax];
  if (imax > 0 && imax + 1 < n) {
    const auto& s = traj.samples;
    sup = parabola_peak(s[imax - 1].r, vals[imax - 1], s[imax].r, vals[imax], s[imax + 1].r,
                        vals[imax + 1]);
  }
  rep.minimal_constant = std::max(0.0, sup);
  rep.r_lo = traj.samples.front().r;
  rep.r_hi = traj.samples[n - 1].r;

  switch (id) {
    case BoundId::SourceDecay:
      if (supercritical_source) rep.reference_constant = c0;
      rep.convention = "c0 = (2N/(p-1))^{1/(p-1)}; applies for N >= 3, p > N/(N-2)";
      break;
    case BoundId::SourceGradient:
      if (supercritical_source) rep.reference_constant = (N - 2.0) * c0;
      rep.convention = "(N-2) c0; applies for N >= 3, p > N/(N-2)";
      break;
    case BoundId::GradientDecay:
      if (gradient_case) rep.reference_constant = gconst;
      rep.convention = "applies for M > 0, q > N/(N-1)";
      break;
    case BoundId::GradientProfile:
      if (gradient_case && q < 2.0) rep.reference_constant = (q - 1.0) / (2.0 - q) * gconst;
      rep.convention = "applies for M > 0, N/(N-1) < q < 2";
      break;
    case BoundId::UniversalGradient:
      {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", r_end);
        rep.convention = std::string("ball of radius r_end = ") + buf +
                         ", dist = r_end - r; constant not explicit";
      }
      break;
    case BoundId::PuncturedDecay:
      rep.convention = "constant c_{N,p} not explicit";
      break;
  }
  if (rep.reference_constant) rep.satisfied = rep.minimal_constant <= *rep.reference_constant;
  return rep;
}

}  // namespace radlab
