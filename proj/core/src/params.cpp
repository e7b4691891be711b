#include "radlab/params.hpp"

#include <algorithm>
#include <cmath>

namespace radlab {

void validate(const ProblemParams& params) {
  if (params.N < 1) throw std::invalid_argument("N must be >= 1");
  if (!std::isfinite(params.p) || !(params.p > 1.0))
    throw std::invalid_argument("p must be a finite real > 1");
  if (!std::isfinite(params.q) || !(params.q > 1.0))
    throw std::invalid_argument("q must be a finite real > 1");
  if (!std::isfinite(params.M)) throw std::invalid_argument("M must be finite");
}

double critical_q(double p) { return 2.0 * p / (p + 1.0); }

std::optional<double> mu_star(int N, double p) {
  const double base = N - (N - 2) * p;
  if (base < 0.0) return std::nullopt;
  return (p + 1.0) * std::pow(base / (2.0 * p), p / (p + 1.0));
}

double m_dagger(int N, double p) {
  return std::pow((p - 1.0) / (p + 1.0), (p - 1.0) / (p + 1.0)) *
         std::pow(N * (p + 1.0) * (p + 1.0) / (4.0 * p), p / (p + 1.0));
}

std::array<double, 3> q_bar_quadratic(int N, double p) {
  const double D = N + 2.0 - (N - 2.0) * p;
  const double n1 = N - 1.0;
  return {n1 - D * (p + 1.0), -2.0 * p * n1 + 2.0 * p * D, n1 * p * p};
}

namespace {

std::optional<double> compute_q_bar(int N, double p, bool& ambiguous) {
  ambiguous = false;
  if (N < 3) return std::nullopt;
  const double ps = static_cast<double>(N) / (N - 2);
  const double psob = (N + 2.0) / (N - 2);
  if (!(p > ps && p < psob)) return std::nullopt;

  const auto [a, b, c] = q_bar_quadratic(N, p);
  const auto poly = [&](double x) { return (a * x + b) * x + c; };
  std::array<double, 2> roots{};
  int count = 0;
  if (a == 0.0) {
    if (b == 0.0) return std::nullopt;
    roots[count++] = -c / b;
  } else {
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return std::nullopt;
    const double s = std::sqrt(disc);
    const double t = -0.5 * (b + std::copysign(s, b));
    roots[count++] = t / a;
    if (t != 0.0) roots[count++] = c / t;
  }

  const double lo = critical_q(p);
  std::optional<double> chosen;
  for (int i = 0; i < count; ++i) {
    double x = roots[i];
    for (int it = 0; it < 3; ++it) {
      const double d = 2.0 * a * x + b;
      if (d == 0.0) break;
      x -= poly(x) / d;
    }
    if (x > lo && x < p) {
      if (chosen) {
        ambiguous = true;
        chosen = std::min(*chosen, x);
      } else {
        chosen = x;
      }
    }
  }
  return chosen;
}

}  // namespace

CriticalConstants critical_constants(const ProblemParams& params) {
  validate(params);
  const int N = params.N;
  const double p = params.p;
  const double q = params.q;

  CriticalConstants cc;
  if (N >= 3) {
    cc.p_serrin = static_cast<double>(N) / (N - 2);
    cc.p_sobolev = (N + 2.0) / (N - 2);
  }
  cc.q_crit = critical_q(p);
  cc.K = ((N - 2.0) * p - N) / (p - 1.0);
  cc.L = cc.K - 2.0 / (p - 1.0);
  cc.omega = ((p + 1.0) * q - 2.0 * p) / (p - 1.0);
  cc.omega_bar = (p - 1.0) * cc.omega / (q - 1.0);
  cc.mu_star = mu_star(N, p);
  cc.m_dagger = m_dagger(N, p);
  if (N >= 3) cc.Q_Np = 2.0 * (N - 1.0) * p / (2.0 * N + p + 1.0);
  cc.q_bar = compute_q_bar(N, p, cc.q_bar_ambiguous);

  const double gap = 2.0 * p - (p + 1.0) * q;
  if (gap > 0.0) {
    const double qp = q / (q - 1.0);
    const double base = std::pow(4.0, qp - 1.0) * std::pow(p, qp) * std::pow(N, qp);
    cc.c_amplitude = std::pow(base, -(q - 1.0) / gap);
  }
  return cc;
}

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::GradientDominant: return "GradientDominant";
    case Regime::Balanced: return "Balanced";
    case Regime::SourceDominant: return "SourceDominant";
  }
  return "?";
}

Regime regime(const ProblemParams& params, double eq_tol) {
  if (eq_tol < 0.0) throw std::invalid_argument("eq_tol must be >= 0");
  const double diff = params.q - critical_q(params.p);
  if (std::abs(diff) <= eq_tol) return Regime::Balanced;
  return diff > 0.0 ? Regime::GradientDominant : Regime::SourceDominant;
}

ScalingMap compose(const ScalingMap& first, const ScalingMap& second) {
  // u = a1 v(l1 x), v = a2 w(l2 y)  =>  u = a1 a2 w(l1 l2 x)
  ScalingMap out;
  out.amplitude_factor = first.amplitude_factor * second.amplitude_factor;
  out.length_factor = first.length_factor * second.length_factor;
  out.source_coefficient = second.source_coefficient;
  out.new_params = second.new_params;
  return out;
}

namespace {

ScalingMap single_step(const ProblemParams& params, double source, ScalingKind kind,
                       double k) {
  const double p = params.p;
  const double q = params.q;
  ScalingMap m;
  m.new_params = params;
  m.source_coefficient = source;
  switch (kind) {
    case ScalingKind::Tk: {
      if (!(k > 0.0)) throw std::invalid_argument("k must be > 0");
      // v(x) = k^{2/(p-1)} u(kx)
      m.amplitude_factor = std::pow(k, -2.0 / (p - 1.0));
      m.length_factor = 1.0 / k;
      m.new_params.M = params.M * std::pow(k, (2.0 * p - q * (p + 1.0)) / (p - 1.0));
      break;
    }
    case ScalingKind::Sk: {
      if (!(k > 0.0)) throw std::invalid_argument("k must be > 0");
      // v(x) = k^{(2-q)/(q-1)} u(kx)
      m.amplitude_factor = std::pow(k, -(2.0 - q) / (q - 1.0));
      m.length_factor = 1.0 / k;
      m.source_coefficient = source * std::pow(k, (q - p * (2.0 - q)) / (q - 1.0));
      break;
    }
    case ScalingKind::NormalizeM: {
      if (source != 1.0)
        throw NotApplicable("NormalizeM requires a unit source coefficient");
      const double gap = (p + 1.0) * q - 2.0 * p;
      if (params.M == 0.0 || std::abs(gap) <= kBalancedTolerance)
        throw NotApplicable("not reducible: needs M != 0 and q != 2p/(p+1)");
      const double a = std::pow(std::abs(params.M), -2.0 / gap);
      m.amplitude_factor = a;
      m.length_factor = std::pow(a, (p - 1.0) / 2.0);
      m.new_params.M = params.M > 0.0 ? 1.0 : -1.0;
      break;
    }
  }
  return m;
}

}  // namespace

ScalingMap apply_scaling(const ProblemParams& params, ScalingKind kind, double k) {
  validate(params);
  return single_step(params, 1.0, kind, k);
}

ScalingMap apply_scaling(const ScalingMap& prior, ScalingKind kind, double k) {
  return compose(prior, single_step(prior.new_params, prior.source_coefficient, kind, k));
}

IntegralMethodCheck integral_method_check(int N, double p, double m, double d) {
  IntegralMethodCheck c;
  c.distinct = d != m + 2.0;
  c.d_lower = 2.0 * (N - 1.0) * p / (N + 2.0) < d;
  const double m_lo = std::max({-2.0, 1.0 - p, ((N - 4.0) * p - N) / 2.0});
  c.m_window = m_lo < m && m <= 0.0;
  c.quadratic = 2.0 * (N - m) * d - (N - 1.0) * (m * m + d * d) > 0.0;
  return c;
}

std::pair<double, double> integral_method_params(int N, double p) {
  if (N < 3) throw std::invalid_argument("integral_method_params needs N >= 3");
  if (!(p > 1.0 && p < (N + 2.0) / (N - 2.0)))
    throw std::invalid_argument("integral_method_params needs 1 < p < (N+2)/(N-2)");

  const double m_lo = std::max({-2.0, 1.0 - p, ((N - 4.0) * p - N) / 2.0});
  const double d_lo = 2.0 * (N - 1.0) * p / (N + 2.0);
  // The quadratic constraint forces d < 2(N-m)/(N-1) <= 2(N-m_lo)/(N-1).
  const double d_hi = 2.0 * (N - m_lo) / (N - 1.0);

  // Smallest normalized slack over the four constraints; > 0 iff feasible.
  const auto margin = [&](double m, double d) {
    const double s1 = std::abs(d - m - 2.0);
    const double s2 = d - d_lo;
    const double s3 = m - m_lo;  // m <= 0 is inclusive and enforced by the grid
    const double s4 = (2.0 * (N - m) * d - (N - 1.0) * (m * m + d * d)) / (N * N);
    return std::min({s1, s2, s3, s4});
  };

  constexpr int kGrid = 101;
  double best_m = 0.0, best_d = 0.0, best = -kInfinity;
  for (int i = 0; i < kGrid; ++i) {
    const double m = m_lo * (1.0 - double(i) / (kGrid - 1));  // exactly 0 at the top
    for (int j = 0; j < kGrid; ++j) {
      const double d = d_lo + (d_hi - d_lo) * j / (kGrid - 1);
      const double g = margin(m, d);
      if (g > best) {
        best = g;
        best_m = m;
        best_d = d;
      }
    }
  }

  double hm = (0.0 - m_lo) / (kGrid - 1);
  double hd = (d_hi - d_lo) / (kGrid - 1);
  for (int round = 0; round < 20; ++round) {
    const double cm = best_m, cd = best_d;
    for (int i = -5; i <= 5; ++i) {
      for (int j = -5; j <= 5; ++j) {
        const double m = std::min(0.0, cm + hm * i / 5.0);
        const double d = cd + hd * j / 5.0;
        const double g = margin(m, d);
        if (g > best) {
          best = g;
          best_m = m;
          best_d = d;
        }
      }
    }
    hm *= 0.5;
    hd *= 0.5;
  }

  if (!integral_method_check(N, p, best_m, best_d).all())
    throw std::runtime_error("integral_method_params: no feasible (m, d) found");
  return {best_m, best_d};
}

}  // namespace radlab
