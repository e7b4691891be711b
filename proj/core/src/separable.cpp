#include "radlab/separable.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace radlab {

namespace {

void require_critical(const ProblemParams& P) {
  validate(P);
  if (std::abs(P.q - critical_q(P.p)) > kCriticalQTolerance)
    throw NotApplicable("constant separable solutions need q = 2p/(p+1)");
}

double k_const(const ProblemParams& P) { return ((P.N - 2.0) * P.p - P.N) / (P.p - 1.0); }

double f_raw(double X, const ProblemParams& P) {
  const double p = P.p;
  return std::pow(X, p - 1.0) + P.M * separable_coefficient(p) * std::pow(X, (p - 1.0) / (p + 1.0)) -
         2.0 * k_const(P) / (p - 1.0);
}

double fp_raw(double X, const ProblemParams& P) {
  const double p = P.p;
  return (p - 1.0) * std::pow(X, p - 2.0) +
         P.M * (p - 1.0) / (p + 1.0) * separable_coefficient(p) * std::pow(X, -2.0 / (p + 1.0));
}

/// Root of f on [lo, hi] with f(lo), f(hi) of opposite signs: geometric
/// bisection, then a guarded Newton polish.
double bracketed_root(const ProblemParams& P, double lo, double hi) {
  double flo = f_raw(lo, P);
  for (int it = 0; it < 400 && hi / lo - 1.0 > 1e-15; ++it) {
    const double mid = std::sqrt(lo * hi);
    const double fm = f_raw(mid, P);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double x = std::sqrt(lo * hi);
  double fx = f_raw(x, P);
  for (int it = 0; it < 4; ++it) {
    const double d = fp_raw(x, P);
    if (d == 0.0 || !std::isfinite(d)) break;
    const double xn = x - fx / d;
    if (!(xn >= lo && xn <= hi)) break;
    const double fn = f_raw(xn, P);
    if (!(std::abs(fn) < std::abs(fx))) break;
    x = xn;
    fx = fn;
  }
  return x;
}

/// Move lo toward 0 until f(lo) has the requested sign.
double lower_end(const ProblemParams& P, double start, bool want_positive) {
  double lo = start;
  for (int it = 0; it < 60; ++it) {
    const double f = f_raw(lo, P);
    if ((f > 0.0) == want_positive && f != 0.0) return lo;
    lo *= 1e-6;
    if (lo < 1e-300) break;
  }
  throw std::runtime_error("could not bracket constant solution near 0");
}

double upper_end(const ProblemParams& P, double start) {
  double hi = start;
  for (int it = 0; it < 2000; ++it) {
    if (f_raw(hi, P) > 0.0) return hi;
    hi *= 2.0;
  }
  throw std::runtime_error("could not bracket constant solution from above");
}

}  // namespace

ProblemParams at_critical_q(int N, double p, double M) { return {N, p, critical_q(p), M}; }

double separable_coefficient(double p) { return std::pow(2.0 / (p - 1.0), 2.0 * p / (p + 1.0)); }

double f_M(double X, const ProblemParams& P) {
  require_critical(P);
  if (!(X > 0.0)) throw std::domain_error("f_M: X must be > 0");
  return f_raw(X, P);
}

double f_M_prime(double X, const ProblemParams& P) {
  require_critical(P);
  if (!(X > 0.0)) throw std::domain_error("f_M_prime: X must be > 0");
  return fp_raw(X, P);
}

double minimizer_X0(const ProblemParams& P) {
  require_critical(P);
  if (!(P.M < 0.0)) throw NotApplicable("f_M has an interior minimum only for M < 0");
  const double p = P.p;
  return std::pow(-P.M / (p + 1.0), (p + 1.0) / (p * (p - 1.0))) *
         std::pow(2.0 / (p - 1.0), 2.0 / (p - 1.0));
}

std::string_view to_string(RootCase c) {
  switch (c) {
    case RootCase::UniqueRoot_Mpos: return "UniqueRoot_Mpos";
    case RootCase::UniqueRoot_Mneg: return "UniqueRoot_Mneg";
    case RootCase::NoRoot: return "NoRoot";
    case RootCase::DoubleRoot: return "DoubleRoot";
    case RootCase::TwoRoots: return "TwoRoots";
  }
  return "?";
}

double root_residual(double X, const ProblemParams& P) {
  return std::abs(f_M(X, P)) / std::max(1.0, std::pow(X, P.p - 1.0));
}

ConstantSolutionSet solve_constant_solutions(const ProblemParams& P) {
  require_critical(P);
  const double p = P.p;
  const double K = k_const(P);
  ConstantSolutionSet out;
  if (P.M < 0.0) out.X0 = minimizer_X0(P);

  // p = N/(N-2) within roundoff behaves as K = 0.
  const bool k_zero = std::abs(K) <= 1e-14 * std::max(1.0, std::abs(P.N / (P.p - 1.0)));

  if (K > 0.0 && !k_zero) {
    if (P.M >= 0.0) {
      out.case_tag = RootCase::UniqueRoot_Mpos;
      const double hi = upper_end(P, std::pow(2.0 * K / (p - 1.0), 1.0 / (p - 1.0)) + 1.0);
      const double lo = lower_end(P, 1e-3 * std::min(1.0, hi), false);
      out.roots.push_back(bracketed_root(P, lo, hi));
    } else {
      out.case_tag = RootCase::UniqueRoot_Mneg;
      const double x0 = *out.X0;
      out.roots.push_back(bracketed_root(P, x0, upper_end(P, 2.0 * x0 + 1.0)));
    }
    return out;
  }

  if (P.M >= 0.0) {
    out.case_tag = RootCase::NoRoot;
    return out;
  }
  const double x0 = *out.X0;
  if (k_zero) {
    out.case_tag = RootCase::UniqueRoot_Mneg;
    out.roots.push_back(bracketed_root(P, x0, upper_end(P, 2.0 * x0 + 1.0)));
    return out;
  }

  const double ms = *mu_star(P.N, p);
  const double gap = (P.M + ms) / ms;
  if (std::abs(gap) <= kDoubleRootTolerance) {
    out.case_tag = RootCase::DoubleRoot;
    out.roots.push_back(x0);
    return out;
  }
  if (gap > 0.0) {
    out.case_tag = RootCase::NoRoot;
    return out;
  }
  out.case_tag = RootCase::TwoRoots;
  if (!(f_raw(x0, P) < 0.0)) {
    // Within roundoff of the merge point.
    out.roots = {x0, x0};
    return out;
  }
  out.roots.push_back(bracketed_root(P, lower_end(P, 0.5 * x0, true), x0));
  out.roots.push_back(bracketed_root(P, x0, upper_end(P, 2.0 * x0 + 1.0)));
  return out;
}

double phi(double M, const ProblemParams& params) {
  ProblemParams P = params;
  P.M = M;
  const auto set = solve_constant_solutions(P);
  if (set.roots.size() != 1 || set.case_tag == RootCase::DoubleRoot)
    throw NotApplicable("phi needs a unique constant solution");
  return 2.0 * k_const(P) / (P.p - 1.0) - std::pow(set.roots[0], P.p - 1.0);
}

double phi_j(double M, int j, const ProblemParams& params) {
  if (j != 1 && j != 2) throw std::invalid_argument("root index must be 1 or 2");
  ProblemParams P = params;
  P.M = M;
  const auto set = solve_constant_solutions(P);
  if (set.case_tag != RootCase::TwoRoots && set.case_tag != RootCase::DoubleRoot)
    throw NotApplicable("phi_j needs the two-root regime");
  const double X = set.case_tag == RootCase::DoubleRoot ? set.roots[0] : set.roots[j - 1];
  return 2.0 * k_const(P) / (P.p - 1.0) - std::pow(X, P.p - 1.0);
}

double eigenvalue(int k, int N) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  return static_cast<double>(k) * (k + N - 2.0);
}

namespace {

/// Bisection over M for a monotone g with g(lo) and g(hi) on opposite sides
/// of target.
double bisect_M(const std::function<double(double)>& g, double lo, double hi, double target) {
  const bool increasing_side = g(lo) < target;  // g(lo) below target
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if ((g(mid) < target) == increasing_side)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::optional<BifurcationPoint> bifurcation_point(int k, const ProblemParams& params,
                                                  BifurcationBranch branch) {
  require_critical(params);
  const double p = params.p;
  const double K = k_const(params);
  BifurcationPoint bp;
  bp.k = k;
  bp.lambda_k = eigenvalue(k, params.N);
  bp.target = (p + 1.0) * (2.0 * K - bp.lambda_k) / (p * (p - 1.0));
  const double T = bp.target;
  const double top = 2.0 * K / (p - 1.0);

  ProblemParams P = params;
  if (branch == BifurcationBranch::Auto)
    branch = K < 0.0 ? BifurcationBranch::Phi2 : BifurcationBranch::Auto;

  if (branch == BifurcationBranch::Auto) {
    if (!(T < top)) return std::nullopt;
    if (K > 0.0 && std::abs(T) <= 1e-14 * std::max(1.0, top)) {
      bp.M_k = 0.0;
    } else if (T > 0.0) {
      if (!(K > 0.0)) return std::nullopt;
      double hi = 1.0;
      while (phi(hi, P) < T) hi *= 2.0;
      bp.M_k = bisect_M([&](double m) { return phi(m, P); }, 0.0, hi, T);
    } else {
      double lo = -1.0;
      while (phi(lo, P) > T) lo *= 2.0;
      // g(lo) < T <= g(0^-): evaluate strictly inside (lo, 0).
      double hi = lo;
      while (hi < -1e-300 && phi(hi, P) < T) hi *= 0.5;
      if (!(hi < 0.0)) hi = -1e-300;
      bp.M_k = bisect_M([&](double m) { return phi(m, P); }, lo, hi, T);
    }
  } else {
    if (!(K < 0.0)) throw NotApplicable("Phi_1 / Phi_2 need p < N/(N-2)");
    const double ms = *mu_star(params.N, p);
    const double merge = 2.0 * K * (p + 1.0) / (p * (p - 1.0));
    const int j = branch == BifurcationBranch::Phi1 ? 1 : 2;
    if (j == 1 && !(T >= merge && T < top)) return std::nullopt;
    if (j == 2 && !(T <= merge)) return std::nullopt;
    const double hi = -ms * (1.0 + 4.0 * kDoubleRootTolerance);
    const auto g = [&](double m) { return phi_j(m, j, P); };
    double lo = 2.0 * hi;
    if (j == 2) {
      while (g(lo) > T) lo *= 2.0;
    } else {
      while (g(lo) < T) lo *= 2.0;
    }
    bp.M_k = bisect_M(g, lo, hi, T);
    bp.root_index = j;
  }

  P.M = bp.M_k;
  const auto set = solve_constant_solutions(P);
  if (set.roots.empty()) return std::nullopt;
  bp.X_at_Mk = bp.root_index == 1 ? set.roots.front() : set.roots.back();
  if (const auto ms = mu_star(params.N, p)) bp.below_minus_mu_star = bp.M_k < -*ms;
  bp.root_residual = std::abs(f_raw(bp.X_at_Mk, P));
  bp.bifurcation_residual =
      std::abs(bp.M_k * separable_coefficient(p) * std::pow(bp.X_at_Mk, (p - 1.0) / (p + 1.0)) - T);
  return bp;
}

BranchExistence branch_exists(int k, const ProblemParams& params) {
  require_critical(params);
  const double p = params.p;
  const double K = k_const(params);
  const double lambda = eigenvalue(k, params.N);
  BranchExistence b;
  if (K < 0.0) {
    b.negative_M = true;
    b.from_larger_root = true;
    b.reason = "p < N/(N-2): target lies below the merge value, reached by the larger root only";
    return b;
  }
  const double T = (p + 1.0) * (2.0 * K - lambda) / (p * (p - 1.0));
  if (K > 0.0 && T >= 0.0) {
    b.nonnegative_M = true;
    b.reason = "2K >= lambda_k: branch at M >= 0";
  } else {
    b.negative_M = true;
    b.reason = "2K < lambda_k: branch at M < 0";
  }
  return b;
}

std::optional<std::pair<double, double>> exterior_roots(double p, double M) {
  const ProblemParams P = at_critical_q(1, p, M);
  const auto set = solve_constant_solutions(P);
  if (set.case_tag == RootCase::DoubleRoot) return std::pair{set.roots[0], set.roots[0]};
  if (set.case_tag != RootCase::TwoRoots) return std::nullopt;
  return std::pair{set.roots[0], set.roots[1]};
}

AsymptoticReport asymptotic_check(const ProblemParams& params, double M_large) {
  if (!(std::abs(M_large) >= 100.0)) throw std::invalid_argument("asymptotic check needs |M| >= 100");
  ProblemParams P = params;
  P.M = M_large;
  const double p = P.p;
  const double K = k_const(P);
  const auto set = solve_constant_solutions(P);
  AsymptoticReport rep;
  rep.M = M_large;
  rep.case_tag = set.case_tag;
  if (set.roots.empty()) return rep;

  const auto small_pred = [&] {
    return (p - 1.0) / 2.0 * std::pow(K / M_large, (p + 1.0) / (p - 1.0));
  };
  const double large_pred = std::pow(2.0 / (p - 1.0), 2.0 / (p - 1.0)) *
                            std::pow(std::abs(M_large), (p + 1.0) / (p * (p - 1.0)));
  if (M_large > 0.0 && K > 0.0) rep.small_root_ratio = set.roots[0] / small_pred();
  if (M_large < 0.0) {
    rep.large_root_ratio = set.roots.back() / large_pred;
    if (K < 0.0 && set.roots.size() == 2) rep.small_root_ratio = set.roots[0] / small_pred();
    if (K > 0.0) {
      const double a = std::pow(2.0 * K / (p - 1.0), 1.0 / (p - 1.0));
      rep.sandwich_lo = std::max(a, large_pred);
      rep.sandwich_hi = std::pow(2.0, 2.0 / (p - 1.0)) * (a + large_pred);
      rep.sandwich_holds = set.roots[0] >= *rep.sandwich_lo && set.roots[0] <= *rep.sandwich_hi;
    }
  }
  return rep;
}

}  // namespace radlab
