#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "radlab/params.hpp"

namespace radlab {

// Constant separable solutions X r^{-2/(p-1)} exist only at q = 2p/(p+1),
// where X solves
//   f_M(X) = X^{p-1} + M c X^{(p-1)/(p+1)} - 2K/(p-1) = 0,
//   c = (2/(p-1))^{2p/(p+1)}.
// Functions here read N, p and M from ProblemParams and throw
// NotApplicable when q is not critical (within kCriticalQTolerance).

inline constexpr double kCriticalQTolerance = 1e-9;

/// Relative distance |M + mu*| / mu* under which M counts as -mu*.
inline constexpr double kDoubleRootTolerance = 1e-12;

/// Params (N, p, 2p/(p+1), M).
ProblemParams at_critical_q(int N, double p, double M);

/// (2/(p-1))^{2p/(p+1)}.
double separable_coefficient(double p);

double f_M(double X, const ProblemParams& params);
double f_M_prime(double X, const ProblemParams& params);

/// Minimizer of f_M for M < 0:
/// ((-M)/(p+1))^{(p+1)/(p(p-1))} (2/(p-1))^{2/(p-1)}.
double minimizer_X0(const ProblemParams& params);

enum class RootCase { UniqueRoot_Mpos, UniqueRoot_Mneg, NoRoot, DoubleRoot, TwoRoots };

std::string_view to_string(RootCase c);

struct ConstantSolutionSet {
  RootCase case_tag = RootCase::NoRoot;
  std::vector<double> roots;  // increasing
  std::optional<double> X0;   // set for M < 0
};

ConstantSolutionSet solve_constant_solutions(const ProblemParams& params);

/// |f_M(X)| / max(1, X^{p-1}).
double root_residual(double X, const ProblemParams& params);

/// Phi(M) = M c X_M^{(p-1)/(p+1)}, evaluated as 2K/(p-1) - X_M^{p-1}.
/// For a unique root. Throws NotApplicable otherwise.
double phi(double M, const ProblemParams& params);

/// Phi on root j (1 = smaller, 2 = larger) in the two-root regime.
double phi_j(double M, int j, const ProblemParams& params);

/// lambda_k = k(k+N-2).
double eigenvalue(int k, int N);

enum class BifurcationBranch { Auto, Phi1, Phi2 };

struct BifurcationPoint {
  int k = 1;
  double lambda_k = 0.0;
  double M_k = 0.0;
  double X_at_Mk = 0.0;
  double target = 0.0;        // (p+1)(2K - lambda_k)/(p(p-1))
  int root_index = 0;         // 0 unique root, 1 or 2 in the two-root regime
  bool below_minus_mu_star = false;
  double root_residual = 0.0;        // |f_M(X)|
  double bifurcation_residual = 0.0; // |M c X^{(p-1)/(p+1)} - target|
};

/// Solve Phi(M) = target by monotone bisection over M. params.M is ignored.
/// Auto picks the unique-root map when K >= 0 and Phi_2 when K < 0.
std::optional<BifurcationPoint> bifurcation_point(int k, const ProblemParams& params,
                                                  BifurcationBranch branch = BifurcationBranch::Auto);

struct BranchExistence {
  bool nonnegative_M = false;
  bool negative_M = false;
  bool from_smaller_root = false;
  bool from_larger_root = false;
  std::string reason;
};

BranchExistence branch_exists(int k, const ProblemParams& params);

/// The two positive roots of the one-dimensional (N = 1) constant-solution
/// equation; empty when M > -mu*(1).
std::optional<std::pair<double, double>> exterior_roots(double p, double M);

struct AsymptoticReport {
  double M = 0.0;
  RootCase case_tag = RootCase::NoRoot;
  /// X_M over ((p-1)/2)(K/M)^{(p+1)/(p-1)}: unique root for M > 0, smaller
  /// root for M < 0 with K < 0.
  std::optional<double> small_root_ratio;
  /// Largest root over (2/(p-1))^{2/(p-1)} (-M)^{(p+1)/(p(p-1))} for M < 0.
  std::optional<double> large_root_ratio;
  /// Two-sided estimate for the unique root at M < 0, K > 0.
  std::optional<double> sandwich_lo;
  std::optional<double> sandwich_hi;
  std::optional<bool> sandwich_holds;
};

/// Throws std::invalid_argument when |M_large| < 100.
AsymptoticReport asymptotic_check(const ProblemParams& params, double M_large);

}  // namespace radlab
