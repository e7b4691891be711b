#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "radlab/params.hpp"

using namespace radlab;

namespace {

// (N-1)(X-p)^2 - (N+2-(N-2)p)((p+1)X - 2p)X, written out directly.
double q_bar_poly(int N, double p, double X) {
  return (N - 1.0) * (X - p) * (X - p) - (N + 2.0 - (N - 2.0) * p) * ((p + 1.0) * X - 2.0 * p) * X;
}

// Substituting u = A v(L x) into -Δu = u^p + M|∇u|^q gives
// -Δv = (A^{p-1}/L^2) v^p + M A^{q-1} L^{q-2} |∇v|^q.
void expect_substitution_consistent(const ProblemParams& P, double source_in, const ScalingMap& m) {
  const double A = m.amplitude_factor, L = m.length_factor;
  const double source = source_in * std::pow(A, P.p - 1.0) / (L * L);
  const double M = P.M * std::pow(A, P.q - 1.0) * std::pow(L, P.q - 2.0);
  EXPECT_NEAR(source, m.source_coefficient, 1e-12 * std::max(1.0, std::abs(source)));
  EXPECT_NEAR(M, m.new_params.M, 1e-11 * std::max(1.0, std::abs(M)));
}

}  // namespace

TEST(Params, ValidateRejectsOutOfRange) {
  EXPECT_THROW(validate({3, 1.0, 1.5, 0.0}), std::invalid_argument);
  EXPECT_THROW(validate({3, 2.0, 1.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(validate({0, 2.0, 1.5, 0.0}), std::invalid_argument);
  EXPECT_THROW(validate({3, 2.0, 1.5, std::nan("")}), std::invalid_argument);
  EXPECT_NO_THROW(validate({1, 1.01, 1.01, -5.0}));
}

TEST(Params, ClosedFormExamples) {
  EXPECT_NEAR(m_dagger(3, 3.0), 2.0, 1e-14);
  EXPECT_NEAR(*mu_star(3, 3.0), 0.0, 1e-12);
  EXPECT_NEAR(*mu_star(3, 2.0), 3.0 * std::pow(4.0, -2.0 / 3.0), 1e-12);
  EXPECT_NEAR(*mu_star(3, 2.0), 1.190551, 1e-6);
  EXPECT_FALSE(mu_star(3, 4.0).has_value());

  const auto cc = critical_constants({3, 4.0, 1.7, 0.0});
  ASSERT_TRUE(cc.q_bar.has_value());
  const double root = (-8.0 + std::sqrt(64.0 + 4.0 * 3.0 * 32.0)) / 6.0;  // 3X^2 + 8X - 32
  EXPECT_NEAR(*cc.q_bar, root, 1e-10);
  EXPECT_GT(*cc.q_bar, 1.6);
  EXPECT_LT(*cc.q_bar, 4.0);

  EXPECT_NEAR(*critical_constants({3, 7.0, 1.5, 0.0}).Q_Np, 2.0, 1e-14);
  EXPECT_EQ(critical_constants({3, 2.0, 1.5, 0.0}).p_serrin, 3.0);
  EXPECT_EQ(critical_constants({3, 2.0, 1.5, 0.0}).p_sobolev, 5.0);
  EXPECT_EQ(critical_constants({2, 2.0, 1.5, 0.0}).p_sobolev, kInfinity);
}

TEST(Params, AmplitudeConstantOnlyBelowCriticalQ) {
  const auto cc = critical_constants({3, 3.0, 1.2, 1.0});
  ASSERT_TRUE(cc.c_amplitude.has_value());
  // q' = 6: (4^5 3^6 3^6)^{-0.2/1.2}
  const double direct = std::pow(std::pow(4.0, 5) * std::pow(3.0, 6) * std::pow(3.0, 6), -0.2 / 1.2);
  EXPECT_NEAR(*cc.c_amplitude, direct, 1e-15);
  EXPECT_FALSE(critical_constants({3, 3.0, 1.5, 1.0}).c_amplitude.has_value());
  EXPECT_FALSE(critical_constants({3, 3.0, 1.9, 1.0}).c_amplitude.has_value());
}

TEST(Params, RegimeExamples) {
  EXPECT_EQ(regime({3, 3.0, 1.5, 0.0}), Regime::Balanced);
  EXPECT_EQ(regime({3, 3.0, 1.9, 0.0}), Regime::GradientDominant);
  EXPECT_EQ(regime({3, 3.0, 1.2, 0.0}), Regime::SourceDominant);
}

TEST(Params, QCritIncreasingInsideUnitInterval) {
  oracle::Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    const double p1 = rng.uniform(1.0001, 50.0);
    const double p2 = p1 + rng.uniform(1e-6, 10.0);
    EXPECT_GT(critical_q(p1), 1.0);
    EXPECT_LT(critical_q(p2), 2.0);
    EXPECT_LT(critical_q(p1), critical_q(p2));
  }
}

TEST(Params, SignInvariants) {
  oracle::Rng rng(12);
  for (int i = 0; i < 500; ++i) {
    const int N = rng.integer(3, 8);
    const double p = rng.uniform(1.05, 10.0);
    const double q = rng.uniform(1.05, 3.0);
    const auto cc = critical_constants({N, p, q, 0.0});
    EXPECT_EQ(cc.K > 0.0, p > double(N) / (N - 2.0)) << N << " " << p;
    EXPECT_EQ(cc.omega > 0.0, q > cc.q_crit);
    if (cc.q_bar) {
      EXPECT_GT(*cc.q_bar, cc.q_crit);
      EXPECT_LT(*cc.q_bar, p);
      const double scale = std::max(1.0, *cc.q_bar * *cc.q_bar * (N + 2.0 + (N - 2.0) * p) * (p + 1.0));
      EXPECT_LE(std::abs(q_bar_poly(N, p, *cc.q_bar)) / scale, 1e-10);
    }
  }
  const auto at = critical_constants({3, 3.0, 1.5, 0.0});
  EXPECT_EQ(at.omega, 0.0);
  EXPECT_EQ(*at.mu_star, 0.0);
}

TEST(Params, MuStarVanishesAtSerrin) {
  // mu* ~ (p+1)((N-2) eps/(2p))^{p/(p+1)} for p = N/(N-2) - eps.
  for (int N = 3; N <= 7; ++N) {
    const double ps = double(N) / (N - 2.0);
    double prev = kInfinity;
    for (double eps : {1e-4, 1e-6, 1e-8, 1e-10, 1e-12}) {
      const double p = ps - eps;
      ASSERT_TRUE(mu_star(N, p).has_value());
      const double v = *mu_star(N, p);
      const double eps_exact = N - (N - 2.0) * p;  // the rounded gap actually used
      const double lead = (p + 1.0) * std::pow(eps_exact / (2.0 * p), p / (p + 1.0));
      EXPECT_NEAR(v, lead, 1e-12 * lead);
      EXPECT_LT(v, prev);
      prev = v;
    }
    EXPECT_LE(prev, 1e-6);
  }
}

TEST(Params, TkAtCriticalQLeavesMUnchanged) {
  const ProblemParams P{3, 3.0, 1.5, 2.5};
  for (double k : {0.1, 2.0, 17.0}) EXPECT_NEAR(apply_scaling(P, ScalingKind::Tk, k).new_params.M, 2.5, 1e-13);
}

TEST(Params, ScalingMatchesDirectSubstitution) {
  oracle::Rng rng(13);
  for (int i = 0; i < 300; ++i) {
    const ProblemParams P{rng.integer(1, 6), rng.uniform(1.1, 6.0), rng.uniform(1.1, 2.5),
                          rng.uniform(-5.0, 5.0)};
    const double k = std::exp(rng.uniform(-2.0, 2.0));
    expect_substitution_consistent(P, 1.0, apply_scaling(P, ScalingKind::Tk, k));
    expect_substitution_consistent(P, 1.0, apply_scaling(P, ScalingKind::Sk, k));
    if (std::abs((P.p + 1.0) * P.q - 2.0 * P.p) > 1e-6)
      expect_substitution_consistent(P, 1.0, apply_scaling(P, ScalingKind::NormalizeM, 0.0));
  }
}

TEST(Params, TkRoundTripIsIdentity) {
  oracle::Rng rng(14);
  for (int i = 0; i < 300; ++i) {
    const ProblemParams P{rng.integer(1, 6), rng.uniform(1.1, 6.0), rng.uniform(1.1, 2.5),
                          rng.uniform(-5.0, 5.0)};
    const double k = std::exp(rng.uniform(-3.0, 3.0));
    const auto m = apply_scaling(apply_scaling(P, ScalingKind::Tk, k), ScalingKind::Tk, 1.0 / k);
    EXPECT_EQ(m.new_params.N, P.N);
    EXPECT_EQ(m.new_params.p, P.p);
    EXPECT_EQ(m.new_params.q, P.q);
    EXPECT_NEAR(m.new_params.M, P.M, 1e-12 * std::max(1.0, std::abs(P.M)));
    EXPECT_NEAR(m.amplitude_factor, 1.0, 1e-12);
    EXPECT_NEAR(m.length_factor, 1.0, 1e-12);
  }
}

TEST(Params, NormalizeMExample) {
  const auto m = apply_scaling(ProblemParams{3, 3.0, 1.2, 4.0}, ScalingKind::NormalizeM, 0.0);
  EXPECT_NEAR(m.amplitude_factor, std::pow(4.0, 5.0 / 3.0), 1e-12);
  EXPECT_NEAR(m.amplitude_factor, 10.079, 1e-3);
  EXPECT_EQ(m.new_params.M, 1.0);
  EXPECT_THROW(apply_scaling(ProblemParams{3, 3.0, 1.5, 4.0}, ScalingKind::NormalizeM, 0.0), NotApplicable);
  EXPECT_THROW(apply_scaling(ProblemParams{3, 3.0, 1.2, 0.0}, ScalingKind::NormalizeM, 0.0), NotApplicable);
  const auto sk = apply_scaling(ProblemParams{3, 3.0, 1.2, 4.0}, ScalingKind::Sk, 2.0);
  EXPECT_THROW(apply_scaling(sk, ScalingKind::NormalizeM, 0.0), NotApplicable);
}

TEST(Params, IntegralMethodExamples) {
  EXPECT_TRUE(integral_method_check(3, 2.0, 0.0, 2.5).all());
  const auto eq = integral_method_check(3, 2.0, 0.0, 2.0);
  EXPECT_FALSE(eq.distinct);
  EXPECT_FALSE(eq.all());
  const auto [m, d] = integral_method_params(4, 2.0);
  EXPECT_TRUE(integral_method_check(4, 2.0, m, d).all());
  EXPECT_THROW(integral_method_params(2, 2.0), std::invalid_argument);
  EXPECT_THROW(integral_method_params(3, 5.0), std::invalid_argument);
}

TEST(Params, IntegralMethodSearchIsFeasibleAndDeterministic) {
  oracle::Rng rng(15);
  for (int i = 0; i < 40; ++i) {
    const int N = rng.integer(3, 8);
    const double p = rng.uniform(1.02, (N + 2.0) / (N - 2.0) - 0.02);
    const auto first = integral_method_params(N, p);
    const auto [m, d] = first;
    // Re-check the four constraints exactly as written.
    EXPECT_NE(d, m + 2.0);
    EXPECT_LT(2.0 * (N - 1.0) * p / (N + 2.0), d);
    EXPECT_LT(std::max({-2.0, 1.0 - p, ((N - 4.0) * p - N) / 2.0}), m);
    EXPECT_LE(m, 0.0);
    EXPECT_GT(2.0 * (N - m) * d - (N - 1.0) * (m * m + d * d), 0.0);
    EXPECT_EQ(integral_method_params(N, p), first);
  }
}
