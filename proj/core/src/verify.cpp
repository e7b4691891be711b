#include "radlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "json.hpp"
#include "radlab/diagnostics.hpp"
#include "radlab/params.hpp"
#include "radlab/radial_ode.hpp"
#include "radlab/scan.hpp"
#include "radlab/separable.hpp"
#include "radlab/shooting.hpp"

namespace radlab {

bool VerifyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> names{"exact",     "energy",    "pps",
                                              "logsys",    "bounds",    "separable",
                                              "shooting",  "determinism", "all"};
  return names;
}

namespace {

struct Suite {
  std::string name;
  std::vector<CheckResult>* out;

  /// Pass when value <= threshold.
  void at_most(const std::string& check, double value, double threshold, std::string detail = {}) {
    out->push_back({name, check, value <= threshold, value, threshold, std::move(detail)});
  }
  void at_least(const std::string& check, double value, double threshold, std::string detail = {}) {
    out->push_back({name, check, value >= threshold, value, threshold, std::move(detail)});
  }
  void holds(const std::string& check, bool ok, std::string detail = {}) {
    out->push_back({name, check, ok, ok ? 1.0 : 0.0, 1.0, std::move(detail)});
  }
  /// Records a failed check instead of propagating an exception.
  template <class F>
  void guarded(const std::string& check, F&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      out->push_back({name, check, false, 0.0, 0.0, std::string("exception: ") + e.what()});
    }
  }
};

void suite_exact(Suite s) {
  s.guarded("aubin_talenti_reproduction", [&] {
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-9;
    cfg.r_max = 50.0;
    const Trajectory t = integrate({3, 5.0, 1.5, 0.0}, 1.0, cfg);
    double err = 0.0;
    for (const auto& x : t.samples) {
      const double ex = exact_aubin_talenti(x.r, 3.0, 3);
      err = std::max(err, std::abs(x.u - ex) / ex);
    }
    s.at_most("aubin_talenti_reproduction", err, 1e-6, "max relative error on r <= 50");
  });
  s.guarded("singular_profile_residual", [&] {
    double worst = 0.0;
    std::size_t roots = 0;
    for (double M : make_grid(-20.0, 20.0, 20, false)) {
      const ProblemParams P = at_critical_q(4, 5.0, M);
      for (double X : solve_constant_solutions(P).roots) {
        ++roots;
        for (double r : make_grid(0.01, 100.0, 100, true))
          worst = std::max(worst, singular_profile_residual(r, X, P));
      }
    }
    s.at_most("singular_profile_residual", worst, 1e-9,
              std::to_string(roots) + " roots at N=4, p=5, 100 radii each");
  });
  s.at_most("m_dagger_3_3", std::abs(m_dagger(3, 3.0) - 2.0), 1e-14);
  s.at_most("mu_star_3_3", std::abs(*mu_star(3, 3.0)), 1e-12);
  s.at_most("mu_star_3_2", std::abs(*mu_star(3, 2.0) - 3.0 * std::pow(4.0, -2.0 / 3.0)), 1e-12);
  s.guarded("q_bar_quadratic", [&] {
    const auto cc = critical_constants({3, 4.0, 2.0, 0.0});
    const auto [a, b, c] = q_bar_quadratic(3, 4.0);
    const double x = cc.q_bar.value();
    s.at_most("q_bar_quadratic", std::abs((a * x + b) * x + c), 1e-10);
  });
  s.guarded("f_at_merge", [&] {
    const ProblemParams P = at_critical_q(3, 2.0, -*mu_star(3, 2.0));
    s.at_most("f_at_merge", std::abs(f_M(1.0, P)), 1e-12, "f_{-mu*}(1) at N=3, p=2");
  });
}

void suite_energy(Suite s) {
  s.guarded("energy", [&] {
    const std::vector<std::pair<ProblemParams, double>> cases{
        {{3, 5.0, 1.5, 0.0}, 1.0}, {{3, 2.0, 4.0 / 3.0, 0.0}, 1.0}, {{3, 3.0, 1.5, -1.0}, 1.0},
        {{4, 3.0, 1.2, -5.0}, 2.0}, {{2, 2.0, 1.8, -0.5}, 0.7}};
    double worst = -kInfinity;
    for (const auto& [P, a] : cases) {
      const Trajectory t = integrate(P, a);
      for (const auto& x : t.samples) worst = std::max(worst, energy_Hprime(x, P));
    }
    s.at_most("hprime_nonpositive_for_M_le_0", worst, 0.0, "max H' over samples");

    IntegratorConfig cfg;
    cfg.r_max = 200.0;
    const ProblemParams P{3, 7.0, 1.75, 0.01};
    const Trajectory t = integrate(P, 1.0, cfg);
    double rise = 0.0;
    for (std::size_t i = 1; i < t.samples.size(); ++i)
      rise = std::max(rise, energy_H(t.samples[i], P) - energy_H(t.samples[i - 1], P));
    s.holds("candidate_is_ground_state_like", t.tag() == ClassTag::GroundStateCandidate);
    s.at_most("h_nonincreasing_on_candidate", rise, 1e-14, "largest sample-to-sample increase");
  });
}

void suite_pps(Suite s) {
  s.guarded("pps_identity_order", [&] {
    std::mt19937_64 rng(20240917);
    std::uniform_real_distribution<double> uk(0.5, 3.0), ua(0.1, 1.5), ug(-1.0, 1.0);
    struct Case {
      ProblemParams P;
      double a, r_lo, r_hi;
    };
    const std::vector<Case> cases{{{3, 3.0, 1.5, 1.0}, 1.0, 0.5, 2.5},
                                  {{3, 5.0, 1.5, 0.0}, 1.0, 0.5, 3.0},
                                  {{3, 7.0, 1.75, 0.01}, 1.0, 0.5, 3.0}};
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-14;
    double worst_order = kInfinity;
    for (int draw = 0; draw < 5; ++draw) {
      PPSParams pp{uk(rng), ua(rng), ug(rng), ug(rng)};
      for (const auto& c : cases) {
        const double d1 = pps_identity_defect(c.P, c.a, pp, c.r_lo, c.r_hi, 0.04, cfg);
        const double d2 = pps_identity_defect(c.P, c.a, pp, c.r_lo, c.r_hi, 0.02, cfg);
        worst_order = std::min(worst_order, std::log2(d1 / d2));
      }
    }
    s.at_least("pps_identity_order", worst_order, 1.9, "min observed order, 5 draws x 3 trajectories");
  });
  s.guarded("factored_U", [&] {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> un(3, 5);
    std::uniform_real_distribution<double> up(1.2, 6.0), uq(1.1, 3.0), um(-5.0, 5.0),
        ur(0.1, 5.0), uu(0.01, 2.0), uw(1e-3, 2.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const ProblemParams P{un(rng), up(rng), uq(rng), um(rng)};
      const RadialState x{ur(rng), uu(rng), -uw(rng)};
      const double U = pps_U(x, nonexistence_pps(P).pp, P);
      const double F = pps_U_factored(x, P).value;
      worst = std::max(worst, std::abs(F - U) / (std::abs(U) + 1.0));
    }
    s.at_most("factored_U", worst, 1e-10, "1000 decreasing states");
  });
}

void suite_logsys(Suite s) {
  for (double M : {-1.0, 0.0, 1.0}) {
    const std::string tag = "M=" + format_double(M);
    s.guarded("logsys " + tag, [&] {
      const ProblemParams P{3, 3.0, 1.5, M};
      std::vector<double> radii = make_grid(0.01, 10.0, 60, true);
      IntegratorConfig cfg;
      cfg.rel_tol = 1e-12;
      cfg.abs_tol = 1e-14;
      cfg.r_max = 10.0 * (1.0 + 1e-9);
      cfg.output_radii = radii;
      const Trajectory t = integrate(P, 0.1, cfg);
      if (t.samples.size() != radii.size() + 1)
        throw std::runtime_error("reference trajectory ended early");
      const RadialState start = t.samples[1];
      std::vector<double> ts;
      for (double r : radii) ts.push_back(std::log(r));
      const auto xy = integrate_log_xy(P, to_log_xy(start, P), ts);
      const auto xe = integrate_log_xieta(P, to_log_xieta(start, P), ts);
      double exy = 0.0, exe = 0.0;
      for (std::size_t i = 0; i < radii.size(); ++i) {
        const double ref = t.samples[i + 1].u;
        exy = std::max(exy, std::abs(from_log_xy(xy.states[i], P).u - ref) / std::abs(ref));
        exe = std::max(exe, std::abs(from_log_xieta(xe.states[i], P).u - ref) / std::abs(ref));
      }
      s.at_most("xy_vs_radial " + tag, exy, 1e-6);
      s.at_most("xieta_vs_radial " + tag, exe, 1e-6);
    });
  }
}

void suite_bounds(Suite s) {
  s.guarded("aubin_talenti_decay_bound", [&] {
    IntegratorConfig cfg;
    cfg.r_max = 50.0;
    const Trajectory t = integrate({3, 5.0, 1.5, 0.0}, 1.0, cfg);
    const BoundReport b = bound_check(t, BoundId::SourceDecay);
    const double expected = std::sqrt(std::sqrt(3.0) / 2.0);
    s.at_most("aubin_talenti_sup", std::abs(b.minimal_constant - expected), 1e-4,
              "sup u r^{1/2} vs (sqrt(3)/2)^{1/2}");
    s.holds("aubin_talenti_within_c0", b.satisfied.value_or(false));
  });
}

void suite_separable(Suite s) {
  s.guarded("case_map", [&] {
    const double ms = *mu_star(3, 2.0);
    const auto none = solve_constant_solutions(at_critical_q(3, 2.0, -1.0));
    s.holds("no_root_at_M=-1", none.case_tag == RootCase::NoRoot && none.roots.empty());
    const auto dbl = solve_constant_solutions(at_critical_q(3, 2.0, -ms));
    s.holds("double_root_at_-mu*", dbl.case_tag == RootCase::DoubleRoot);
    s.at_most("double_root_is_1", std::abs(dbl.roots.at(0) - 1.0), 1e-10);
    const ProblemParams P = at_critical_q(3, 2.0, -2.0);
    const auto two = solve_constant_solutions(P);
    s.holds("two_roots_at_M=-2", two.case_tag == RootCase::TwoRoots && two.roots.size() == 2 &&
                                     two.roots[0] < *two.X0 && *two.X0 < two.roots[1]);
    for (double X : two.roots) s.at_most("root_residual", root_residual(X, P), 1e-10);
  });
  s.guarded("bifurcation", [&] {
    const auto b1 = bifurcation_point(1, at_critical_q(4, 5.0, 0.0));
    s.at_most("M1_at_N4_p5", b1 ? std::abs(b1->M_k) : kInfinity, 1e-10);
    const auto b2 = bifurcation_point(2, at_critical_q(4, 5.0, 0.0));
    s.holds("M2_negative", b2 && b2->M_k < 0.0);
    s.at_most("M2_residual", b2 ? b2->bifurcation_residual : kInfinity, 1e-10);
    const auto e = branch_exists(1, at_critical_q(4, 3.0, 0.0));
    s.holds("N4_p3_k1_negative_branch_only", !e.nonnegative_M && e.negative_M);
  });
}

void suite_shooting(Suite s, unsigned jobs) {
  s.guarded("subcritical_crossings", [&] {
    const auto rep = nonexistence_scan({3, 2.0, 4.0 / 3.0, 0.0}, {0.5, 1.0, 2.0}, {}, jobs);
    bool all = true;
    for (const auto& o : rep.outcomes) all = all && o.tag == ClassTag::Crossing;
    s.holds("subcritical_all_crossing", all);
  });
  s.guarded("large_M_sweep", [&] {
    const auto rep = nonexistence_scan({3, 3.0, 1.5, 10.0}, make_grid(0.1, 10.0, 20, true), {}, jobs);
    s.at_most("large_M_candidates", static_cast<double>(rep.candidate_count), 0.0);
  });
  s.guarded("small_M_candidate", [&] {
    IntegratorConfig cfg;
    cfg.r_max = 200.0;
    const Trajectory t = integrate({3, 7.0, 1.75, 0.01}, 1.0, cfg);
    s.holds("small_M_is_candidate", t.tag() == ClassTag::GroundStateCandidate);
    const double g = decay_exponent(t).gamma;
    s.holds("small_M_decay_in_range", g >= 0.25 && g <= 0.45, "gamma = " + format_double(g));
  });
  s.guarded("scale_covariance", [&] {
    const ProblemParams P{3, 3.0, 1.5, 1.0};
    const auto r1 = event_radius(integrate(P, 1.0).classification).value();
    for (double k : {2.0, 4.0}) {
      const auto rk = event_radius(integrate(P, k, {}).classification).value();
      s.at_most("scale_covariance k=" + format_double(k), std::abs(k * rk - r1) / r1, 1e-4);
    }
  });
}

void suite_determinism(Suite s) {
  s.guarded("scan_determinism", [&] {
    ScanSpec spec;
    spec.N = 3;
    spec.axes = {{"M", 0.1, 10.0, 4, true}, {"a", 0.5, 2.0, 3, true}};
    spec.fixed = {{"p", 3.0}};
    spec.q_critical = true;
    spec.integrator.r_max = 30.0;
    spec.jobs = 1;
    const std::string a = scan_csv(spec, run_scan(spec));
    const std::string b = scan_csv(spec, run_scan(spec));
    spec.jobs = 4;
    const std::string c = scan_csv(spec, run_scan(spec));
    s.holds("repeat_identical", a == b);
    s.holds("parallel_identical", a == c);
  });
}

}  // namespace

VerifyReport run_verify(std::string_view suite, unsigned jobs) {
  const auto& names = verify_suites();
  if (std::find(names.begin(), names.end(), suite) == names.end())
    throw std::invalid_argument("unknown suite '" + std::string(suite) + "'");
  VerifyReport rep;
  const auto want = [&](const char* n) { return suite == n || suite == "all"; };
  if (want("exact")) suite_exact({"exact", &rep.checks});
  if (want("energy")) suite_energy({"energy", &rep.checks});
  if (want("pps")) suite_pps({"pps", &rep.checks});
  if (want("logsys")) suite_logsys({"logsys", &rep.checks});
  if (want("bounds")) suite_bounds({"bounds", &rep.checks});
  if (want("separable")) suite_separable({"separable", &rep.checks});
  if (want("shooting")) suite_shooting({"shooting", &rep.checks}, jobs);
  if (want("determinism")) suite_determinism({"determinism", &rep.checks});
  return rep;
}

std::string report_json(const VerifyReport& report) {
  nlohmann::json j;
  j["passed"] = report.all_passed();
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : report.checks) {
    nlohmann::json o = {{"suite", c.suite},
                        {"name", c.name},
                        {"passed", c.passed},
                        {"value", std::isfinite(c.value) ? nlohmann::json(c.value)
                                                         : nlohmann::json(format_double(c.value))},
                        {"threshold", c.threshold}};
    if (!c.detail.empty()) o["detail"] = c.detail;
    arr.push_back(o);
  }
  j["checks"] = arr;
  return j.dump(2) + "\n";
}

}  // namespace radlab
