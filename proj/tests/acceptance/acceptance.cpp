// Runs every acceptance criterion once and prints one PASS/FAIL line each.
// Tolerances are fixed here; the exit code is nonzero if any line fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "radlab/diagnostics.hpp"
#include "radlab/params.hpp"
#include "radlab/radial_ode.hpp"
#include "radlab/scan.hpp"
#include "radlab/separable.hpp"
#include "radlab/shooting.hpp"

using namespace radlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

IntegratorConfig horizon(double r_max) {
  IntegratorConfig c;
  c.r_max = r_max;
  return c;
}

Outcome exact_solution() {
  const auto t0 = std::chrono::steady_clock::now();
  IntegratorConfig cfg = horizon(50.0);
  cfg.rel_tol = 1e-9;
  const auto t = integrate({3, 5.0, 1.5, 0.0}, 1.0, cfg);
  const double secs = seconds_since(t0);
  double worst = 0.0;
  for (const auto& s : t.samples) {
    const double ref = std::sqrt(3.0) / std::sqrt(3.0 + s.r * s.r);
    worst = std::max(worst, std::abs(s.u - ref) / ref);
  }
  const bool reached = t.samples.back().r == 50.0;
  return {reached && worst <= 1e-6 && secs < 1.0,
          fmt("max rel err %.3e <= 1e-6, %.3f s < 1 s", worst, secs)};
}

Outcome singular_residual() {
  const double p = 5.0, al = 2.0 / (p - 1.0);
  double worst = 0.0;
  std::size_t roots = 0;
  for (double M : make_grid(-10.0, 10.0, 20, false)) {
    const auto P = at_critical_q(4, p, M);
    for (double X : solve_constant_solutions(P).roots) {
      ++roots;
      for (double r : make_grid(1e-2, 1e2, 100, true)) {
        const RadialState s{r, X * std::pow(r, -al), -al * X * std::pow(r, -al - 1.0)};
        const double ddu = al * (al + 1.0) * X * std::pow(r, -al - 2.0);
        const double scale = std::abs(ddu) + 3.0 / r * std::abs(s.du) + std::pow(s.u, p) +
                             std::abs(M) * std::pow(std::abs(s.du), P.q);
        worst = std::max(worst, std::abs(rhs(s, P).second - ddu) / scale);
      }
    }
  }
  return {roots >= 20 && worst <= 1e-9, fmt("%g roots, max residual %.3e <= 1e-9", double(roots), worst)};
}

Outcome closed_forms() {
  const double e1 = std::abs(m_dagger(3, 3.0) - 2.0);
  const double e2 = std::abs(*mu_star(3, 3.0));
  const double e3 = std::abs(*mu_star(3, 2.0) - 3.0 * std::pow(4.0, -2.0 / 3.0));
  const double X = *critical_constants({3, 4.0, 1.7, 0.0}).q_bar;
  const double e4 = std::abs(3.0 * X * X + 8.0 * X - 32.0) / 32.0;
  const double e5 = std::abs(f_M(1.0, at_critical_q(3, 2.0, -*mu_star(3, 2.0))));
  const bool ok = e1 <= 1e-14 && e2 <= 1e-12 && e3 <= 1e-12 && e4 <= 1e-10 && e5 <= 1e-12;
  return {ok, fmt("m_dagger %.1e, mu_star(3,2) %.1e, merge residual %.1e", e1, e3, e5)};
}

Outcome subcritical_crossing() {
  double slowest = 0.0;
  bool all = true;
  for (double a : {0.5, 1.0, 2.0}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto t = integrate({3, 2.0, 4.0 / 3.0, 0.0}, a);
    slowest = std::max(slowest, seconds_since(t0));
    all = all && t.tag() == ClassTag::Crossing;
  }
  return {all && slowest < 1.0, fmt("all Crossing: %g, slowest %.3f s < 1 s", double(all), slowest)};
}

Outcome large_gradient_sweep() {
  const auto rep = nonexistence_scan({3, 3.0, 1.5, 10.0}, make_grid(0.1, 10.0, 20, true), horizon(100.0));
  return {rep.candidate_count == 0 && rep.outcomes.size() == 20,
          fmt("%g candidates over 20 amplitudes", double(rep.candidate_count))};
}

Outcome small_gradient_existence() {
  const ProblemParams P{3, 7.0, 1.75, 0.01};
  int hits = 0;
  double best = std::nan("");
  for (double a : make_grid(0.5, 2.0, 7, true)) {
    const auto t = integrate(P, a, horizon(200.0));
    if (t.tag() != ClassTag::GroundStateCandidate) continue;
    const double g = decay_exponent(t).gamma;
    if (g >= 0.25 && g <= 0.45) {
      ++hits;
      best = g;
    }
  }
  return {hits >= 1, fmt("%g candidates with gamma in [0.25, 0.45], last gamma %.4f", double(hits), best)};
}

Outcome case_map() {
  const double ms = *mu_star(3, 2.0);
  const auto none = solve_constant_solutions(at_critical_q(3, 2.0, -1.0));
  const auto dbl = solve_constant_solutions(at_critical_q(3, 2.0, -ms));
  const auto P = at_critical_q(3, 2.0, -2.0);
  const auto two = solve_constant_solutions(P);
  bool ok = none.case_tag == RootCase::NoRoot && dbl.case_tag == RootCase::DoubleRoot &&
            std::abs(dbl.roots.at(0) - 1.0) <= 1e-6 && two.case_tag == RootCase::TwoRoots;
  double worst_res = 0.0, worst_oracle = 0.0;
  if (ok) {
    ok = two.roots[0] < *two.X0 && *two.X0 < two.roots[1];
    const auto g = [&](double X) {
      return X - 2.0 * std::pow(2.0, 4.0 / 3.0) * std::cbrt(X) + 2.0;  // f_{-2} at N=3, p=2
    };
    const double r1 = oracle::bisect(g, 1e-9, *two.X0), r2 = oracle::bisect(g, *two.X0, 1e3);
    worst_oracle = std::max(std::abs(two.roots[0] - r1) / r1, std::abs(two.roots[1] - r2) / r2);
    for (double X : two.roots) worst_res = std::max(worst_res, root_residual(X, P));
    ok = ok && worst_res <= 1e-10 && worst_oracle <= 1e-10;
  }
  return {ok, fmt("residual %.1e <= 1e-10, oracle rel diff %.1e", worst_res, worst_oracle)};
}

Outcome bifurcation() {
  const auto b1 = bifurcation_point(1, at_critical_q(4, 5.0, 0.0));
  const auto b2 = bifurcation_point(2, at_critical_q(4, 5.0, 0.0));
  const auto ex = branch_exists(1, at_critical_q(4, 3.0, 0.0));
  if (!b1 || !b2) return {false, "missing bifurcation point"};
  const double c = std::pow(0.5, 10.0 / 6.0);
  const double res = std::abs(b2->M_k * c * std::pow(b2->X_at_Mk, 4.0 / 6.0) - b2->target);
  const bool ok = std::abs(b1->M_k) <= 1e-10 && b2->M_k < 0.0 && res <= 1e-10 &&
                  !ex.nonnegative_M && ex.negative_M;
  return {ok, fmt("M1 = %.1e, M2 = %.6f, residual %.1e", b1->M_k, b2->M_k, res)};
}

Outcome pps_identity() {
  oracle::Rng rng(20240917);
  double min_order = kInfinity;
  struct Case {
    ProblemParams P;
    double lo, hi;
  };
  for (const Case& c : {Case{{3, 3.0, 1.5, 1.0}, 0.5, 2.5}, Case{{3, 5.0, 1.5, 0.0}, 0.5, 3.0},
                        Case{{3, 7.0, 1.75, 0.01}, 0.5, 3.0}})
    for (int draw = 0; draw < 5; ++draw) {
      const PPSParams pp{rng.uniform(0.5, 4.0), rng.uniform(0.2, 2.0), rng.uniform(-1.0, 1.0),
                         rng.uniform(-1.0, 1.0)};
      IntegratorConfig cfg;
      cfg.rel_tol = 1e-12;
      cfg.abs_tol = 1e-14;
      const double d1 = pps_identity_defect(c.P, 1.0, pp, c.lo, c.hi, 0.04, cfg);
      const double d2 = pps_identity_defect(c.P, 1.0, pp, c.lo, c.hi, 0.02, cfg);
      min_order = std::min(min_order, std::log2(d1 / d2));
    }
  return {min_order >= 1.9, fmt("min observed order %.4f >= 1.9", min_order)};
}

Outcome factored_U() {
  oracle::Rng rng(7);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const ProblemParams P{rng.integer(3, 6), rng.uniform(1.2, 6.0), rng.uniform(1.1, 2.5),
                          rng.uniform(-3.0, 3.0)};
    const RadialState s{rng.uniform(0.05, 10.0), rng.uniform(0.01, 3.0), -rng.uniform(1e-4, 3.0)};
    const double U = pps_U(s, nonexistence_pps(P).pp, P);
    worst = std::max(worst, std::abs(pps_U_factored(s, P).value - U) / (std::abs(U) + 1.0));
  }
  return {worst <= 1e-10, fmt("max |diff|/(|U|+1) %.3e <= 1e-10", worst)};
}

Outcome log_systems() {
  double worst = 0.0;
  std::vector<double> radii = make_grid(0.01, 10.0, 60, true);
  std::vector<double> ts;
  for (double r : radii) ts.push_back(std::log(r));
  for (double M : {-1.0, 0.0, 1.0}) {
    const ProblemParams P{3, 3.0, 1.5, M};
    IntegratorConfig cfg = horizon(20.0);
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-14;
    cfg.output_radii = radii;
    const auto t = integrate(P, 0.1, cfg);
    if (t.samples.size() != radii.size() + 1) return {false, "radial run ended early"};
    const auto xy = integrate_log_xy(P, to_log_xy(t.samples[1], P), ts);
    const auto xe = integrate_log_xieta(P, to_log_xieta(t.samples[1], P), ts);
    for (std::size_t i = 0; i < radii.size(); ++i) {
      const double u = t.samples[i + 1].u;
      worst = std::max(worst, std::abs(from_log_xy(xy.states[i], P).u - u) / u);
      worst = std::max(worst, std::abs(from_log_xieta(xe.states[i], P).u - u) / u);
    }
  }
  return {worst <= 1e-6, fmt("max rel diff in u %.3e <= 1e-6", worst)};
}

Outcome energy() {
  double max_hp = -kInfinity;
  struct Case {
    ProblemParams P;
    double a, r_max;
  };
  for (const Case& c : {Case{{3, 5.0, 1.5, 0.0}, 1.0, 100.0}, Case{{3, 2.0, 4.0 / 3.0, 0.0}, 0.5, 100.0},
                        Case{{3, 2.0, 4.0 / 3.0, 0.0}, 1.0, 100.0}, Case{{3, 2.0, 4.0 / 3.0, 0.0}, 2.0, 100.0},
                        Case{{3, 3.0, 1.5, -1.0}, 0.1, 20.0}, Case{{3, 3.0, 1.5, 0.0}, 0.1, 20.0}}) {
    const auto t = integrate(c.P, c.a, horizon(c.r_max));
    for (const auto& s : t.samples) max_hp = std::max(max_hp, energy_Hprime(s, c.P));
  }
  const ProblemParams G{3, 7.0, 1.75, 0.01};
  const auto t = integrate(G, 1.0, horizon(200.0));
  double rise = 0.0;
  for (std::size_t k = 1; k < t.samples.size(); ++k)
    rise = std::max(rise, energy_H(t.samples[k], G) - energy_H(t.samples[k - 1], G));
  const bool ok = max_hp <= 0.0 && t.tag() == ClassTag::GroundStateCandidate && rise <= 0.0;
  return {ok, fmt("max H' %.3e <= 0, max H increase on candidate %.3e <= 0", max_hp, rise)};
}

Outcome decay_bound() {
  const auto t = integrate({3, 5.0, 1.5, 0.0}, 1.0);
  const auto rep = bound_check(t, BoundId::SourceDecay);
  const double exact = std::sqrt(std::sqrt(3.0) / 2.0);  // max of sqrt(3 r / (3 + r^2))
  const double c0 = std::pow(1.5, 0.25);
  const double diff = std::abs(rep.minimal_constant - exact);
  return {diff <= 1e-4 && rep.minimal_constant <= c0,
          fmt("sup %.6f vs %.6f (diff %.1e), c0 %.4f", rep.minimal_constant, exact, diff) +
              fmt(" c0=%.4f", c0)};
}

Outcome scale_covariance() {
  const ProblemParams P{3, 3.0, 1.5, 1.0};
  const auto base = integrate(P, 1.0);
  if (base.tag() != ClassTag::Crossing) return {false, "base amplitude did not cross"};
  const double r1 = std::get<Crossing>(base.classification).r_cross;
  double worst = 0.0;
  for (double k : {2.0, 4.0}) {
    const auto t = integrate(P, std::pow(k, 2.0 / (P.p - 1.0)));
    if (t.tag() != ClassTag::Crossing) return {false, "scaled amplitude did not cross"};
    worst = std::max(worst, std::abs(std::get<Crossing>(t.classification).r_cross * k - r1) / r1);
  }
  return {worst <= 1e-4, fmt("max rel diff of rescaled crossing radii %.3e <= 1e-4 (k = 2, 4)", worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / "radlab_acceptance_scan";
  fs::remove_all(root);
  std::vector<fs::path> dirs;
#ifdef RADLAB_CLI
  const std::string base = std::string(RADLAB_CLI) +
                           " scan -N 3 -p 3 --q-critical --axis M:0.1:10:4:log --axis a:0.5:2:3:log"
                           " --rmax 30 --svg";
  for (const auto& [name, jobs] : {std::pair{"serial1", 1}, {"serial2", 1}, {"parallel", 4}}) {
    dirs.push_back(root / name);
    const std::string cmd = base + " --jobs " + std::to_string(jobs) + " --out " + dirs.back().string() +
                            " > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, "scan command failed"};
  }
#else
  ScanSpec spec;
  spec.axes = {parse_axis("M:0.1:10:4:log"), parse_axis("a:0.5:2:3:log")};
  spec.fixed = {{"p", 3.0}};
  spec.q_critical = true;
  spec.integrator.r_max = 30.0;
  spec.svg = true;
  for (const auto& [name, jobs] : {std::pair{"serial1", 1u}, {"serial2", 1u}, {"parallel", 4u}}) {
    dirs.push_back(root / name);
    spec.jobs = jobs;
    write_scan_outputs(spec, run_scan(spec), dirs.back());
  }
#endif
  bool same = true;
  for (const char* f : {"scan.csv", "manifest.json", "classification.svg"}) {
    const std::string ref = slurp(dirs[0] / f);
    same = same && !ref.empty() && ref == slurp(dirs[1] / f) && ref == slurp(dirs[2] / f);
  }
  fs::remove_all(root);
  return {same, same ? "repeat and parallel outputs byte-identical" : "outputs differ"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{
      {"AC01", "exact-solution reproduction", exact_solution},
      {"AC02", "singular-solution residual", singular_residual},
      {"AC03", "closed-form constants", closed_forms},
      {"AC04", "subcritical source crosses zero", subcritical_crossing},
      {"AC05", "no candidate for large gradient coefficient", large_gradient_sweep},
      {"AC06", "candidate for small gradient coefficient", small_gradient_existence},
      {"AC07", "constant-solution case map", case_map},
      {"AC08", "bifurcation thresholds", bifurcation},
      {"AC09", "PPS identity second order", pps_identity},
      {"AC10", "factored U equivalence", factored_U},
      {"AC11", "log-system consistency", log_systems},
      {"AC12", "energy monotonicity", energy},
      {"AC13", "decay-bound constant", decay_bound},
      {"AC14", "scale covariance at criticality", scale_covariance},
      {"AC15", "determinism", determinism},
  };
  int failed = 0;
  for (const auto& c : all) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %s %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", int(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
