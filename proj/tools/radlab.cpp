// radlab: command-line front end for the radial ground-state library.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "radlab/diagnostics.hpp"
#include "radlab/params.hpp"
#include "radlab/radial_ode.hpp"
#include "radlab/scan.hpp"
#include "radlab/separable.hpp"
#include "radlab/shooting.hpp"
#include "radlab/verify.hpp"

namespace {

using nlohmann::json;
using namespace radlab;

enum Exit { kOk = 0, kVerifyFailed = 1, kUsage = 2, kIo = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  int N = 3;
  double p = 3.0;
  std::optional<double> q;
  double M = 0.0;
  bool q_critical = false;
  std::optional<double> r_max;
  std::optional<double> rel_tol;
  std::optional<double> abs_tol;
  std::string out = ".";
  unsigned jobs = 1;

  ProblemParams params() const {
    ProblemParams P{N, p, q ? *q : critical_q(p), M};
    if (q_critical) P.q = critical_q(p);
    return P;
  }
  IntegratorConfig integrator() const {
    IntegratorConfig c;
    if (r_max) c.r_max = *r_max;
    if (rel_tol) c.rel_tol = *rel_tol;
    if (abs_tol) c.abs_tol = *abs_tol;
    return c;
  }
};

void add_params(CLI::App* app, CommonOptions& o, bool with_q = true) {
  app->add_option("-N", o.N, "spatial dimension")->capture_default_str();
  app->add_option("-p", o.p, "source exponent")->capture_default_str();
  if (with_q) {
    app->add_option("-q", o.q, "gradient exponent (default 2p/(p+1))");
    app->add_flag("--q-critical", o.q_critical, "set q = 2p/(p+1)");
  }
  app->add_option("-M", o.M, "gradient coefficient")->capture_default_str();
}

void add_integrator(CLI::App* app, CommonOptions& o) {
  app->add_option("--rmax", o.r_max, "integration horizon (default 100)");
  app->add_option("--rtol", o.rel_tol, "relative tolerance (default 1e-10)");
  app->add_option("--atol", o.abs_tol, "absolute tolerance (default 1e-12)");
}

std::string fmt(double x) { return format_double(x); }

json opt_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("failed writing " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory " + dir.string());
}

// ---- constants ----------------------------------------------------------

int cmd_constants(const CommonOptions& o, bool as_json) {
  const ProblemParams P = o.params();
  const auto cc = critical_constants(P);
  const std::vector<std::pair<std::string, std::pair<std::optional<double>, std::string>>> rows{
      {"p_serrin", {std::isfinite(cc.p_serrin) ? std::optional(cc.p_serrin) : std::nullopt, "N/(N-2)"}},
      {"p_sobolev", {std::isfinite(cc.p_sobolev) ? std::optional(cc.p_sobolev) : std::nullopt, "(N+2)/(N-2)"}},
      {"q_crit", {cc.q_crit, "2p/(p+1)"}},
      {"K", {cc.K, "((N-2)p-N)/(p-1)"}},
      {"L", {cc.L, "K - 2/(p-1)"}},
      {"omega", {cc.omega, "((p+1)q-2p)/(p-1)"}},
      {"omega_bar", {cc.omega_bar, "(p-1) omega/(q-1)"}},
      {"mu_star", {cc.mu_star, "(p+1)((N-(N-2)p)/(2p))^{p/(p+1)}"}},
      {"m_dagger", {cc.m_dagger, "((p-1)/(p+1))^{(p-1)/(p+1)} (N(p+1)^2/(4p))^{p/(p+1)}"}},
      {"Q_Np", {cc.Q_Np, "2(N-1)p/(2N+p+1)"}},
      {"q_bar", {cc.q_bar, "root in (q_crit, p) of (N-1)(X-p)^2 - (N+2-(N-2)p)((p+1)X-2p)X"}},
      {"c_amplitude", {cc.c_amplitude, "(4^{q'-1} p^{q'} N^{q'})^{-(q-1)/(2p-(p+1)q)}, q' = q/(q-1)"}},
  };
  if (as_json) {
    json j;
    j["params"] = {{"N", P.N}, {"p", P.p}, {"q", P.q}, {"M", P.M}};
    j["regime"] = std::string(to_string(regime(P)));
    for (const auto& [name, v] : rows) j["constants"][name] = {{"value", opt_json(v.first)}, {"formula", v.second}};
    j["q_bar_ambiguous"] = cc.q_bar_ambiguous;
    std::cout << j.dump(2) << "\n";
    return kOk;
  }
  std::cout << "N = " << P.N << ", p = " << fmt(P.p) << ", q = " << fmt(P.q) << ", M = " << fmt(P.M)
            << "\nregime = " << to_string(regime(P)) << "\n";
  for (const auto& [name, v] : rows)
    std::cout << name << " = " << (v.first ? fmt(*v.first) : std::string("n/a")) << "    # "
              << v.second << "\n";
  return kOk;
}

// ---- shoot ------------------------------------------------------------------

json trajectory_json(const Trajectory& t) {
  json j;
  j["a"] = t.a;
  j["classification"] = std::string(to_string(t.tag()));
  j["r_event"] = opt_json(event_radius(t.classification));
  j["termination"] = std::string(to_string(t.termination));
  j["zero_threshold"] = t.zero_threshold;
  j["r_max"] = t.r_max;
  j["steps"] = t.steps;
  json ev = json::array();
  for (const auto& e : t.events)
    ev.push_back({{"kind", std::string(to_string(e.kind))}, {"r", e.r}, {"r_lo", e.r_lo}, {"r_hi", e.r_hi}});
  j["events"] = ev;
  if (const auto* g = std::get_if<GroundStateCandidate>(&t.classification))
    j["local_decay_slope"] = g->decay_estimate;

  if (t.tag() == ClassTag::GroundStateCandidate) {
    try {
      const auto d = decay_exponent(t);
      j["decay"] = {{"gamma", d.gamma}, {"r_lo", d.r_lo}, {"r_hi", d.r_hi},
                    {"fit_residual", d.fit_residual}, {"samples", d.samples}};
    } catch (const std::exception& e) {
      j["decay"] = {{"error", e.what()}};
    }
  } else {
    j["decay"] = nullptr;
  }

  double hp_max = -kInfinity, rise = 0.0, du_max = 0.0;
  for (std::size_t i = 0; i < t.samples.size(); ++i) {
    const auto& s = t.samples[i];
    if (!(s.u > 0.0)) break;
    hp_max = std::max(hp_max, energy_Hprime(s, t.params));
    du_max = std::max(du_max, std::abs(s.du));
    if (i > 0) rise = std::max(rise, energy_H(s, t.params) - energy_H(t.samples[i - 1], t.params));
  }
  const auto cap = gradient_cap(t.params, t.a);
  j["energy"] = {{"max_Hprime", hp_max}, {"max_H_increase", rise},
                 {"H_nonincreasing", rise <= 1e-14}, {"Hprime_nonpositive", hp_max <= 0.0}};
  j["gradient_cap"] = {{"h_cap", cap.h_cap}, {"max_abs_du", du_max}, {"holds", du_max <= cap.h_cap}};
  return j;
}

std::string trajectory_csv(const Trajectory& t) {
  std::string out = "r,u,du,H,Hprime\r\n";
  for (const auto& s : t.samples) {
    out += fmt(s.r) + "," + fmt(s.u) + "," + fmt(s.du) + "," + fmt(energy_H(s, t.params)) + "," +
           fmt(energy_Hprime(s, t.params)) + "\r\n";
  }
  return out;
}

int cmd_shoot(const CommonOptions& o, std::optional<double> a, const std::vector<double>& bracket) {
  const ProblemParams P = o.params();
  const IntegratorConfig cfg = o.integrator();
  json verdict;
  verdict["params"] = {{"N", P.N}, {"p", P.p}, {"q", P.q}, {"M", P.M}};
  std::optional<Trajectory> traj;

  if (!bracket.empty()) {
    if (bracket.size() != 2 || !(bracket[0] > 0.0) || !(bracket[1] > bracket[0]))
      throw UsageError("--bracket needs 0 < LO < HI");
    const auto res = find_ground_state(P, bracket[0], bracket[1], cfg);
    verdict["verdict"] = std::string(to_string(res.verdict));
    verdict["a_star"] = opt_json(res.a_star);
    json hist = json::array();
    for (const auto& b : res.bracket_history)
      hist.push_back({{"a_lo", b.a_lo}, {"a_hi", b.a_hi}, {"tag_lo", std::string(to_string(b.tag_lo))},
                      {"tag_hi", std::string(to_string(b.tag_hi))}});
    verdict["bracket_history"] = hist;
    json ends = json::array();
    for (const auto& e : res.endpoints) ends.push_back(trajectory_json(e));
    verdict["endpoints"] = ends;
    if (res.final_trajectory) traj = *res.final_trajectory;
    std::cout << "verdict: " << to_string(res.verdict) << "\n";
    if (res.a_star) std::cout << "a_star: " << fmt(*res.a_star) << "\n";
  } else {
    if (!a) throw UsageError("shoot needs -a or --bracket");
    if (!(*a > 0.0)) throw UsageError("-a must be > 0");
    traj = integrate(P, *a, cfg);
  }

  const std::filesystem::path dir(o.out);
  ensure_dir(dir);
  if (traj) {
    verdict["trajectory"] = trajectory_json(*traj);
    write_text(dir / "trajectory.csv", trajectory_csv(*traj));
    std::cout << "classification: " << to_string(traj->tag()) << "\n";
    if (const auto r = event_radius(traj->classification)) std::cout << "r_event: " << fmt(*r) << "\n";
    const auto& d = verdict["trajectory"]["decay"];
    if (d.is_object() && d.contains("gamma")) std::cout << "decay_gamma: " << fmt(d["gamma"].get<double>()) << "\n";
  }
  write_text(dir / "verdict.json", verdict.dump(2) + "\n");
  return kOk;
}

// ---- scan -------------------------------------------------------------------

int cmd_scan(const CommonOptions& o, const std::vector<std::string>& axes,
             const std::map<std::string, bool>& given, std::optional<double> a, bool svg) {
  ScanSpec spec;
  spec.N = o.N;
  for (const auto& text : axes) spec.axes.push_back(parse_axis(text));
  const auto swept = [&](const std::string& n) {
    for (const auto& ax : spec.axes)
      if (ax.name == n) return true;
    return false;
  };
  // Unswept parameters are fixed at their flag value (or default).
  if (!swept("p")) spec.fixed["p"] = o.p;
  if (!swept("M")) spec.fixed["M"] = o.M;
  if (!swept("a")) {
    if (!a) throw UsageError("scan needs -a or an a axis");
    spec.fixed["a"] = *a;
  }
  spec.q_critical = o.q_critical;
  if (!swept("q") && !o.q_critical) {
    if (!o.q) throw UsageError("scan needs -q, --q-critical or a q axis");
    spec.fixed["q"] = *o.q;
  } else if (o.q && given.at("q")) {
    throw UsageError("-q conflicts with --q-critical or a q axis");
  }
  spec.integrator = o.integrator();
  spec.jobs = std::max(1u, o.jobs);
  spec.svg = svg;
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const ScanResult res = run_scan(spec);
  write_scan_outputs(spec, res, o.out);
  std::cout << "records: " << res.records.size() << "\n";
  for (const auto& [tag, n] : res.totals) std::cout << to_string(tag) << ": " << n << "\n";
  std::cout << "output: " << o.out << "\n";
  return kOk;
}

// ---- separable --------------------------------------------------------------

int cmd_separable(const CommonOptions& o, bool bifurcate, int k, const std::string& branch,
                  const std::string& m_grid) {
  if (o.q && std::abs(*o.q - critical_q(o.p)) > kCriticalQTolerance && !o.q_critical)
    throw UsageError("separable solutions need q = 2p/(p+1); pass --q-critical or omit -q");
  const ProblemParams base = at_critical_q(o.N, o.p, o.M);

  if (bifurcate) {
    BifurcationBranch b = BifurcationBranch::Auto;
    if (branch == "phi1")
      b = BifurcationBranch::Phi1;
    else if (branch == "phi2")
      b = BifurcationBranch::Phi2;
    else if (branch != "auto")
      throw UsageError("--branch must be auto, phi1 or phi2");
    if (k < 1) throw UsageError("-k must be >= 1");
    const auto e = branch_exists(k, base);
    std::cout << "k,lambda_k,M_k,X,root_index,below_minus_mu_star,root_residual,bifurcation_residual\r\n";
    const auto bp = bifurcation_point(k, base, b);
    if (bp) {
      std::cout << bp->k << "," << fmt(bp->lambda_k) << "," << fmt(bp->M_k) << "," << fmt(bp->X_at_Mk)
                << "," << bp->root_index << "," << (bp->below_minus_mu_star ? "true" : "false") << ","
                << fmt(bp->root_residual) << "," << fmt(bp->bifurcation_residual) << "\r\n";
    } else {
      std::cout << k << "," << fmt(eigenvalue(k, o.N)) << ",none,,,,,\r\n";
    }
    std::cerr << "branch: M>=0 " << (e.nonnegative_M ? "yes" : "no") << ", M<0 "
              << (e.negative_M ? "yes" : "no") << " (" << e.reason << ")\n";
    return kOk;
  }

  std::vector<double> Ms{o.M};
  if (!m_grid.empty()) {
    const ScanAxis ax = parse_axis("M:" + m_grid);
    Ms = ax.values();
  }
  std::cout << "N,p,M,case,X0,root_index,X,residual\r\n";
  for (double M : Ms) {
    ProblemParams P = base;
    P.M = M;
    const auto set = solve_constant_solutions(P);
    const std::string head = std::to_string(P.N) + "," + fmt(P.p) + "," + fmt(M) + "," +
                             std::string(to_string(set.case_tag)) + "," +
                             (set.X0 ? fmt(*set.X0) : std::string());
    if (set.roots.empty()) std::cout << head << ",,,\r\n";
    for (std::size_t i = 0; i < set.roots.size(); ++i)
      std::cout << head << "," << i + 1 << "," << fmt(set.roots[i]) << ","
                << fmt(root_residual(set.roots[i], P)) << "\r\n";
  }
  return kOk;
}

// ---- verify -----------------------------------------------------------------

int cmd_verify(const std::string& suite, const std::optional<std::string>& json_path, unsigned jobs) {
  const auto& names = verify_suites();
  if (std::find(names.begin(), names.end(), suite) == names.end())
    throw UsageError("unknown suite '" + suite + "'");
  const VerifyReport rep = run_verify(suite, std::max(1u, jobs));
  for (const auto& c : rep.checks)
    std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.suite << "/" << c.name << "  value=" << fmt(c.value)
              << " limit=" << fmt(c.threshold) << (c.detail.empty() ? "" : "  (" + c.detail + ")") << "\n";
  std::cout << (rep.all_passed() ? "all checks passed" : "some checks FAILED") << "\n";
  if (json_path) write_text(*json_path, report_json(rep));
  return rep.all_passed() ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"radlab: radial solutions of -Δu = u^p + M|∇u|^q"};
  app.set_version_flag("--version", std::string(radlab::version()));
  app.set_config("--config", "", "key = value configuration file");
  app.require_subcommand(1);

  CommonOptions o;
  bool as_json = false;
  auto* constants = app.add_subcommand("constants", "print closed-form constants");
  add_params(constants, o);
  constants->add_flag("--json", as_json, "emit JSON");

  std::optional<double> a;
  std::vector<double> bracket;
  auto* shoot = app.add_subcommand("shoot", "integrate one amplitude or bisect a bracket");
  add_params(shoot, o);
  add_integrator(shoot, o);
  shoot->add_option("-a", a, "initial amplitude u(0)");
  shoot->add_option("--bracket", bracket, "amplitude bracket LO HI")->expected(2);
  shoot->add_option("--out", o.out, "output directory")->capture_default_str();

  std::vector<std::string> axes;
  bool svg = false;
  auto* scan = app.add_subcommand("scan", "parameter sweep");
  add_params(scan, o);
  add_integrator(scan, o);
  scan->add_option("-a", a, "fixed amplitude when a is not swept");
  scan->add_option("--axis", axes, "name:min:max:count[:log|:lin], name in p, q, M, a");
  scan->add_option("--out", o.out, "output directory")->capture_default_str();
  scan->add_option("--jobs", o.jobs, "worker threads")->capture_default_str();
  scan->add_flag("--svg", svg, "write classification.svg for two-axis scans");

  bool bifurcate = false;
  int k = 1;
  std::string branch = "auto";
  std::string m_grid;
  auto* separable = app.add_subcommand("separable", "constant separable solutions and bifurcation points");
  add_params(separable, o);
  separable->add_flag("--bifurcate", bifurcate, "solve for the bifurcation point of mode k");
  separable->add_option("-k", k, "mode index")->capture_default_str();
  separable->add_option("--branch", branch, "auto, phi1 or phi2")->capture_default_str();
  separable->add_option("--M-grid", m_grid, "min:max:count[:log|:lin] over M");

  std::string suite;
  std::optional<std::string> report_path;
  auto* verify = app.add_subcommand("verify", "run an invariant suite");
  verify->add_option("suite", suite, "exact, energy, pps, logsys, bounds, separable, shooting, determinism, all")
      ->required();
  verify->add_option("--json", report_path, "write a JSON report to this file");
  verify->add_option("--jobs", o.jobs, "worker threads")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*constants) return cmd_constants(o, as_json);
    if (*shoot) return cmd_shoot(o, a, bracket);
    if (*scan) return cmd_scan(o, axes, {{"q", scan->count("-q") > 0}}, a, svg);
    if (*separable) return cmd_separable(o, bifurcate, k, branch, m_grid);
    if (*verify) return cmd_verify(suite, report_path, o.jobs);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NotApplicable& e) {
    std::cerr << "not applicable: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kVerifyFailed;
  }
  return kUsage;
}
