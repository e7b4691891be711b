#include "radlab/scan.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "radlab/detail/parallel.hpp"
#include "radlab/shooting.hpp"

#ifndef RADLAB_VERSION
#define RADLAB_VERSION "0.0.0"
#endif

namespace radlab {

using nlohmann::json;

const char* version() { return RADLAB_VERSION; }

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<double> ScanAxis::values() const { return make_grid(min, max, count, log); }

ScanAxis parse_axis(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() != 4 && parts.size() != 5)
    throw std::invalid_argument("axis must be name:min:max:count[:log|:lin], got '" + text + "'");
  ScanAxis ax;
  ax.name = parts[0];
  try {
    std::size_t used = 0;
    ax.min = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("");
    ax.max = std::stod(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("");
    const long long c = std::stoll(parts[3], &used);
    if (used != parts[3].size() || c < 1) throw std::invalid_argument("");
    ax.count = static_cast<std::size_t>(c);
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed axis '" + text + "'");
  }
  if (parts.size() == 5) {
    if (parts[4] == "log")
      ax.log = true;
    else if (parts[4] != "lin")
      throw std::invalid_argument("axis spacing must be log or lin in '" + text + "'");
  }
  return ax;
}

void ScanSpec::validate() const {
  static const std::set<std::string> names{"p", "q", "M", "a"};
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  std::set<std::string> covered;
  for (const auto& ax : axes) {
    if (!names.count(ax.name)) throw std::invalid_argument("unknown axis '" + ax.name + "'");
    if (ax.count < 1) throw std::invalid_argument("axis count must be >= 1");
    if (!std::isfinite(ax.min) || !std::isfinite(ax.max))
      throw std::invalid_argument("axis bounds must be finite");
    if (ax.log && !(ax.min > 0.0 && ax.max > 0.0))
      throw std::invalid_argument("log axis '" + ax.name + "' needs positive bounds");
    if (!covered.insert(ax.name).second)
      throw std::invalid_argument("axis '" + ax.name + "' listed twice");
  }
  for (const auto& [name, value] : fixed) {
    if (!names.count(name)) throw std::invalid_argument("unknown fixed parameter '" + name + "'");
    if (!covered.insert(name).second)
      throw std::invalid_argument("'" + name + "' is both swept and fixed");
    if (!std::isfinite(value)) throw std::invalid_argument("fixed values must be finite");
  }
  if (q_critical && !covered.insert("q").second)
    throw std::invalid_argument("q-critical conflicts with a swept or fixed q");
  if (covered.size() != names.size())
    throw std::invalid_argument("swept and fixed parameters must cover p, q, M, a");
  integrator.validate();
}

namespace {

struct GridPoint {
  ProblemParams params;
  double a = 0.0;
};

std::vector<GridPoint> expand(const ScanSpec& spec) {
  std::vector<std::vector<double>> vals;
  for (const auto& ax : spec.axes) vals.push_back(ax.values());
  std::size_t total = 1;
  for (const auto& v : vals) total *= v.size();

  std::vector<GridPoint> pts;
  pts.reserve(total);
  std::vector<std::size_t> idx(vals.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    std::map<std::string, double> v = spec.fixed;
    for (std::size_t k = 0; k < vals.size(); ++k) v[spec.axes[k].name] = vals[k][idx[k]];
    GridPoint g;
    g.params.N = spec.N;
    g.params.p = v.at("p");
    g.params.q = spec.q_critical ? critical_q(g.params.p) : v.at("q");
    g.params.M = v.at("M");
    g.a = v.at("a");
    pts.push_back(g);
    // Last axis varies fastest.
    for (std::size_t k = vals.size(); k-- > 0;) {
      if (++idx[k] < vals[k].size()) break;
      idx[k] = 0;
    }
  }
  return pts;
}

}  // namespace

ScanResult run_scan(const ScanSpec& spec) {
  spec.validate();
  const auto pts = expand(spec);
  for (const auto& g : pts) {
    validate(g.params);
    if (!(g.a > 0.0)) throw std::invalid_argument("amplitude a must be > 0 at every grid point");
  }

  const auto t0 = std::chrono::steady_clock::now();
  ScanResult res;
  res.records.resize(pts.size());
  detail::parallel_for(pts.size(), spec.jobs, [&](std::size_t i) {
    const auto s0 = std::chrono::steady_clock::now();
    const Trajectory t = integrate(pts[i].params, pts[i].a, spec.integrator);
    ScanRecord r;
    r.params = pts[i].params;
    r.a = pts[i].a;
    r.tag = t.tag();
    r.termination = t.termination;
    r.r_event = event_radius(t.classification);
    if (r.tag == ClassTag::GroundStateCandidate) {
      try {
        r.decay_gamma = decay_exponent(t).gamma;
      } catch (const std::exception&) {
      }
    }
    for (BoundId id : spec.bounds) {
      try {
        r.bound_constants.push_back(bound_check(t, id).minimal_constant);
      } catch (const std::exception&) {
        r.bound_constants.emplace_back();
      }
    }
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - s0).count();
    res.records[i] = std::move(r);
  });
  for (const auto& r : res.records) ++res.totals[r.tag];
  res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string opt_field(const std::optional<double>& x) { return x ? format_double(*x) : ""; }

}  // namespace

std::string scan_csv(const ScanSpec& spec, const ScanResult& result) {
  std::string out = "N,p,q,M,a,classification,termination,r_event,decay_gamma";
  for (BoundId id : spec.bounds) out += "," + csv_field("bound_" + std::string(to_string(id)));
  out += "\r\n";
  for (const auto& r : result.records) {
    out += std::to_string(r.params.N);
    for (double x : {r.params.p, r.params.q, r.params.M, r.a}) out += "," + format_double(x);
    out += "," + csv_field(std::string(to_string(r.tag)));
    out += "," + csv_field(std::string(to_string(r.termination)));
    out += "," + opt_field(r.r_event);
    out += "," + opt_field(r.decay_gamma);
    for (const auto& b : r.bound_constants) out += "," + opt_field(b);
    out += "\r\n";
  }
  return out;
}

std::string classification_svg(const ScanSpec& spec, const ScanResult& result) {
  if (spec.axes.size() != 2) throw std::invalid_argument("classification map needs two axes");
  const std::size_t rows = spec.axes[0].count;
  const std::size_t cols = spec.axes[1].count;
  constexpr int cell = 12, margin = 60, legend = 170;
  static const std::array<const char*, 5> colors{"#d62728", "#9467bd", "#2ca02c", "#ff7f0e",
                                                 "#7f7f7f"};
  const int width = margin + static_cast<int>(cols) * cell + legend;
  const int height = margin + static_cast<int>(rows) * cell + 20;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<text x=\"" << margin << "\" y=\"20\">rows: " << spec.axes[0].name << " ["
     << format_double(spec.axes[0].min) << ", " << format_double(spec.axes[0].max)
     << "], columns: " << spec.axes[1].name << " [" << format_double(spec.axes[1].min) << ", "
     << format_double(spec.axes[1].max) << "]</text>\n";
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const auto& r = result.records.at(i * cols + j);
      // Row 0 at the bottom so the first axis increases upward.
      const auto y = margin + static_cast<int>(rows - 1 - i) * cell;
      const auto x = margin + static_cast<int>(j) * cell;
      os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell
         << "\" fill=\"" << colors[static_cast<std::size_t>(r.tag)] << "\"/>\n";
    }
  }
  const int lx = margin + static_cast<int>(cols) * cell + 20;
  for (std::size_t k = 0; k < colors.size(); ++k) {
    const int ly = margin + static_cast<int>(k) * 18;
    os << "<rect x=\"" << lx << "\" y=\"" << ly << "\" width=\"12\" height=\"12\" fill=\""
       << colors[k] << "\"/><text x=\"" << lx + 18 << "\" y=\"" << ly + 10 << "\">"
       << to_string(static_cast<ClassTag>(k)) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  f.close();
  if (!f) throw IoError("failed writing " + path.string());
}

json spec_json(const ScanSpec& spec) {
  json j;
  j["N"] = spec.N;
  j["q_critical"] = spec.q_critical;
  json axes = json::array();
  for (const auto& ax : spec.axes)
    axes.push_back({{"name", ax.name}, {"min", ax.min}, {"max", ax.max}, {"count", ax.count},
                    {"spacing", ax.log ? "log" : "lin"}});
  j["axes"] = axes;
  json fixed = json::object();
  for (const auto& [k, v] : spec.fixed) fixed[k] = v;
  j["fixed"] = fixed;
  json bounds = json::array();
  for (BoundId id : spec.bounds) bounds.push_back(std::string(to_string(id)));
  j["bounds"] = bounds;
  const auto& c = spec.integrator;
  j["integrator"] = {{"rel_tol", c.rel_tol},
                     {"abs_tol", c.abs_tol},
                     {"r0", c.r0},
                     {"r_max", c.r_max},
                     {"max_steps", c.max_steps},
                     {"max_step", c.max_step_value()},
                     {"zero_threshold", c.zero_threshold ? json(*c.zero_threshold)
                                                         : json("0.25*a")},
                     {"blowup_threshold", c.blowup_threshold ? json(*c.blowup_threshold)
                                                             : json("1e8*a")}};
  return j;
}

}  // namespace

void write_scan_outputs(const ScanSpec& spec, const ScanResult& result,
                        const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory " + dir.string());

  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("scan.csv", scan_csv(spec, result));
  if (spec.svg && spec.axes.size() == 2)
    files.emplace_back("classification.svg", classification_svg(spec, result));

  json manifest;
  manifest["tool"] = "radlab";
  manifest["version"] = version();
  manifest["spec"] = spec_json(spec);
  json totals = json::object();
  for (ClassTag t : {ClassTag::Crossing, ClassTag::PositiveMinimum, ClassTag::GroundStateCandidate,
                     ClassTag::BlowUp, ClassTag::Undetermined}) {
    const auto it = result.totals.find(t);
    totals[std::string(to_string(t))] = it == result.totals.end() ? 0 : it->second;
  }
  manifest["totals"] = totals;
  manifest["records"] = result.records.size();
  json listed = json::array();
  for (const auto& [name, bytes] : files) {
    write_file(dir / name, bytes);
    listed.push_back({{"name", name}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
  }
  manifest["files"] = listed;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");

  json info;
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  info["finished_utc"] = stamp;
  info["jobs"] = spec.jobs;
  info["wall_ms"] = result.wall_ms;
  json per = json::array();
  for (const auto& r : result.records) per.push_back(r.wall_ms);
  info["record_wall_ms"] = per;
  write_file(dir / "run_info.json", info.dump(2) + "\n");
}

}  // namespace radlab
