#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "radlab/diagnostics.hpp"
#include "radlab/params.hpp"
#include "radlab/radial_ode.hpp"

namespace radlab {

/// Raised when output files cannot be written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScanAxis {
  std::string name;  // one of p, q, M, a
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 1;
  bool log = false;

  std::vector<double> values() const;
};

/// Parse "name:min:max:count" with an optional ":log" or ":lin" suffix.
ScanAxis parse_axis(const std::string& text);

struct ScanSpec {
  std::vector<ScanAxis> axes;  // outermost first
  int N = 3;
  std::map<std::string, double> fixed;  // values for p, q, M, a not swept
  bool q_critical = false;             // q = 2p/(p+1) at every grid point
  IntegratorConfig integrator;
  std::vector<BoundId> bounds{std::begin(kAllBounds), std::end(kAllBounds)};
  unsigned jobs = 1;
  bool svg = false;  // classification map for two-axis scans

  /// Throws std::invalid_argument unless axis counts are >= 1 and swept and
  /// fixed names are disjoint and together cover p, q, M, a.
  void validate() const;
};

struct ScanRecord {
  ProblemParams params;
  double a = 0.0;
  ClassTag tag = ClassTag::Undetermined;
  Termination termination = Termination::Horizon;
  std::optional<double> r_event;
  std::optional<double> decay_gamma;
  std::vector<std::optional<double>> bound_constants;  // aligned with spec.bounds
  double wall_ms = 0.0;
};

struct ScanResult {
  std::vector<ScanRecord> records;  // lexicographic grid order
  std::map<ClassTag, std::size_t> totals;
  double wall_ms = 0.0;
};

ScanResult run_scan(const ScanSpec& spec);

/// RFC 4180 table with 17-significant-digit floats; wall times excluded.
std::string scan_csv(const ScanSpec& spec, const ScanResult& result);

/// Self-contained SVG of the classification over the first two axes.
/// Throws std::invalid_argument unless the scan has exactly two axes.
std::string classification_svg(const ScanSpec& spec, const ScanResult& result);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// Writes scan.csv, manifest.json (deterministic: spec, version,
/// tolerances, totals, file hashes), run_info.json (timings) and, when
/// requested, classification.svg. Throws IoError on failure.
void write_scan_outputs(const ScanSpec& spec, const ScanResult& result,
                        const std::filesystem::path& dir);

/// 17-significant-digit rendering used in all data files.
std::string format_double(double x);

/// Library version string.
const char* version();

}  // namespace radlab
