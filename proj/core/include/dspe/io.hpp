// ============================================================================
// io.hpp -- trace CSV files, scenario files and shared I/O errors
// ============================================================================
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dspe/analysis.hpp"
#include "dspe/detect.hpp"
#include "dspe/model.hpp"

namespace dspe {

/// Malformed input; `line()` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, int line, const std::string& what);
  [[nodiscard]] int line() const noexcept { return line_; }

 private:
  int line_;
};

/// File-system or integrity failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Trace CSV
//
//   # dspe-otdr trace v1
//   # wavelength_nm=1550
//   # pulse_width_ns=100
//   # dz_m=1
//   # z0_m=0
//   # topology_id=testbed
//   # averaging=noiseless
//   # seed=42                      (only when the trace is noisy)
//   z_m,power_w[,power_db5]
//   0.00000000000000000e+00,2.00700000000000000e-08
// ---------------------------------------------------------------------------
struct TraceWriteOptions {
  bool db_column = false;  // extra 5*log10(P / 1 W) display column
};

void write_trace_csv(std::ostream& out, const Trace& trace, const TraceWriteOptions& opts = {});
[[nodiscard]] Trace read_trace_csv(std::istream& in, const std::string& source = "<stream>");
void save_trace(const std::filesystem::path& path, const Trace& trace,
                const TraceWriteOptions& opts = {});
[[nodiscard]] Trace load_trace(const std::filesystem::path& path);

/// One-way display dB, 5*log10(P / 1 W); NaN for non-positive samples.
[[nodiscard]] double display_db(double power_w);

// ---------------------------------------------------------------------------
// Scenario files (YAML, see docs/scenario_format.md)
// ---------------------------------------------------------------------------
struct Scenario {
  PonTopology topology;
  std::map<int, FiberParams> fibers;  // keyed by wavelength in nm
  OtdrConfig otdr;                    // wavelength is filled per run
  std::vector<FaultSpec> faults;
  TestConfig test;
  double delta = 0.01;
  std::uint64_t seed = 1;
  int reference_averages = 0;  // 0: noiseless reference

  [[nodiscard]] std::vector<int> wavelengths() const;
  [[nodiscard]] const FiberParams& fiber(int wavelength_nm) const;
  [[nodiscard]] OtdrConfig otdr_for(int wavelength_nm) const;
  [[nodiscard]] AnalysisSetup setup_for(int wavelength_nm) const;
};

[[nodiscard]] Scenario parse_scenario(std::string_view text, const std::string& source = "<scenario>");
[[nodiscard]] Scenario load_scenario(const std::filesystem::path& path);

}  // namespace dspe
