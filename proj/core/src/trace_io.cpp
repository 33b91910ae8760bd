#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "dspe/io.hpp"

namespace dspe {

ParseError::ParseError(const std::string& source, int line, const std::string& what)
    : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ": " + what
                                  : source + ": " + what),
      line_(line) {}

double display_db(double power_w) {
  return power_w > 0.0 ? 5.0 * std::log10(power_w) : std::nan("");
}

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string e17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

// Shortest of %.15g/%.17g that reads back to the same pulse width via ns / 1e9.
std::string pulse_ns(double seconds) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", seconds * 1e9);
  if (std::strtod(buf, nullptr) / 1e9 == seconds) return buf;
  std::snprintf(buf, sizeof buf, "%.17g", seconds * 1e9);
  return buf;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && p == end;
}

}  // namespace

void write_trace_csv(std::ostream& out, const Trace& t, const TraceWriteOptions& opts) {
  out << "# dspe-otdr trace v1\n";
  out << "# wavelength_nm=" << t.meta.wavelength_nm << '\n';
  out << "# pulse_width_ns=" << pulse_ns(t.meta.pulse_width_s) << '\n';
  out << "# dz_m=" << g17(t.dz_m) << '\n';
  out << "# z0_m=" << g17(t.z0_m) << '\n';
  out << "# topology_id=" << t.meta.topology_id << '\n';
  out << "# averaging=" << t.meta.averaging_label << '\n';
  if (t.meta.seed) out << "# seed=" << *t.meta.seed << '\n';
  out << (opts.db_column ? "z_m,power_w,power_db5\n" : "z_m,power_w\n");
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << e17(t.z_at(i)) << ',' << e17(t.samples_w[i]);
    if (opts.db_column) out << ',' << g17(display_db(t.samples_w[i]));
    out << '\n';
  }
}

Trace read_trace_csv(std::istream& in, const std::string& source) {
  Trace t;
  bool have_wavelength = false;
  bool have_dz = false;
  bool have_z0 = false;
  bool header_seen = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto s = trim(line);
    if (s.empty()) continue;
    if (s.front() == '#') {
      const auto body = trim(s.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      const auto key = trim(body.substr(0, eq));
      const auto val = trim(body.substr(eq + 1));
      auto bad = [&] { return ParseError(source, lineno, "bad value for '" + std::string(key) + "'"); };
      if (key == "wavelength_nm") {
        if (!parse_number(val, t.meta.wavelength_nm)) throw bad();
        have_wavelength = true;
      } else if (key == "pulse_width_ns") {
        double ns = 0.0;
        if (!parse_number(val, ns) || !(ns > 0.0)) throw bad();
        t.meta.pulse_width_s = ns / 1e9;
      } else if (key == "dz_m") {
        if (!parse_number(val, t.dz_m) || !(t.dz_m > 0.0)) throw bad();
        have_dz = true;
      } else if (key == "z0_m") {
        if (!parse_number(val, t.z0_m)) throw bad();
        have_z0 = true;
      } else if (key == "topology_id") {
        t.meta.topology_id = std::string(val);
      } else if (key == "averaging") {
        t.meta.averaging_label = std::string(val);
      } else if (key == "seed") {
        std::uint64_t seed = 0;
        if (!parse_number(val, seed)) throw bad();
        t.meta.seed = seed;
      }
      continue;
    }
    if (!header_seen && (std::isalpha(static_cast<unsigned char>(s.front())) != 0)) {
      header_seen = true;
      continue;
    }
    if (!have_wavelength || !have_dz || !have_z0)
      throw ParseError(source, lineno, "data before the wavelength_nm/dz_m/z0_m header keys");
    const auto c1 = s.find(',');
    if (c1 == std::string_view::npos) throw ParseError(source, lineno, "expected z_m,power_w");
    const auto rest = s.substr(c1 + 1);
    const auto c2 = rest.find(',');
    double z = 0.0;
    double p = 0.0;
    if (!parse_number(s.substr(0, c1), z) ||
        !parse_number(c2 == std::string_view::npos ? rest : rest.substr(0, c2), p))
      throw ParseError(source, lineno, "malformed number");
    if (!std::isfinite(p)) throw ParseError(source, lineno, "non-finite power sample");
    const double expect = t.z_at(t.samples_w.size());
    if (std::abs(z - expect) > 1e-9 * std::max(1.0, std::abs(expect)))
      throw ParseError(source, lineno, "distance " + std::string(s.substr(0, c1)) +
                                           " is off the dz_m grid");
    t.samples_w.push_back(p);
  }
  if (t.samples_w.empty()) throw ParseError(source, lineno, "trace holds no samples");
  return t;
}

void save_trace(const std::filesystem::path& path, const Trace& trace,
                const TraceWriteOptions& opts) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  write_trace_csv(f, trace, opts);
  if (!f) throw IoError("write failed for " + path.string());
}

Trace load_trace(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open trace " + path.string());
  return read_trace_csv(f, path.string());
}

}  // namespace dspe
