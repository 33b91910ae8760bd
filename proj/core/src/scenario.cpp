#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <stdexcept>

#include <yaml-cpp/yaml.h>

#include "dspe/io.hpp"
#include "dspe/perf.hpp"

namespace dspe {

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& n, const std::string& what) const {
    const int line = n.IsDefined() && n.Mark().line >= 0 ? n.Mark().line + 1 : 0;
    throw ParseError(source_, line, what);
  }

  void require_map(const YAML::Node& n, const std::string& name) const {
    if (!n.IsMap()) fail(n, "'" + name + "' must be a mapping");
  }

  void allow_keys(const YAML::Node& n, const std::string& section,
                  std::initializer_list<const char*> keys) const {
    for (const auto& kv : n) {
      const auto key = kv.first.as<std::string>();
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; }))
        fail(kv.first, "unknown key '" + key + "' in " + section);
    }
  }

  template <class T>
  T get(const YAML::Node& n, const std::string& name) const {
    if (!n.IsScalar()) fail(n, "'" + name + "' must be a scalar");
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, "bad value '" + n.Scalar() + "' for '" + name + "'");
    }
  }

  template <class T>
  void opt(const YAML::Node& parent, const char* key, T& out) const {
    if (const auto n = parent[key]) out = get<T>(n, key);
  }

  template <class T>
  T req(const YAML::Node& parent, const char* key, const std::string& section) const {
    const auto n = parent[key];
    if (!n) fail(parent, "missing '" + std::string(key) + "' in " + section);
    return get<T>(n, key);
  }

 private:
  std::string source_;
};

PonTopology parse_topology(const Reader& r, const YAML::Node& n) {
  r.require_map(n, "topology");
  r.allow_keys(n, "topology",
               {"id", "feeder_length_m", "split_ratio", "excess_loss_db", "drops"});
  PonTopology t;
  r.opt(n, "id", t.id);
  t.feeder_length_m = r.req<double>(n, "feeder_length_m", "topology");
  t.split_ratio = r.req<int>(n, "split_ratio", "topology");
  r.opt(n, "excess_loss_db", t.excess_loss_db);
  const auto drops = n["drops"];
  if (!drops || !drops.IsSequence() || drops.size() == 0)
    r.fail(n, "topology needs a non-empty 'drops' list");
  for (const auto& d : drops) {
    r.require_map(d, "drops entry");
    r.allow_keys(d, "drops entry", {"length_m", "ont_return_loss_db"});
    DropBranch b;
    b.length_m = r.req<double>(d, "length_m", "drops entry");
    r.opt(d, "ont_return_loss_db", b.ont_return_loss_db);
    t.drops.push_back(b);
  }
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    r.fail(n, e.what());
  }
  return t;
}

std::map<int, FiberParams> parse_fibers(const Reader& r, const YAML::Node& n) {
  r.require_map(n, "fibers");
  std::map<int, FiberParams> out;
  for (const auto& kv : n) {
    const int nm = r.get<int>(kv.first, "fiber wavelength");
    const auto& f = kv.second;
    r.require_map(f, "fiber");
    r.allow_keys(f, "fiber", {"backscatter_db", "attenuation_db_per_km", "group_index"});
    FiberParams p;
    r.opt(f, "backscatter_db", p.backscatter_db);
    r.opt(f, "attenuation_db_per_km", p.attenuation_db_per_km);
    r.opt(f, "group_index", p.group_index);
    try {
      p.validate();
    } catch (const std::invalid_argument& e) {
      r.fail(f, e.what());
    }
    if (!out.emplace(nm, p).second) r.fail(kv.first, "duplicate fiber wavelength");
  }
  if (out.empty()) r.fail(n, "at least one fiber wavelength is required");
  return out;
}

void parse_otdr(const Reader& r, const YAML::Node& n, Scenario& s) {
  r.require_map(n, "otdr");
  r.allow_keys(n, "otdr",
               {"pulse_power_w", "pulse_width_ns", "noise_sigma_w", "dynamic_range_db",
                "sample_spacing_m", "range_m", "reference_averages"});
  auto& o = s.otdr;
  r.opt(n, "pulse_power_w", o.pulse_power_w);
  if (const auto w = n["pulse_width_ns"]) o.pulse_width_s = r.get<double>(w, "pulse_width_ns") / 1e9;
  r.opt(n, "sample_spacing_m", o.sample_spacing_m);
  if (const auto rm = n["range_m"]) o.range_m = r.get<double>(rm, "range_m");
  r.opt(n, "reference_averages", s.reference_averages);
  if (s.reference_averages < 0) r.fail(n["reference_averages"], "reference_averages must be >= 0");
  const auto sig = n["noise_sigma_w"];
  const auto dr = n["dynamic_range_db"];
  if (sig && dr) r.fail(dr, "give either noise_sigma_w or dynamic_range_db, not both");
  if (sig) o.noise_sigma_w = r.get<double>(sig, "noise_sigma_w");
  if (dr) {
    if (!(o.pulse_power_w > 0.0)) r.fail(n, "pulse_power_w must be positive");
    o.noise_sigma_w =
        sigma_from_dr(o.pulse_power_w, dr_reference_backscatter(), r.get<double>(dr, "dynamic_range_db"));
  }
}

FaultSpec parse_fault(const Reader& r, const YAML::Node& n, const std::set<int>& wavelengths) {
  r.require_map(n, "faults entry");
  r.allow_keys(n, "faults entry", {"branch", "position_m", "return_loss_db", "insertion_loss_db"});
  FaultSpec f;
  r.opt(n, "branch", f.branch_index);
  f.position_m = r.req<double>(n, "position_m", "faults entry");
  if (const auto rl = n["return_loss_db"]) f.return_loss_db = r.get<double>(rl, "return_loss_db");
  if (const auto il = n["insertion_loss_db"]) {
    if (il.IsScalar()) {
      const double v = r.get<double>(il, "insertion_loss_db");
      for (int nm : wavelengths) f.insertion_loss_db[nm] = v;
    } else if (il.IsMap()) {
      for (const auto& kv : il) {
        const int nm = r.get<int>(kv.first, "insertion_loss_db wavelength");
        if (!wavelengths.count(nm))
          r.fail(kv.first, "insertion loss given for undefined wavelength " + std::to_string(nm));
        f.insertion_loss_db[nm] = r.get<double>(kv.second, "insertion_loss_db");
      }
    } else {
      r.fail(il, "insertion_loss_db must be a number or a wavelength mapping");
    }
  }
  return f;
}

void parse_test(const Reader& r, const YAML::Node& n, Scenario& s) {
  r.require_map(n, "test");
  r.allow_keys(n, "test",
               {"pfa", "pfa_reflection", "pfa_loss", "gap_tolerance_samples", "delta"});
  if (n["pfa"] && (n["pfa_reflection"] || n["pfa_loss"]))
    r.fail(n["pfa"], "'pfa' cannot be combined with pfa_reflection/pfa_loss");
  if (const auto p = n["pfa"]) s.test.pfa_reflection = s.test.pfa_loss = r.get<double>(p, "pfa");
  r.opt(n, "pfa_reflection", s.test.pfa_reflection);
  r.opt(n, "pfa_loss", s.test.pfa_loss);
  r.opt(n, "gap_tolerance_samples", s.test.gap_tolerance_samples);
  r.opt(n, "delta", s.delta);
  try {
    s.test.validate();
  } catch (const std::invalid_argument& e) {
    r.fail(n, e.what());
  }
  if (!(s.delta > 0.0 && s.delta < 1.0)) r.fail(n["delta"], "delta must lie in (0, 1)");
}

}  // namespace

std::vector<int> Scenario::wavelengths() const {
  std::vector<int> out;
  for (const auto& [nm, f] : fibers) out.push_back(nm);
  return out;
}

const FiberParams& Scenario::fiber(int wavelength_nm) const {
  const auto it = fibers.find(wavelength_nm);
  if (it == fibers.end())
    throw std::invalid_argument("scenario defines no fiber at " + std::to_string(wavelength_nm) +
                                " nm");
  return it->second;
}

OtdrConfig Scenario::otdr_for(int wavelength_nm) const {
  (void)fiber(wavelength_nm);
  OtdrConfig o = otdr;
  o.wavelength_nm = wavelength_nm;
  return o;
}

AnalysisSetup Scenario::setup_for(int wavelength_nm) const {
  return AnalysisSetup{topology, fiber(wavelength_nm), otdr_for(wavelength_nm), test, delta};
}

Scenario parse_scenario(std::string_view text, const std::string& source) {
  const Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ParseError(source, e.mark.line >= 0 ? e.mark.line + 1 : 0, e.msg);
  }
  if (!root.IsMap()) throw ParseError(source, 0, "scenario must be a mapping");
  r.allow_keys(root, "scenario", {"topology", "fibers", "otdr", "faults", "test", "seed"});

  Scenario s;
  if (!root["topology"]) throw ParseError(source, 0, "missing 'topology' section");
  if (!root["fibers"]) throw ParseError(source, 0, "missing 'fibers' section");
  if (!root["otdr"]) throw ParseError(source, 0, "missing 'otdr' section");
  s.topology = parse_topology(r, root["topology"]);
  s.fibers = parse_fibers(r, root["fibers"]);
  parse_otdr(r, root["otdr"], s);
  if (const auto t = root["test"]) parse_test(r, t, s);
  r.opt(root, "seed", s.seed);

  std::set<int> nms;
  for (const auto& [nm, f] : s.fibers) nms.insert(nm);
  if (const auto faults = root["faults"]) {
    if (!faults.IsSequence()) r.fail(faults, "'faults' must be a list");
    for (const auto& fn : faults) {
      auto f = parse_fault(r, fn, nms);
      try {
        f.validate(s.topology);
      } catch (const std::invalid_argument& e) {
        r.fail(fn, e.what());
      }
      s.faults.push_back(std::move(f));
    }
  }
  for (const auto& [nm, f] : s.fibers) {
    try {
      s.otdr_for(nm).validate(f);
    } catch (const std::invalid_argument& e) {
      r.fail(root["otdr"], e.what());
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open scenario " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_scenario(ss.str(), path.string());
}

}  // namespace dspe
