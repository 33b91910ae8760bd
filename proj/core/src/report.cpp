#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dspe/io.hpp"
#include "dspe/report.hpp"

namespace dspe {

using nlohmann::json;

namespace {

constexpr const char* kReportFormat = "dspe-otdr report v1";

// JSON has no infinities; they travel as strings.
json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double to_num(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ParseError("<json>", 0, "expected a number, got " + j.dump());
}

EstimateKind estimate_kind_from(const std::string& s) {
  for (auto k : {EstimateKind::return_loss, EstimateKind::insertion_loss_backscatter,
                 EstimateKind::insertion_loss_ont})
    if (s == to_string(k)) return k;
  throw ParseError("<json>", 0, "unknown estimate kind '" + s + "'");
}

FaultType fault_type_from(const std::string& s) {
  for (auto t : {FaultType::fiber_break, FaultType::connector_misalignment, FaultType::fiber_bend,
                 FaultType::unknown})
    if (s == to_string(t)) return t;
  throw ParseError("<json>", 0, "unknown fault type '" + s + "'");
}

json estimate_json(const EstimateResult& r) {
  return json{{"kind", to_string(r.kind)},
              {"value_db", num(r.value_db)},
              {"m_used", r.m_used},
              {"lower_db", num(r.lower_db)},
              {"upper_db", num(r.upper_db)},
              {"error_bound_db", num(r.error_bound_db)},
              {"delta", r.delta},
              {"starred_value", num(r.starred_value)},
              {"starred_epsilon", num(r.starred_epsilon)},
              {"break_level", r.break_level}};
}

EstimateResult estimate_from(const json& j) {
  EstimateResult r;
  r.kind = estimate_kind_from(j.at("kind").get<std::string>());
  r.value_db = to_num(j.at("value_db"));
  r.m_used = j.at("m_used").get<std::size_t>();
  r.lower_db = to_num(j.at("lower_db"));
  r.upper_db = to_num(j.at("upper_db"));
  r.error_bound_db = to_num(j.at("error_bound_db"));
  r.delta = j.at("delta").get<double>();
  r.starred_value = to_num(j.at("starred_value"));
  r.starred_epsilon = to_num(j.at("starred_epsilon"));
  r.break_level = j.at("break_level").get<bool>();
  return r;
}

json flag_indices(const std::vector<bool>& flags) {
  json out = json::array();
  for (std::size_t i = 0; i < flags.size(); ++i)
    if (flags[i]) out.push_back(i);
  return out;
}

std::vector<bool> flags_from(const json& j, std::size_t n) {
  std::vector<bool> out(n, false);
  for (const auto& i : j) {
    const auto k = i.get<std::size_t>();
    if (k >= n) throw ParseError("<json>", 0, "flag index beyond trace length");
    out[k] = true;
  }
  return out;
}

json event_json(const EventAnalysis& ea) {
  const auto& e = ea.event;
  json j{{"kind", e.kind == EventKind::reflection ? "reflection" : "loss"},
         {"first", e.first},
         {"last", e.last},
         {"start_m", e.start_m},
         {"end_m", e.end_m},
         {"sample_indices", e.sample_indices},
         {"on_ont_plateau", e.on_ont_plateau},
         {"branch_hint", e.branch_hint ? json(*e.branch_hint) : json(nullptr)},
         {"ambiguous", e.ambiguous},
         {"notes", ea.notes}};
  if (ea.return_loss) j["return_loss"] = estimate_json(*ea.return_loss);
  if (ea.il_backscatter) j["il_backscatter"] = estimate_json(*ea.il_backscatter);
  if (ea.il_ont) j["il_ont"] = estimate_json(*ea.il_ont);
  return j;
}

EventAnalysis event_from(const json& j) {
  EventAnalysis ea;
  auto& e = ea.event;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "reflection") {
    e.kind = EventKind::reflection;
  } else if (kind == "loss") {
    e.kind = EventKind::loss;
  } else {
    throw ParseError("<json>", 0, "unknown event kind '" + kind + "'");
  }
  e.first = j.at("first").get<std::size_t>();
  e.last = j.at("last").get<std::size_t>();
  e.start_m = j.at("start_m").get<double>();
  e.end_m = j.at("end_m").get<double>();
  e.sample_indices = j.at("sample_indices").get<std::vector<std::size_t>>();
  e.on_ont_plateau = j.at("on_ont_plateau").get<bool>();
  if (!j.at("branch_hint").is_null()) e.branch_hint = j["branch_hint"].get<std::size_t>();
  e.ambiguous = j.at("ambiguous").get<bool>();
  ea.notes = j.value("notes", std::vector<std::string>{});
  if (j.contains("return_loss")) ea.return_loss = estimate_from(j["return_loss"]);
  if (j.contains("il_backscatter")) ea.il_backscatter = estimate_from(j["il_backscatter"]);
  if (j.contains("il_ont")) ea.il_ont = estimate_from(j["il_ont"]);
  return ea;
}

json evidence_json(const FaultEvidence& ev) {
  json il = json::object();
  for (const auto& [nm, r] : ev.il_by_wavelength) il[std::to_string(nm)] = estimate_json(r);
  return json{{"has_reflection", ev.has_reflection},
              {"rl_estimate_db", ev.rl_estimate_db ? num(*ev.rl_estimate_db) : json(nullptr)},
              {"il_by_wavelength", il}};
}

FaultEvidence evidence_from(const json& j) {
  FaultEvidence ev;
  ev.has_reflection = j.at("has_reflection").get<bool>();
  if (j.contains("rl_estimate_db") && !j["rl_estimate_db"].is_null())
    ev.rl_estimate_db = to_num(j["rl_estimate_db"]);
  for (const auto& [k, v] : j.at("il_by_wavelength").items()) {
    int nm = 0;
    try {
      nm = std::stoi(k);
    } catch (const std::exception&) {
      throw ParseError("<json>", 0, "bad wavelength key '" + k + "'");
    }
    ev.il_by_wavelength[nm] = estimate_from(v);
  }
  return ev;
}

json classification_json(const Classification& c) {
  return json{{"label", to_string(c.label)}, {"rationale", c.rationale}};
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("<json>", 0, e.what());
  }
}

template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ParseError("<json>", 0, e.what());
  }
}

}  // namespace

std::string report_to_json(const DetectionDocument& doc, int indent) {
  json traces = json::array();
  for (const auto& t : doc.traces) {
    json events = json::array();
    for (const auto& e : t.events) events.push_back(event_json(e));
    traces.push_back(json{{"wavelength_nm", t.wavelength_nm},
                          {"samples", t.samples},
                          {"family_wise_pfa", t.family_wise_pfa},
                          {"reflection_flags", flag_indices(t.detection.reflection_flags)},
                          {"loss_flags", flag_indices(t.detection.loss_flags)},
                          {"events", events}});
  }
  json j{{"format", kReportFormat}, {"topology_id", doc.topology_id}, {"traces", traces}};
  if (doc.evidence) j["evidence"] = evidence_json(*doc.evidence);
  if (doc.classification) j["classification"] = classification_json(*doc.classification);
  return j.dump(indent);
}

DetectionDocument report_from_json(const std::string& text) {
  const auto j = parse_json(text);
  return guarded([&] {
    if (j.value("format", std::string{}) != kReportFormat)
      throw ParseError("<json>", 0, "not a detection report");
    DetectionDocument doc;
    doc.topology_id = j.at("topology_id").get<std::string>();
    for (const auto& tj : j.at("traces")) {
      TraceAnalysis t;
      t.wavelength_nm = tj.at("wavelength_nm").get<int>();
      t.samples = tj.at("samples").get<std::size_t>();
      t.family_wise_pfa = tj.at("family_wise_pfa").get<double>();
      t.detection.reflection_flags = flags_from(tj.at("reflection_flags"), t.samples);
      t.detection.loss_flags = flags_from(tj.at("loss_flags"), t.samples);
      for (const auto& ej : tj.at("events")) {
        t.events.push_back(event_from(ej));
        t.detection.events.push_back(t.events.back().event);
      }
      doc.traces.push_back(std::move(t));
    }
    if (j.contains("evidence")) doc.evidence = evidence_from(j["evidence"]);
    if (j.contains("classification")) {
      const auto& c = j["classification"];
      doc.classification = Classification{fault_type_from(c.at("label").get<std::string>()),
                                          c.value("rationale", std::string{})};
    }
    return doc;
  });
}

std::string estimate_to_json(const EstimateResult& r, int indent) {
  return estimate_json(r).dump(indent);
}

std::string classification_to_json(const Classification& c, int indent) {
  return classification_json(c).dump(indent);
}

FaultEvidence evidence_from_json(const std::string& text) {
  const auto j = parse_json(text);
  return guarded([&] {
    if (j.contains("evidence")) return evidence_from(j["evidence"]);
    if (j.contains("format")) throw ParseError("<json>", 0, "report carries no evidence");
    return evidence_from(j);
  });
}

std::string evidence_to_json(const FaultEvidence& ev, int indent) {
  return evidence_json(ev).dump(indent);
}

void save_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("write failed for " + path.string());
}

std::string load_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace dspe
