#include "dspe_cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "dspe/analysis.hpp"
#include "dspe/classify.hpp"
#include "dspe/io.hpp"
#include "dspe/perf.hpp"
#include "dspe/reference_store.hpp"
#include "dspe/report.hpp"
#include "dspe/validation.hpp"

namespace dspe::cli {

namespace {

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string db_text(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt("%.3f", v);
}

void emit(const std::optional<std::filesystem::path>& path, const std::string& text,
          std::ostream& out) {
  if (path) {
    save_text(*path, text);
  } else {
    out << text;
  }
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t stream) {
  auto rng = chunk_rng(seed, stream);
  return rng();
}

ReferenceStore open_store(const std::optional<std::filesystem::path>& root) {
  return ReferenceStore(root ? *root : ReferenceStore::default_root());
}

// The trace carries the pulse width and grid actually used.
AnalysisSetup setup_for_trace(const Scenario& sc, const Trace& t, std::optional<double> pfa,
                              std::optional<double> delta) {
  auto setup = sc.setup_for(t.meta.wavelength_nm);
  setup.otdr.pulse_width_s = t.meta.pulse_width_s;
  setup.otdr.sample_spacing_m = t.dz_m;
  if (pfa) setup.test.pfa_reflection = setup.test.pfa_loss = *pfa;
  if (delta) setup.delta = *delta;
  setup.test.validate();
  return setup;
}

std::size_t plateau_count(const AnalysisSetup& s) {
  const double w = spatial_pulse_width_m(s.fiber, s.otdr.pulse_width_s);
  return static_cast<std::size_t>(std::max<long long>(1, std::llround(w / s.otdr.sample_spacing_m)));
}

std::string describe_estimate(const char* label, const EstimateResult& r) {
  if (r.break_level && std::isinf(r.value_db))
    return fmt("%s >= %s dB (break level)", label, db_text(r.lower_db).c_str());
  return fmt("%s %s dB [%s, %s]", label, db_text(r.value_db).c_str(), db_text(r.lower_db).c_str(),
             db_text(r.upper_db).c_str());
}

void summarise(const TraceAnalysis& a, const Trace& meas, bool db, std::ostream& s) {
  s << fmt("%d nm: %zu event(s), %zu samples, family-wise P_FA %.3g\n", a.wavelength_nm,
           a.events.size(), a.samples, a.family_wise_pfa);
  for (const auto& e : a.events) {
    const auto& ev = e.event;
    s << fmt("  %-10s %9.1f - %9.1f m  (%zu flagged)", ev.kind == EventKind::reflection ? "reflection" : "loss",
             ev.start_m, ev.end_m, ev.sample_indices.size());
    if (db) s << fmt("  level %s dB", db_text(display_db(meas.samples_w[ev.first])).c_str());
    if (e.return_loss) s << "  " << describe_estimate("RL", *e.return_loss);
    if (e.il_backscatter) s << "  " << describe_estimate("IL(bs)", *e.il_backscatter);
    if (e.il_ont) s << "  " << describe_estimate("IL(ont)", *e.il_ont);
    if (ev.ambiguous) s << "  ambiguous";
    s << '\n';
  }
}

const char* x_column(SweepVariable v) {
  switch (v) {
    case SweepVariable::dr: return "dr_db";
    case SweepVariable::opl: return "opl_db";
    case SweepVariable::rl_e: return "rl_e_db";
    case SweepVariable::rl_ont: return "rl_ont_db";
    case SweepVariable::il: return "il_e_db";
  }
  return "x";
}

const char* y_column(CurveQuantity q) {
  switch (q) {
    case CurveQuantity::pd: return "pd";
    case CurveQuantity::max_opl: return "max_opl_db";
    case CurveQuantity::required_dr: return "required_dr_db";
  }
  return "y";
}

}  // namespace

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParseError;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const UnderpoweredSuite& e) {
    err << "refused: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

// ---------------------------------------------------------------------------

int cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream&) {
  const auto sc = load_scenario(o.scenario);
  const std::uint64_t seed = o.seed.value_or(sc.seed);
  std::error_code ec;
  std::filesystem::create_directories(o.out_dir, ec);
  if (ec) throw IoError("cannot create " + o.out_dir.string() + ": " + ec.message());
  const TraceWriteOptions wopts{o.db};
  for (const int nm : sc.wavelengths()) {
    const auto& fiber = sc.fiber(nm);
    const auto otdr = sc.otdr_for(nm);
    Trace ref;
    if (sc.reference_averages > 0) {
      ref = averaged_reference(sc.topology, fiber, otdr, sc.reference_averages,
                               derived_seed(seed, (1ULL << 32) + static_cast<std::uint64_t>(nm)));
      ref.meta.averaging_label = "average of " + std::to_string(sc.reference_averages);
    } else {
      ref = reference_trace(sc.topology, fiber, otdr);
      ref.meta.averaging_label = "noiseless";
    }
    auto meas = faulted_trace(sc.topology, fiber, otdr, sc.faults);
    const auto mseed = derived_seed(seed, static_cast<std::uint64_t>(nm));
    meas = add_noise(meas, otdr.noise_sigma_w, mseed);
    meas.meta.averaging_label = otdr.noise_sigma_w > 0.0 ? "noisy" : "noiseless";

    const auto ref_path = o.out_dir / ("reference_" + std::to_string(nm) + "nm.csv");
    const auto meas_path = o.out_dir / ("measurement_" + std::to_string(nm) + "nm.csv");
    save_trace(ref_path, ref, wopts);
    save_trace(meas_path, meas, wopts);
    out << ref_path.string() << '\n' << meas_path.string() << '\n';
  }
  return kOk;
}

int cmd_detect(const DetectOptions& o, std::ostream& out, std::ostream& err) {
  if (o.measurements.empty()) throw std::invalid_argument("at least one --measurement is required");
  if (!o.references.empty() && o.references.size() != o.measurements.size())
    throw std::invalid_argument("give one --reference per --measurement, or none to use the store");
  const auto sc = load_scenario(o.scenario);

  DetectionDocument doc;
  doc.topology_id = sc.topology.id;
  std::vector<Trace> measurements;
  std::vector<AnalysisSetup> setups;
  for (std::size_t k = 0; k < o.measurements.size(); ++k) {
    auto meas = load_trace(o.measurements[k]);
    Trace ref;
    if (!o.references.empty()) {
      ref = load_trace(o.references[k]);
    } else {
      const auto store = open_store(o.store);
      const auto key = ReferenceKey::of(meas);
      auto found = store.find(key);
      if (!found) throw IoError("missing reference: no stored trace for " + key.str());
      ref = std::move(*found);
    }
    if (!ref.same_grid(meas))
      throw std::invalid_argument("grid mismatch between reference and " +
                                  o.measurements[k].string());
    if (ref.meta.wavelength_nm != meas.meta.wavelength_nm)
      throw std::invalid_argument("reference and measurement wavelengths differ");
    auto setup = setup_for_trace(sc, meas, o.pfa, o.delta);
    doc.traces.push_back(analyze_trace(ref, meas, setup));
    measurements.push_back(std::move(meas));
    setups.push_back(std::move(setup));
  }

  const ClassifierConfig rules;
  bool dual = false;
  for (const auto& a : doc.traces)
    if (a.wavelength_nm == rules.short_wavelength_nm) dual = true;
  dual = dual && std::any_of(doc.traces.begin(), doc.traces.end(), [&](const TraceAnalysis& a) {
           return a.wavelength_nm == rules.long_wavelength_nm;
         });
  if (dual) {
    std::vector<TraceAnalysis> pair;
    for (const auto& a : doc.traces)
      if (a.wavelength_nm == rules.short_wavelength_nm || a.wavelength_nm == rules.long_wavelength_nm)
        pair.push_back(a);
    const auto& s0 = setups.front();
    doc.evidence = collect_evidence(pair, significant_event_samples(s0.fiber, s0.otdr),
                                    plateau_count(s0), s0.test.gap_tolerance_samples);
    if (doc.evidence) doc.classification = classify(*doc.evidence, rules);
  }

  const auto json = report_to_json(doc) + "\n";
  std::ostream& summary = o.out ? out : err;
  for (std::size_t k = 0; k < doc.traces.size(); ++k)
    summarise(doc.traces[k], measurements[k], o.db, summary);
  if (dual && !doc.evidence)
    summary << "classification skipped: no significant loss event at both wavelengths\n";
  if (doc.classification)
    summary << "classification: " << to_string(doc.classification->label) << " ("
            << doc.classification->rationale << ")\n";
  emit(o.out, json, out);
  return kOk;
}

int cmd_estimate(const EstimateOptions& o, std::ostream& out, std::ostream&) {
  const auto sc = load_scenario(o.scenario);
  const auto ref = load_trace(o.reference);
  const auto meas = load_trace(o.measurement);
  if (!ref.same_grid(meas)) throw std::invalid_argument("grid mismatch between reference and measurement");
  const auto setup = setup_for_trace(sc, meas, std::nullopt, o.delta);
  if (!(o.to_m >= o.from_m)) throw std::invalid_argument("--to-m must not precede --from-m");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < meas.size(); ++i)
    if (meas.z_at(i) >= o.from_m && meas.z_at(i) <= o.to_m) idx.push_back(i);
  if (idx.empty()) throw std::invalid_argument("no samples inside the requested window");

  const ErrorModel noise{setup.otdr.noise_sigma_w, setup.delta};
  const double p0 = setup.otdr.pulse_power_w;
  EstimateResult r;
  switch (o.mode) {
    case EstimateMode::return_loss: {
      const double z = o.event_m > 0.0 ? o.event_m : 0.5 * (o.from_m + o.to_m);
      r = estimate_return_loss(meas, ref, idx, opl_sq(setup.topology, setup.fiber, z), p0, noise);
      break;
    }
    case EstimateMode::il_backscatter: {
      std::vector<double> w;
      for (const auto i : idx) w.push_back(opl_sq(setup.topology, setup.fiber, meas.z_at(i)));
      r = estimate_insertion_loss_backscatter(
          meas, ref, idx, w, p0, backscatter_factor(setup.fiber, setup.otdr.pulse_width_s), noise);
      break;
    }
    case EstimateMode::il_ont: {
      if (o.branch >= setup.topology.drops.size()) throw std::invalid_argument("no such branch");
      const double z = setup.topology.ont_position_m(o.branch);
      r = estimate_insertion_loss_ont(meas, ref, idx, opl_sq(setup.topology, setup.fiber, z),
                                      setup.topology.drops[o.branch].ont_return_loss_db, p0, noise);
      break;
    }
  }
  emit(o.out, estimate_to_json(r) + "\n", out);
  return kOk;
}

int cmd_classify(const ClassifyOptions& o, std::ostream& out, std::ostream&) {
  const auto ev = evidence_from_json(load_text(o.input));
  emit(o.out, classification_to_json(classify(ev)) + "\n", out);
  return kOk;
}

int cmd_perf(const PerfOptions& o, std::ostream& out, std::ostream& err) {
  SweepSpec spec;
  auto& p = spec.base;
  p.dr_db = o.dr_db;
  p.opl_db = o.opl_db;
  p.pfa = o.pfa;
  p.pd_target = o.pd_target;
  p.pulse_width_s = o.pulse_width_ns / 1e9;
  if (o.scenario == "reflection") {
    p.scenario = ReflectionScenario{o.rl_e_db};
  } else if (o.scenario == "loss_backscatter") {
    p.scenario = BackscatterLossScenario{o.il_e_db};
  } else if (o.scenario == "loss_ont") {
    p.scenario = OntLossScenario{o.il_e_db, o.rl_ont_db};
  } else {
    throw std::invalid_argument("unknown scenario '" + o.scenario + "'");
  }
  if (o.quantity == "pd") {
    spec.quantity = CurveQuantity::pd;
  } else if (o.quantity == "max_opl") {
    spec.quantity = CurveQuantity::max_opl;
  } else if (o.quantity == "required_dr") {
    spec.quantity = CurveQuantity::required_dr;
  } else {
    throw std::invalid_argument("unknown quantity '" + o.quantity + "'");
  }
  const std::pair<const char*, SweepVariable> vars[] = {{"dr", SweepVariable::dr},
                                                       {"opl", SweepVariable::opl},
                                                       {"rl_e", SweepVariable::rl_e},
                                                       {"rl_ont", SweepVariable::rl_ont},
                                                       {"il", SweepVariable::il}};
  const auto it = std::find_if(std::begin(vars), std::end(vars),
                               [&](const auto& v) { return o.vary == v.first; });
  if (it == std::end(vars)) throw std::invalid_argument("unknown sweep variable '" + o.vary + "'");
  spec.variable = it->second;
  spec.from = o.from;
  spec.to = o.to;
  spec.step = o.step;
  p.validate();

  const auto curve = sweep(spec);
  std::ostringstream csv;
  csv << x_column(spec.variable) << ',' << y_column(spec.quantity) << '\n';
  std::size_t feasible = 0;
  for (const auto& pt : curve) {
    csv << fmt("%.6g", pt.x) << ',';
    if (pt.y) {
      csv << fmt("%.6g", *pt.y);
      ++feasible;
    }
    csv << '\n';
  }
  emit(o.out, csv.str(), out);
  if (!curve.empty() && feasible == 0) {
    err << "infeasible: no point of the sweep reaches P_D >= " << o.pd_target << '\n';
    return kInfeasible;
  }
  return kOk;
}

int cmd_validate(const ValidateOptions& o, std::ostream& out, std::ostream&) {
  std::vector<std::string> suites;
  for (const auto& s : o.suites.empty() ? std::vector<std::string>{"all"} : o.suites) {
    if (s == "all") {
      suites.insert(suites.end(), suite_names().begin(), suite_names().end());
    } else {
      suites.push_back(s);
    }
  }
  const MonteCarloConfig mc{o.seed, o.workers};
  bool ok = true;
  for (const auto& name : suites) {
    const auto r = run_suite(name, o.trials, mc);
    out << fmt("%s %s (%llu trials)\n", r.passed() ? "PASS" : "FAIL", r.suite.c_str(),
               static_cast<unsigned long long>(r.trials));
    for (const auto& c : r.checks)
      out << "  " << (c.passed ? "ok   " : "FAIL ") << c.name << ": " << c.detail << '\n';
    ok = ok && r.passed();
  }
  return ok ? kOk : kValidationFailed;
}

int cmd_store_add(const StoreAddOptions& o, std::ostream& out, std::ostream&) {
  auto store = open_store(o.store);
  const auto e = store.add(load_trace(o.trace), o.replace);
  out << e.key.str() << ' ' << e.file << ' ' << e.sha256 << '\n';
  return kOk;
}

int cmd_store_get(const StoreGetOptions& o, std::ostream& out, std::ostream&) {
  const auto store = open_store(o.store);
  const ReferenceKey key{o.network, o.wavelength_nm,
                         static_cast<std::int64_t>(std::llround(o.pulse_width_ns * 1000.0))};
  const auto t = store.get(key);
  std::ostringstream csv;
  write_trace_csv(csv, t, TraceWriteOptions{o.db});
  emit(o.out, csv.str(), out);
  return kOk;
}

int cmd_store_list(const StoreListOptions& o, std::ostream& out, std::ostream&) {
  const auto store = open_store(o.store);
  for (const auto& e : store.list()) out << e.key.str() << ' ' << e.file << ' ' << e.sha256 << '\n';
  return kOk;
}

}  // namespace dspe::cli
