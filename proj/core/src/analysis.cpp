#include "dspe/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dspe/perf.hpp"

namespace dspe {

namespace {

std::size_t plateau_length(const FiberParams& fiber, const OtdrConfig& otdr, double dz) {
  const double w = spatial_pulse_width_m(fiber, otdr.pulse_width_s);
  return static_cast<std::size_t>(std::max<long long>(1, std::llround(w / dz)));
}

template <class Fn>
std::optional<EstimateResult> guarded_il(EstimateKind kind, std::size_t m, double delta,
                                         std::vector<std::string>& notes, Fn&& fn) {
  try {
    return fn();
  } catch (const EstimationUndefined& e) {
    notes.push_back(std::string(to_string(kind)) + ": log argument not positive, reported as "
                    "break-level");
    return break_level_result(kind, m, e.argument(), e.epsilon(), delta);
  }
}

}  // namespace

std::size_t significant_event_samples(const FiberParams& fiber, const OtdrConfig& otdr) {
  const auto plateau = plateau_length(fiber, otdr, otdr.sample_spacing_m);
  return std::max<std::size_t>(1, (plateau + 1) / 2);
}

TraceAnalysis analyze_trace(const Trace& reference, const Trace& measurement,
                            const AnalysisSetup& setup) {
  if (!reference.same_grid(measurement))
    throw std::invalid_argument("reference and measurement grids differ");
  const auto& topo = setup.topology;
  const auto& fiber = setup.fiber;
  const auto& otdr = setup.otdr;
  topo.validate();
  fiber.validate();

  const std::size_t n = measurement.size();
  const double w = spatial_pulse_width_m(fiber, otdr.pulse_width_s);
  const std::size_t plateau = plateau_length(fiber, otdr, measurement.dz_m);
  std::vector<OntPlateau> onts;
  for (std::size_t b = 0; b < topo.drops.size(); ++b) {
    const double z = topo.ont_position_m(b);
    onts.push_back({b, z, plateau_samples(z, w, measurement.z0_m, measurement.dz_m, n)});
  }

  TraceAnalysis out;
  out.wavelength_nm = measurement.meta.wavelength_nm;
  out.samples = n;
  const auto th = thresholds(reference, otdr.noise_sigma_w, setup.test);
  out.detection = run_tests(measurement, th, setup.test, onts);
  out.family_wise_pfa = -std::expm1(static_cast<double>(n) *
                                    (std::log1p(-setup.test.pfa_reflection) +
                                     std::log1p(-setup.test.pfa_loss)));

  const ErrorModel noise{otdr.noise_sigma_w, setup.delta};
  const double p0 = otdr.pulse_power_w;
  const double bt = backscatter_factor(fiber, otdr.pulse_width_s);

  std::vector<SampleRange> reflection_plateaus;
  for (const auto& e : out.detection.events)
    if (e.kind == EventKind::reflection)
      reflection_plateaus.push_back({e.first, std::min(plateau, n - e.first)});

  for (const auto& e : out.detection.events) {
    EventAnalysis ea;
    ea.event = e;
    if (e.kind == EventKind::reflection) {
      if (e.ambiguous) ea.notes.push_back("reflection on an existing ONT plateau (ambiguous)");
      std::vector<std::size_t> idx;
      for (std::size_t i = e.first; i < std::min(n, e.first + plateau); ++i) idx.push_back(i);
      const double z_event = e.start_m + w / 2.0;
      try {
        ea.return_loss =
            estimate_return_loss(measurement, reference, idx, opl_sq(topo, fiber, z_event), p0, noise);
      } catch (const EstimationUndefined& ex) {
        ea.notes.push_back(ex.what());
      }
    } else {
      std::vector<std::size_t> bs;
      std::vector<double> weights;
      for (std::size_t i = e.first; i <= e.last; ++i) {
        const bool on_plateau =
            std::any_of(onts.begin(), onts.end(), [i](const auto& p) { return p.samples.contains(i); }) ||
            std::any_of(reflection_plateaus.begin(), reflection_plateaus.end(),
                        [i](const auto& r) { return r.contains(i); });
        if (on_plateau) continue;
        bs.push_back(i);
        weights.push_back(opl_sq(topo, fiber, measurement.z_at(i)));
      }
      if (!bs.empty()) {
        ea.il_backscatter =
            guarded_il(EstimateKind::insertion_loss_backscatter, bs.size(), setup.delta, ea.notes,
                       [&] {
                         return estimate_insertion_loss_backscatter(measurement, reference, bs,
                                                                    weights, p0, bt, noise);
                       });
      }
      if (e.branch_hint) {
        const auto& ont = onts[*e.branch_hint];
        std::vector<std::size_t> idx;
        for (std::size_t i = ont.samples.first; i < ont.samples.end(); ++i) idx.push_back(i);
        if (!idx.empty()) {
          const double rl_ont = topo.drops[ont.branch].ont_return_loss_db;
          ea.il_ont = guarded_il(EstimateKind::insertion_loss_ont, idx.size(), setup.delta,
                                 ea.notes, [&] {
                                   return estimate_insertion_loss_ont(
                                       measurement, reference, idx, opl_sq(topo, fiber, ont.z_ont_m),
                                       rl_ont, p0, noise);
                                 });
        }
      }
    }
    out.events.push_back(std::move(ea));
  }
  return out;
}

std::optional<EstimateResult> best_insertion_loss(const EventAnalysis& ev) {
  std::vector<const EstimateResult*> c;
  if (ev.il_backscatter) c.push_back(&*ev.il_backscatter);
  if (ev.il_ont) c.push_back(&*ev.il_ont);
  if (c.empty()) return std::nullopt;
  const EstimateResult* pick = nullptr;
  for (const auto* r : c)
    if (r->lower_db >= kBreakCapDb && (!pick || r->lower_db > pick->lower_db)) pick = r;
  if (pick) return *pick;
  pick = c.front();
  for (const auto* r : c)
    if (r->error_bound_db < pick->error_bound_db) pick = r;
  return *pick;
}

PrimaryFault primary_fault(const TraceAnalysis& analysis, std::size_t min_samples,
                           std::size_t plateau_samples, int gap_tolerance) {
  PrimaryFault pf;
  const auto& evs = analysis.events;
  auto significant = [&](const EventAnalysis& e) {
    return e.event.sample_indices.size() >= min_samples;
  };
  for (std::size_t k = 0; k < evs.size(); ++k) {
    if (evs[k].event.kind == EventKind::loss && significant(evs[k])) {
      pf.loss_event = k;
      break;
    }
  }
  for (std::size_t k = 0; k < evs.size(); ++k) {
    const auto& r = evs[k].event;
    if (r.kind != EventKind::reflection || !significant(evs[k])) continue;
    if (pf.loss_event) {
      const auto& l = evs[*pf.loss_event].event;
      if (r.first <= l.first &&
          l.first <= r.last + plateau_samples + static_cast<std::size_t>(gap_tolerance) + 1) {
        pf.reflection_event = k;
        break;
      }
    } else if (!r.ambiguous) {
      pf.reflection_event = k;
      break;
    }
  }
  return pf;
}

std::optional<FaultEvidence> collect_evidence(std::span<const TraceAnalysis> analyses,
                                              std::size_t min_samples,
                                              std::size_t plateau_samples, int gap_tolerance) {
  FaultEvidence ev;
  for (const auto& a : analyses) {
    const auto pf = primary_fault(a, min_samples, plateau_samples, gap_tolerance);
    if (pf.reflection_event) {
      ev.has_reflection = true;
      const auto& rl = a.events[*pf.reflection_event].return_loss;
      if (rl && !ev.rl_estimate_db) ev.rl_estimate_db = rl->value_db;
    }
    if (!pf.loss_event) return std::nullopt;
    auto il = best_insertion_loss(a.events[*pf.loss_event]);
    if (!il) return std::nullopt;
    ev.il_by_wavelength[a.wavelength_nm] = *il;
  }
  if (ev.il_by_wavelength.empty()) return std::nullopt;
  return ev;
}

}  // namespace dspe
