// ============================================================================
// analysis.hpp -- reference comparison workflow for one or more wavelengths
//
// thresholds -> per-sample tests -> event segmentation -> per-event ML
// estimates -> (dual wavelength) fault evidence and classification.
// ============================================================================
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dspe/classify.hpp"
#include "dspe/detect.hpp"
#include "dspe/estimate.hpp"
#include "dspe/model.hpp"

namespace dspe {

struct AnalysisSetup {
  PonTopology topology;
  FiberParams fiber;
  OtdrConfig otdr;  // noise_sigma_w drives the thresholds
  TestConfig test;
  double delta = 0.01;
};

struct EventAnalysis {
  DetectedEvent event;
  std::optional<EstimateResult> return_loss;
  std::optional<EstimateResult> il_backscatter;
  std::optional<EstimateResult> il_ont;
  std::vector<std::string> notes;
};

struct TraceAnalysis {
  int wavelength_nm = 1550;
  std::size_t samples = 0;
  double family_wise_pfa = 0.0;  // per-trace, both tests
  DetectionReport detection;
  std::vector<EventAnalysis> events;
};

/// Minimum run length for an event to count as a physical reflection or loss
/// rather than isolated false alarms: half the pulse plateau.
[[nodiscard]] std::size_t significant_event_samples(const FiberParams& fiber,
                                                    const OtdrConfig& otdr);

[[nodiscard]] TraceAnalysis analyze_trace(const Trace& reference, const Trace& measurement,
                                          const AnalysisSetup& setup);

/// Picks the IL estimate with the smallest dB bound, preferring one whose
/// whole interval sits at break level.
[[nodiscard]] std::optional<EstimateResult> best_insertion_loss(const EventAnalysis& ev);

/// First significant loss event (or reflection when no loss is found) and its
/// associated leading-edge reflection.
struct PrimaryFault {
  std::optional<std::size_t> loss_event;
  std::optional<std::size_t> reflection_event;
};
[[nodiscard]] PrimaryFault primary_fault(const TraceAnalysis& analysis, std::size_t min_samples,
                                         std::size_t plateau_samples, int gap_tolerance);

/// Builds classification evidence from per-wavelength analyses; nullopt when
/// no significant event is present at some wavelength.
[[nodiscard]] std::optional<FaultEvidence> collect_evidence(
    std::span<const TraceAnalysis> analyses, std::size_t min_samples,
    std::size_t plateau_samples, int gap_tolerance);

}  // namespace dspe
