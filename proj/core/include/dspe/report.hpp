// ============================================================================
// report.hpp -- JSON detection reports
// ============================================================================
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dspe/analysis.hpp"
#include "dspe/classify.hpp"

namespace dspe {

struct DetectionDocument {
  std::string topology_id;
  std::vector<TraceAnalysis> traces;
  std::optional<FaultEvidence> evidence;
  std::optional<Classification> classification;
};

[[nodiscard]] std::string report_to_json(const DetectionDocument& doc, int indent = 2);
[[nodiscard]] DetectionDocument report_from_json(const std::string& text);

[[nodiscard]] std::string estimate_to_json(const EstimateResult& r, int indent = 2);
[[nodiscard]] std::string classification_to_json(const Classification& c, int indent = 2);

/// Reads classification evidence either from a bare evidence object or from
/// the `evidence` member of a detection report.
[[nodiscard]] FaultEvidence evidence_from_json(const std::string& text);
[[nodiscard]] std::string evidence_to_json(const FaultEvidence& ev, int indent = 2);

void save_text(const std::filesystem::path& path, const std::string& text);
[[nodiscard]] std::string load_text(const std::filesystem::path& path);

}  // namespace dspe
