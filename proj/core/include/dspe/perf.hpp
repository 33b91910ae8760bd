// ============================================================================
// perf.hpp -- optical path loss, dynamic range and detection design curves
//
// Dynamic range is the OTDR convention 5*log10(P0 K'W / sigma_N), always
// quoted for a 100 ns pulse and K = -82 dB. Path loss is one-way:
// opl_db = -5*log10(OPL^2).
// ============================================================================
#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "dspe/model.hpp"

namespace dspe {

inline constexpr double kDrReferencePulseWidth = 100e-9;
inline constexpr double kDrReferenceBackscatterDb = -82.0;

/// OPL^2(z) = f_l / N^2 * 10^(-2 alpha z / 10).
[[nodiscard]] double opl_sq(const PonTopology& topo, const FiberParams& fiber, double z_m);
[[nodiscard]] double opl_db_from_sq(double opl_sq);
[[nodiscard]] double opl_sq_from_db(double opl_db);

/// B(T) at the dynamic-range normalisation (100 ns, -82 dB).
[[nodiscard]] double dr_reference_backscatter();

[[nodiscard]] double dr_from_sigma(double p0_w, double backscatter, double sigma_w);
[[nodiscard]] double sigma_from_dr(double p0_w, double backscatter, double dr_db);

struct ReflectionScenario {
  double rl_e_db = 30.0;
};
struct BackscatterLossScenario {
  double il_e_db = 1.0;
};
/// Loss observed on the ONT plateau; the design point's opl_db is the OPL to
/// the ONT.
struct OntLossScenario {
  double il_e_db = 1.0;
  double rl_ont_db = 40.0;
};
using DesignScenario = std::variant<ReflectionScenario, BackscatterLossScenario, OntLossScenario>;

struct DesignPoint {
  double dr_db = 20.0;
  double opl_db = 15.0;
  double pfa = 1e-4;
  double pd_target = 0.95;
  double pulse_width_s = kDrReferencePulseWidth;
  DesignScenario scenario = ReflectionScenario{};

  void validate() const;
};

/// Closed-form P_D at the design point.
[[nodiscard]] double design_pd(const DesignPoint& point);

/// Largest OPL (dB) with P_D >= pd_target; nullopt if infeasible even at 0 dB.
[[nodiscard]] std::optional<double> max_opl(const DesignPoint& point);

/// Smallest DR (dB) with P_D >= pd_target at point.opl_db; nullopt if
/// infeasible within the search bracket.
[[nodiscard]] std::optional<double> required_dr(const DesignPoint& point);

enum class SweepVariable { dr, opl, rl_e, rl_ont, il };
enum class CurveQuantity { pd, max_opl, required_dr };

struct SweepSpec {
  DesignPoint base;
  SweepVariable variable = SweepVariable::dr;
  CurveQuantity quantity = CurveQuantity::pd;
  double from = 0.0;
  double to = 0.0;
  double step = 1.0;
};

struct CurvePoint {
  double x = 0.0;
  std::optional<double> y;  // empty where the design is infeasible
};

/// Tabulates the requested quantity; from > to yields an empty table.
[[nodiscard]] std::vector<CurvePoint> sweep(const SweepSpec& spec);

}  // namespace dspe
