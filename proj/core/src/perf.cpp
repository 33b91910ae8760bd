#include "dspe/perf.hpp"

#include <cmath>
#include <stdexcept>

#include "dspe/detect.hpp"

namespace dspe {

namespace {

constexpr double kBracketLoDb = 0.0;
constexpr double kBracketHiDb = 60.0;
constexpr double kBisectionTolDb = 0.001;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

// Mean shift relative to P0 for the scenario at the given one-way OPL.
double relative_shift(const DesignPoint& p, double opl_db) {
  const double osq = opl_sq_from_db(opl_db);
  auto deficit = [](double il_db) { return -std::expm1(-il_db / 5.0 * std::log(10.0)); };
  return std::visit(
      overloaded{
          [&](const ReflectionScenario& s) { return osq * std::pow(10.0, -s.rl_e_db / 10.0); },
          [&](const BackscatterLossScenario& s) {
            const double bt = dr_reference_backscatter() * (p.pulse_width_s / kDrReferencePulseWidth);
            return osq * bt * deficit(s.il_e_db);
          },
          [&](const OntLossScenario& s) {
            return osq * std::pow(10.0, -s.rl_ont_db / 10.0) * deficit(s.il_e_db);
          }},
      p.scenario);
}

double pd_at(const DesignPoint& p, double dr_db, double opl_db) {
  const double sigma_rel = dr_reference_backscatter() / std::pow(10.0, dr_db / 5.0);
  return detection_probability(relative_shift(p, opl_db) / sigma_rel, p.pfa);
}

}  // namespace

double opl_sq(const PonTopology& topo, const FiberParams& fiber, double z_m) {
  if (z_m < 0.0) throw std::invalid_argument("OPL position must be non-negative");
  const double n = topo.split_ratio;
  return topo.excess_factor() / (n * n) * round_trip_attenuation(fiber, z_m);
}

double opl_db_from_sq(double opl_sq) { return -5.0 * std::log10(opl_sq); }
double opl_sq_from_db(double opl_db) { return std::pow(10.0, -opl_db / 5.0); }

double dr_reference_backscatter() {
  return backscatter_factor(FiberParams{kDrReferenceBackscatterDb, 0.21, 1.46},
                            kDrReferencePulseWidth);
}

double dr_from_sigma(double p0_w, double backscatter, double sigma_w) {
  if (!(p0_w > 0.0 && backscatter > 0.0 && sigma_w > 0.0))
    throw std::invalid_argument("dynamic range needs positive power, backscatter and sigma");
  return 5.0 * std::log10(p0_w * backscatter / sigma_w);
}

double sigma_from_dr(double p0_w, double backscatter, double dr_db) {
  if (!(p0_w > 0.0 && backscatter > 0.0))
    throw std::invalid_argument("dynamic range needs positive power and backscatter");
  return p0_w * backscatter / std::pow(10.0, dr_db / 5.0);
}

void DesignPoint::validate() const {
  if (!(pfa > 0.0 && pfa < pd_target && pd_target < 1.0))
    throw std::invalid_argument("design point needs 0 < pfa < pd_target < 1");
  if (!(pulse_width_s > 0.0)) throw std::invalid_argument("design pulse width must be positive");
  std::visit(overloaded{[](const ReflectionScenario& s) {
                          if (!(s.rl_e_db > 0.0))
                            throw std::invalid_argument("return loss must be positive");
                        },
                        [](const BackscatterLossScenario& s) {
                          if (!(s.il_e_db >= 0.0))
                            throw std::invalid_argument("insertion loss must be >= 0");
                        },
                        [](const OntLossScenario& s) {
                          if (!(s.il_e_db >= 0.0) || !(s.rl_ont_db > 0.0))
                            throw std::invalid_argument("invalid ONT loss scenario");
                        }},
             scenario);
}

double design_pd(const DesignPoint& point) {
  point.validate();
  if (!(point.dr_db > 0.0)) throw std::invalid_argument("dynamic range must be positive");
  return pd_at(point, point.dr_db, point.opl_db);
}

std::optional<double> max_opl(const DesignPoint& point) {
  point.validate();
  if (!(point.dr_db > 0.0)) throw std::invalid_argument("dynamic range must be positive");
  auto ok = [&](double opl) { return pd_at(point, point.dr_db, opl) >= point.pd_target; };
  double lo = kBracketLoDb;
  double hi = kBracketHiDb;
  if (!ok(lo)) return std::nullopt;
  if (ok(hi)) return hi;
  while (hi - lo > kBisectionTolDb) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

std::optional<double> required_dr(const DesignPoint& point) {
  point.validate();
  auto ok = [&](double dr) { return pd_at(point, dr, point.opl_db) >= point.pd_target; };
  double lo = kBracketLoDb;
  double hi = kBracketHiDb;
  if (!ok(hi)) return std::nullopt;
  if (ok(lo)) return lo;
  while (hi - lo > kBisectionTolDb) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

namespace {

void set_variable(DesignPoint& p, SweepVariable v, double x) {
  switch (v) {
    case SweepVariable::dr: p.dr_db = x; return;
    case SweepVariable::opl: p.opl_db = x; return;
    case SweepVariable::rl_e:
      if (auto* s = std::get_if<ReflectionScenario>(&p.scenario)) { s->rl_e_db = x; return; }
      break;
    case SweepVariable::rl_ont:
      if (auto* s = std::get_if<OntLossScenario>(&p.scenario)) { s->rl_ont_db = x; return; }
      break;
    case SweepVariable::il:
      if (auto* s = std::get_if<BackscatterLossScenario>(&p.scenario)) { s->il_e_db = x; return; }
      if (auto* s = std::get_if<OntLossScenario>(&p.scenario)) { s->il_e_db = x; return; }
      break;
  }
  throw std::invalid_argument("sweep variable does not apply to this scenario");
}

}  // namespace

std::vector<CurvePoint> sweep(const SweepSpec& spec) {
  if (!(spec.step > 0.0)) throw std::invalid_argument("sweep step must be positive");
  std::vector<CurvePoint> out;
  if (spec.from > spec.to) return out;
  const auto n = static_cast<std::size_t>(std::floor((spec.to - spec.from) / spec.step + 1e-9)) + 1;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = spec.from + static_cast<double>(k) * spec.step;
    DesignPoint p = spec.base;
    set_variable(p, spec.variable, x);
    CurvePoint c{x, std::nullopt};
    switch (spec.quantity) {
      case CurveQuantity::pd: c.y = design_pd(p); break;
      case CurveQuantity::max_opl: c.y = max_opl(p); break;
      case CurveQuantity::required_dr: c.y = required_dr(p); break;
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace dspe
