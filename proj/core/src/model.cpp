#include "dspe/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "dspe/perf.hpp"

namespace dspe {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// 10^(-2 IL / 10); +inf IL gives exactly 0.
double round_trip_loss_factor(double il_db) { return std::pow(10.0, -2.0 * il_db / 10.0); }

}  // namespace

void FiberParams::validate() const {
  require(attenuation_db_per_km > 0.0, "fiber attenuation must be positive");
  require(group_index > 1.0 && group_index < 2.0, "fiber group index must lie in (1, 2)");
  require(backscatter_db < 0.0, "fiber backscatter factor must be negative in dB");
}

void OtdrConfig::validate(const FiberParams& fiber) const {
  require(pulse_power_w > 0.0, "OTDR pulse power must be positive");
  require(pulse_width_s > 0.0, "OTDR pulse width must be positive");
  require(noise_sigma_w >= 0.0, "OTDR noise sigma must be non-negative");
  require(wavelength_nm > 0, "OTDR wavelength must be positive");
  require(sample_spacing_m > 0.0, "OTDR sample spacing must be positive");
  require(sample_spacing_m <= spatial_pulse_width_m(fiber, pulse_width_s),
          "sample spacing must not exceed the spatial pulse width");
  if (range_m) {
    require(*range_m > 0.0, "OTDR range must be positive");
    const double n = *range_m / sample_spacing_m;
    require(std::abs(n - std::round(n)) < 1e-9 * std::max(1.0, n),
            "OTDR range must be an integer number of samples");
  }
}

void PonTopology::validate() const {
  require(split_ratio >= 1, "split ratio must be >= 1");
  require(!drops.empty(), "topology needs at least one drop");
  require(drops.size() <= static_cast<std::size_t>(split_ratio),
          "more drops than splitter ports");
  require(feeder_length_m > 0.0, "feeder length must be positive");
  require(excess_loss_db >= 0.0, "excess loss must be non-negative");
  for (const auto& d : drops) {
    require(d.length_m > 0.0, "drop length must be positive");
    require(d.ont_return_loss_db > 0.0, "ONT return loss must be positive");
  }
}

double PonTopology::ont_position_m(std::size_t branch) const {
  require(branch < drops.size(), "branch index out of range");
  return feeder_length_m + drops[branch].length_m;
}

double PonTopology::farthest_ont_m() const {
  double best = 0.0;
  for (std::size_t b = 0; b < drops.size(); ++b) best = std::max(best, ont_position_m(b));
  return best;
}

double PonTopology::excess_factor() const { return round_trip_loss_factor(excess_loss_db); }

double FaultSpec::insertion_loss_at(int wavelength_nm) const {
  if (insertion_loss_db.empty()) return 0.0;
  const auto it = insertion_loss_db.find(wavelength_nm);
  if (it == insertion_loss_db.end())
    throw std::invalid_argument("fault has no insertion loss for " +
                                std::to_string(wavelength_nm) + " nm");
  return it->second;
}

void FaultSpec::validate(const PonTopology& topo) const {
  require(branch_index < topo.drops.size(), "fault branch index out of range");
  require(position_m >= 0.0, "fault position must be non-negative");
  require(position_m < topo.ont_position_m(branch_index), "fault lies beyond the branch ONT");
  if (return_loss_db)
    require(std::isfinite(*return_loss_db) && *return_loss_db > 0.0,
            "fault return loss must be finite and positive");
  for (const auto& [nm, il] : insertion_loss_db)
    require(il >= 0.0 && !std::isnan(il), "fault insertion loss must be >= 0");
}

bool Trace::same_grid(const Trace& other) const noexcept {
  return size() == other.size() && z0_m == other.z0_m && dz_m == other.dz_m;
}

double backscatter_factor(const FiberParams& fiber, double pulse_width_s) {
  require(pulse_width_s > 0.0, "pulse width must be positive");
  return db_to_linear(fiber.backscatter_db) * (pulse_width_s / kReferencePulseWidth);
}

double spatial_pulse_width_m(const FiberParams& fiber, double pulse_width_s) {
  return pulse_width_s * (kSpeedOfLight / fiber.group_index) / 2.0;
}

double round_trip_attenuation(const FiberParams& fiber, double z_m) {
  return std::pow(10.0, -2.0 * fiber.attenuation_db_per_km * (z_m / 1000.0) / 10.0);
}

std::size_t sample_count(const PonTopology& topo, const OtdrConfig& otdr) {
  const double range = otdr.range_m.value_or(topo.farthest_ont_m() + 500.0);
  return static_cast<std::size_t>(std::llround(range / otdr.sample_spacing_m));
}

SampleRange plateau_samples(double z_center_m, double width_m, double z0_m, double dz_m,
                            std::size_t n) {
  const auto count = std::max<long long>(1, std::llround(width_m / dz_m));
  const long long first = std::llround((z_center_m - width_m / 2.0 - z0_m) / dz_m);
  const long long lo = std::clamp<long long>(first, 0, static_cast<long long>(n));
  const long long hi = std::clamp<long long>(first + count, 0, static_cast<long long>(n));
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi - lo)};
}

std::vector<OntPlateau> ont_plateaus(const PonTopology& topo, const FiberParams& fiber,
                                     const OtdrConfig& otdr) {
  const std::size_t n = sample_count(topo, otdr);
  const double w = spatial_pulse_width_m(fiber, otdr.pulse_width_s);
  std::vector<OntPlateau> out;
  out.reserve(topo.drops.size());
  for (std::size_t b = 0; b < topo.drops.size(); ++b) {
    const double z = topo.ont_position_m(b);
    out.push_back({b, z, plateau_samples(z, w, 0.0, otdr.sample_spacing_m, n)});
  }
  return out;
}

namespace {

struct BranchFault {
  double position_m;
  double loss_factor;  // 10^(-2 IL/10)
  std::optional<double> reflectance;  // 10^(-RL/10)
  SampleRange plateau;
};

Trace synthesize(const PonTopology& topo, const FiberParams& fiber, const OtdrConfig& otdr,
                 std::span<const FaultSpec> faults) {
  topo.validate();
  fiber.validate();
  otdr.validate(fiber);

  const std::size_t n = sample_count(topo, otdr);
  require(n >= 1, "trace must hold at least one sample");
  const double dz = otdr.sample_spacing_m;
  const double w = spatial_pulse_width_m(fiber, otdr.pulse_width_s);
  const double n_sq = static_cast<double>(topo.split_ratio) * topo.split_ratio;
  const double scale = topo.excess_factor() / n_sq * otdr.pulse_power_w;
  const double bt = backscatter_factor(fiber, otdr.pulse_width_s);
  const auto onts = ont_plateaus(topo, fiber, otdr);

  std::vector<std::vector<BranchFault>> per_branch(topo.drops.size());
  for (const auto& f : faults) {
    f.validate(topo);
    BranchFault bf{f.position_m, round_trip_loss_factor(f.insertion_loss_at(otdr.wavelength_nm)),
                   std::nullopt, {}};
    if (f.return_loss_db) {
      bf.reflectance = db_to_linear(-*f.return_loss_db);
      bf.plateau = plateau_samples(f.position_m, w, 0.0, dz, n);
    }
    per_branch[f.branch_index].push_back(bf);
  }
  for (auto& v : per_branch)
    std::sort(v.begin(), v.end(),
              [](const BranchFault& a, const BranchFault& b) { return a.position_m < b.position_m; });

  Trace t;
  t.z0_m = 0.0;
  t.dz_m = dz;
  t.samples_w.assign(n, 0.0);
  t.meta.wavelength_nm = otdr.wavelength_nm;
  t.meta.pulse_width_s = otdr.pulse_width_s;
  t.meta.topology_id = topo.id;

  for (std::size_t i = 0; i < n; ++i) {
    const double z = t.z_at(i);
    const double bs_unit = scale * bt * round_trip_attenuation(fiber, z);
    double y = 0.0;
    for (std::size_t b = 0; b < topo.drops.size(); ++b) {
      if (z >= onts[b].z_ont_m) continue;  // N_a counts ONTs beyond z
      double factor = 1.0;
      if (!onts[b].samples.contains(i)) {
        for (const auto& f : per_branch[b]) {
          if (f.position_m >= z) break;
          if (f.reflectance && f.plateau.contains(i)) continue;
          factor *= f.loss_factor;
        }
      }
      y += bs_unit * factor;
    }
    t.samples_w[i] = y;
  }

  for (std::size_t b = 0; b < topo.drops.size(); ++b) {
    double upstream = 1.0;
    for (const auto& f : per_branch[b]) {
      if (f.reflectance) {
        const double term =
            scale * round_trip_attenuation(fiber, f.position_m) * *f.reflectance * upstream;
        for (std::size_t i = f.plateau.first; i < f.plateau.end(); ++i) t.samples_w[i] += term;
      }
      upstream *= f.loss_factor;
    }
    const auto& ont = onts[b];
    const double term = scale * round_trip_attenuation(fiber, ont.z_ont_m) *
                        db_to_linear(-topo.drops[b].ont_return_loss_db) * upstream;
    for (std::size_t i = ont.samples.first; i < ont.samples.end(); ++i) t.samples_w[i] += term;
  }
  return t;
}

}  // namespace

Trace reference_trace(const PonTopology& topo, const FiberParams& fiber, const OtdrConfig& otdr) {
  return synthesize(topo, fiber, otdr, {});
}

Trace faulted_trace(const PonTopology& topo, const FiberParams& fiber, const OtdrConfig& otdr,
                    std::span<const FaultSpec> faults) {
  return synthesize(topo, fiber, otdr, faults);
}

Trace faulted_trace(const PonTopology& topo, const FiberParams& fiber, const OtdrConfig& otdr,
                    const FaultSpec& fault) {
  return synthesize(topo, fiber, otdr, std::span<const FaultSpec>(&fault, 1));
}

Trace add_noise(const Trace& trace, double sigma_w, std::uint64_t seed) {
  require(sigma_w >= 0.0, "noise sigma must be non-negative");
  Trace out = trace;
  out.meta.seed = seed;
  if (sigma_w == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma_w);
  for (double& s : out.samples_w) s += noise(rng);
  return out;
}

Trace averaged_reference(const PonTopology& topo, const FiberParams& fiber,
                         const OtdrConfig& otdr, int repetitions, std::uint64_t seed) {
  require(repetitions >= 1, "averaging needs at least one repetition");
  const Trace clean = reference_trace(topo, fiber, otdr);
  Trace out = clean;
  std::fill(out.samples_w.begin(), out.samples_w.end(), 0.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, otdr.noise_sigma_w);
  for (int r = 0; r < repetitions; ++r)
    for (std::size_t i = 0; i < clean.size(); ++i)
      out.samples_w[i] += clean.samples_w[i] + (otdr.noise_sigma_w > 0.0 ? noise(rng) : 0.0);
  for (double& s : out.samples_w) s /= repetitions;
  out.meta.averaging_label = "mean of " + std::to_string(repetitions);
  out.meta.seed = seed;
  return out;
}

}  // namespace dspe
