#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "dspe_cli/commands.hpp"

using namespace dspe::cli;

int main(int argc, char** argv) {
  CLI::App app{"dspe: reference-comparison OTDR fault detection for PON monitoring"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "dspe 0.1.0");

  SimulateOptions sim;
  auto* s = app.add_subcommand("simulate", "synthesize reference and measurement traces");
  s->add_option("--scenario", sim.scenario, "scenario YAML file")->required()->check(CLI::ExistingFile);
  s->add_option("--out", sim.out_dir, "output directory")->required();
  s->add_option("--seed", sim.seed, "override the scenario seed");
  s->add_flag("--db", sim.db, "add a 5*log10 dB display column");

  DetectOptions det;
  auto* d = app.add_subcommand("detect", "compare measurements against references");
  d->add_option("--scenario", det.scenario, "scenario YAML file")->required()->check(CLI::ExistingFile);
  d->add_option("--reference", det.references, "reference trace (repeat per wavelength)");
  d->add_option("--measurement", det.measurements, "measurement trace (repeat per wavelength)")->required();
  d->add_option("--out", det.out, "report JSON path (default: stdout)");
  d->add_option("--pfa", det.pfa, "per-sample false-alarm probability for both tests");
  d->add_option("--delta", det.delta, "error-bound confidence parameter");
  d->add_option("--store", det.store, "reference store (default: $DSPE_STORE or ./dspe-store)");
  d->add_flag("--db", det.db, "show event levels in dB");

  EstimateOptions est;
  std::string est_kind = "il-backscatter";
  auto* e = app.add_subcommand("estimate", "ML estimate over a sample window");
  e->add_option("--scenario", est.scenario, "scenario YAML file")->required()->check(CLI::ExistingFile);
  e->add_option("--reference", est.reference, "reference trace")->required();
  e->add_option("--measurement", est.measurement, "measurement trace")->required();
  e->add_option("--kind", est_kind, "rl | il-backscatter | il-ont")
      ->check(CLI::IsMember({"rl", "il-backscatter", "il-ont"}));
  e->add_option("--from-m", est.from_m, "window start (m)")->required();
  e->add_option("--to-m", est.to_m, "window end (m), inclusive")->required();
  e->add_option("--event-m", est.event_m, "event position for rl (default: window centre)");
  e->add_option("--branch", est.branch, "drop branch for il-ont");
  e->add_option("--delta", est.delta, "error-bound confidence parameter");
  e->add_option("--out", est.out, "estimate JSON path (default: stdout)");

  ClassifyOptions cls;
  auto* c = app.add_subcommand("classify", "label a fault from dual-wavelength evidence");
  c->add_option("input", cls.input, "detection report or evidence JSON")->required()->check(CLI::ExistingFile);
  c->add_option("--out", cls.out, "classification JSON path (default: stdout)");

  PerfOptions perf;
  auto* p = app.add_subcommand("perf", "tabulate closed-form design curves as CSV");
  p->add_option("--scenario", perf.scenario, "reflection | loss_backscatter | loss_ont")
      ->check(CLI::IsMember({"reflection", "loss_backscatter", "loss_ont"}));
  p->add_option("--quantity", perf.quantity, "pd | max_opl | required_dr")
      ->check(CLI::IsMember({"pd", "max_opl", "required_dr"}));
  p->add_option("--vary", perf.vary, "dr | opl | rl_e | rl_ont | il")
      ->check(CLI::IsMember({"dr", "opl", "rl_e", "rl_ont", "il"}));
  p->add_option("--from", perf.from, "first value of the swept variable")->required();
  p->add_option("--to", perf.to, "last value (smaller than --from: empty table)")->required();
  p->add_option("--step", perf.step, "sweep step");
  p->add_option("--dr", perf.dr_db, "dynamic range (dB, 100 ns)");
  p->add_option("--opl", perf.opl_db, "one-way optical path loss (dB); OPL to the ONT for loss_ont");
  p->add_option("--rl", perf.rl_e_db, "event return loss (dB)");
  p->add_option("--il", perf.il_e_db, "event insertion loss (dB)");
  p->add_option("--rl-ont", perf.rl_ont_db, "ONT return loss (dB)");
  p->add_option("--pfa", perf.pfa, "per-sample false-alarm probability");
  p->add_option("--pd", perf.pd_target, "target detection probability");
  p->add_option("--pulse-ns", perf.pulse_width_ns, "pulse width (ns)");
  p->add_option("--out", perf.out, "CSV path (default: stdout)");

  ValidateOptions val;
  auto* v = app.add_subcommand("validate", "run Monte Carlo validation suites");
  v->add_option("--suite", val.suites, "suite name or 'all' (repeatable)");
  v->add_option("--trials", val.trials, "trials per suite (default: suite defaults)");
  v->add_option("--seed", val.seed, "master seed");
  v->add_option("--workers", val.workers, "worker threads (0: hardware concurrency)");

  auto* st = app.add_subcommand("store", "reference trace store");
  st->require_subcommand(1);
  std::optional<std::filesystem::path> store_root;
  st->add_option("--store", store_root, "store directory (default: $DSPE_STORE or ./dspe-store)");
  StoreAddOptions sadd;
  auto* sa = st->add_subcommand("add", "add a reference trace");
  sa->add_option("trace", sadd.trace, "trace CSV")->required()->check(CLI::ExistingFile);
  sa->add_flag("--replace", sadd.replace, "overwrite an existing entry");
  StoreGetOptions sget;
  auto* sg = st->add_subcommand("get", "print a stored reference trace");
  sg->add_option("--network", sget.network, "topology id")->required();
  sg->add_option("--wavelength", sget.wavelength_nm, "wavelength (nm)");
  sg->add_option("--pulse-ns", sget.pulse_width_ns, "pulse width (ns)");
  sg->add_option("--out", sget.out, "CSV path (default: stdout)");
  sg->add_flag("--db", sget.db, "add a dB display column");
  StoreListOptions slist;
  auto* sl = st->add_subcommand("list", "list stored references");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int rc = app.exit(ex);
    return rc == 0 ? kOk : kUsage;
  }

  auto& out = std::cout;
  auto& err = std::cerr;
  return guarded(err, [&]() -> int {
    if (*s) return cmd_simulate(sim, out, err);
    if (*d) return cmd_detect(det, out, err);
    if (*e) {
      static const std::map<std::string, EstimateMode> modes{
          {"rl", EstimateMode::return_loss},
          {"il-backscatter", EstimateMode::il_backscatter},
          {"il-ont", EstimateMode::il_ont}};
      est.mode = modes.at(est_kind);
      return cmd_estimate(est, out, err);
    }
    if (*c) return cmd_classify(cls, out, err);
    if (*p) return cmd_perf(perf, out, err);
    if (*v) return cmd_validate(val, out, err);
    sadd.store = sget.store = slist.store = store_root;
    if (*sa) return cmd_store_add(sadd, out, err);
    if (*sg) return cmd_store_get(sget, out, err);
    if (*sl) return cmd_store_list(slist, out, err);
    return kUsage;
  });
}
