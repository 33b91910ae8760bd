// ============================================================================
// commands.hpp -- dspe subcommands, callable without the argument parser
//
// Every command writes its payload to `out`, diagnostics to `err`, and
// returns a process exit code.
// ============================================================================
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dspe::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kParseError = 2,
  kIoError = 3,
  kInfeasible = 4,
  kValidationFailed = 5,
};

struct SimulateOptions {
  std::filesystem::path scenario;
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;  // overrides the scenario seed
  bool db = false;
};
int cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& err);

struct DetectOptions {
  std::filesystem::path scenario;
  std::vector<std::filesystem::path> references;  // empty: look up the store
  std::vector<std::filesystem::path> measurements;
  std::optional<std::filesystem::path> out;  // report JSON; stdout when absent
  std::optional<double> pfa;
  std::optional<double> delta;
  std::optional<std::filesystem::path> store;
  bool db = false;
};
int cmd_detect(const DetectOptions& o, std::ostream& out, std::ostream& err);

enum class EstimateMode { return_loss, il_backscatter, il_ont };

struct EstimateOptions {
  std::filesystem::path scenario;
  std::filesystem::path reference;
  std::filesystem::path measurement;
  EstimateMode mode = EstimateMode::il_backscatter;
  double from_m = 0.0;  // sample window, inclusive
  double to_m = 0.0;
  double event_m = 0.0;  // event position for OPL^2 (return loss)
  std::size_t branch = 0;  // ONT branch (il_ont)
  std::optional<double> delta;
  std::optional<std::filesystem::path> out;
};
int cmd_estimate(const EstimateOptions& o, std::ostream& out, std::ostream& err);

struct ClassifyOptions {
  std::filesystem::path input;  // detection report or bare evidence JSON
  std::optional<std::filesystem::path> out;
};
int cmd_classify(const ClassifyOptions& o, std::ostream& out, std::ostream& err);

struct PerfOptions {
  std::string scenario = "reflection";  // reflection | loss_backscatter | loss_ont
  std::string quantity = "pd";          // pd | max_opl | required_dr
  std::string vary = "dr";              // dr | opl | rl_e | rl_ont | il
  double from = 0.0;
  double to = 0.0;
  double step = 1.0;
  double dr_db = 20.0;
  double opl_db = 15.0;
  double rl_e_db = 30.0;
  double il_e_db = 1.0;
  double rl_ont_db = 40.0;
  double pfa = 1e-4;
  double pd_target = 0.95;
  double pulse_width_ns = 100.0;
  std::optional<std::filesystem::path> out;
};
int cmd_perf(const PerfOptions& o, std::ostream& out, std::ostream& err);

struct ValidateOptions {
  std::vector<std::string> suites;  // "all" expands to every suite
  std::uint64_t trials = 0;         // 0: suite defaults
  std::uint64_t seed = 1;
  unsigned workers = 0;
};
int cmd_validate(const ValidateOptions& o, std::ostream& out, std::ostream& err);

struct StoreAddOptions {
  std::optional<std::filesystem::path> store;
  std::filesystem::path trace;
  bool replace = false;
};
int cmd_store_add(const StoreAddOptions& o, std::ostream& out, std::ostream& err);

struct StoreGetOptions {
  std::optional<std::filesystem::path> store;
  std::string network;
  int wavelength_nm = 1550;
  double pulse_width_ns = 100.0;
  std::optional<std::filesystem::path> out;  // stdout when absent
  bool db = false;
};
int cmd_store_get(const StoreGetOptions& o, std::ostream& out, std::ostream& err);

struct StoreListOptions {
  std::optional<std::filesystem::path> store;
};
int cmd_store_list(const StoreListOptions& o, std::ostream& out, std::ostream& err);

/// Runs `body`, translating library exceptions into exit codes and messages.
int guarded(std::ostream& err, const std::function<int()>& body);

}  // namespace dspe::cli
