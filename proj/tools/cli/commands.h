#pragma once

#include "cli/config.h"

#include "ghzpur/faraday.h"
#include "ghzpur/ghz.h"
#include "ghzpur/protocol.h"
#include "ghzpur/resources.h"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace ghzpur::cli {

enum class Command { kRound, kSweep, kIterate, kResources, kFaradayScan };

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitStagnation = 3,
  kExitLeakage = 4,
};

struct RunConfig {
  Command command = Command::kRound;
  protocol::RoundConfig round;

  // Mixture source: exactly one of these for round and iterate.
  std::optional<double> F;
  std::optional<std::string> weights;
  std::optional<std::string> mixture_path;
  int flip_party = 0;  // 1-based; 0 means the last party

  std::optional<std::string> out;
  std::uint64_t trials = 0;
  unsigned threads = 1;

  double F_min = 0.05;
  double F_max = 0.95;
  double F_step = 0.05;
  bool exact = false;

  std::optional<int> rounds;
  std::optional<double> target;
  int max_rounds = 64;

  resources::EfficiencyParams efficiency;
  bool efficiency_given = false;
  resources::LossModel loss_model = resources::LossModel::kAsPrinted;

  // faraday-scan
  faraday::CavityParams scan_params = faraday::CavityParams::ideal_point();
  double omega_p_min = -2.0;
  double omega_p_max = 1.0;
  int points = 301;

  int n_min = 0;  // 0: same as round.n_parties
  int n_max = 0;
};

Command parse_command(std::string_view name);

// Builds a validated RunConfig; throws ConfigError.
RunConfig resolve(Command command, const KeyValueConfig& kv);

ghz::GhzMixture load_mixture(const RunConfig& cfg);

int cmd_round(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_iterate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_resources(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_faraday_scan(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Parses arguments, runs the subcommand, and maps failures to exit codes.
// CSV goes to --out when given, otherwise to `out`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ghzpur::cli
