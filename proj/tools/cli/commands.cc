#include "cli/commands.h"

#include "ghzpur/errors.h"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace ghzpur::cli {

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

// Runs `write` against the --out file, or against `fallback`.
void emit(const RunConfig& cfg, std::ostream& fallback, const std::function<void(std::ostream&)>& write) {
  if (!cfg.out) {
    write(fallback);
    return;
  }
  std::ofstream file(*cfg.out, std::ios::binary);
  if (!file) throw ConfigError(fmt::format("cannot write '{}'", *cfg.out));
  write(file);
  if (!file) throw Error(fmt::format("write to '{}' failed", *cfg.out));
}

ghz::GhzMixture parse_inline_weights(const std::string& text) {
  std::map<ghz::GhzIndex, double> weights;
  std::optional<int> n;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos || colon < 1) {
      throw ConfigError(fmt::format("weights: expected <flips><sign>:<weight>, got '{}'", item));
    }
    const std::string label = item.substr(0, colon);
    const std::string bits = label.substr(0, label.size() - 1);
    const int this_n = static_cast<int>(bits.size()) + 1;
    if (n && *n != this_n) throw ConfigError("weights: labels of different lengths");
    n = this_n;
    double w = 0.0;
    const std::string_view text = std::string_view(item).substr(colon + 1);
    if (auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), w);
        ec != std::errc{} || ptr != text.data() + text.size()) {
      throw ConfigError(fmt::format("weights: bad weight in '{}'", item));
    }
    const auto idx = ghz::GhzIndex::parse(bits, label.back());
    if (!weights.emplace(idx, w).second) throw ConfigError(fmt::format("weights: '{}' repeated", label));
  }
  if (!n) throw ConfigError("weights: empty");
  return ghz::GhzMixture::from_map(*n, weights);
}

}  // namespace

Command parse_command(std::string_view name) {
  if (name == "round") return Command::kRound;
  if (name == "sweep") return Command::kSweep;
  if (name == "iterate") return Command::kIterate;
  if (name == "resources") return Command::kResources;
  if (name == "faraday-scan") return Command::kFaradayScan;
  throw ConfigError(fmt::format("unknown command '{}'", name));
}

RunConfig resolve(Command command, const KeyValueConfig& kv) {
  RunConfig cfg;
  cfg.command = command;

  const bool n_given = kv.has("n");
  cfg.round.n_parties = static_cast<int>(kv.get_int("n").value_or(3));
  if (auto e = kv.get("error")) {
    try {
      cfg.round.error_mode = protocol::parse_error_mode(*e);
    } catch (const InvalidArgumentError& ex) {
      throw ConfigError(ex.what());
    }
  }
  if (auto r = kv.get("regime")) {
    if (*r == "pure-phase") {
      cfg.round.regime = faraday::Regime::kPurePhase;
    } else if (*r == "allow-absorption") {
      cfg.round.regime = faraday::Regime::kAllowAbsorption;
    } else {
      throw ConfigError(fmt::format("regime: expected pure-phase or allow-absorption, got '{}'", *r));
    }
  }
  cfg.round.seed = kv.get_u64("seed").value_or(0);
  cfg.round.leakage_threshold = kv.get_double("leakage_threshold").value_or(ghz::kDefaultLeakageThreshold);
  cfg.round.allow_leakage = kv.get_bool("allow_leakage").value_or(false);

  // Cavity parameters start from the ideal point (kappa = 1) and are
  // overridden key by key.
  faraday::CavityParams cavity = faraday::CavityParams::ideal_point();
  bool cavity_given = false;
  const std::pair<const char*, double faraday::CavityParams::*> cavity_keys[] = {
      {"omega_c", &faraday::CavityParams::omega_c}, {"omega_0", &faraday::CavityParams::omega_0},
      {"omega_p", &faraday::CavityParams::omega_p}, {"kappa", &faraday::CavityParams::kappa},
      {"gamma", &faraday::CavityParams::gamma},     {"g", &faraday::CavityParams::g}};
  for (const auto& [key, field] : cavity_keys) {
    if (auto v = kv.get_double(key)) {
      cavity.*field = *v;
      cavity_given = true;
    }
  }
  const auto ideal = kv.get_bool("ideal");
  if (ideal.value_or(false) && cavity_given && command != Command::kFaradayScan) {
    throw ConfigError("ideal gate requested together with cavity parameters");
  }
  try {
    cavity.validate();
  } catch (const InvalidArgumentError& e) {
    throw ConfigError(e.what());
  }
  if (cavity_given && !ideal.value_or(false)) cfg.round.cavity = cavity;
  cfg.scan_params = cavity;

  cfg.F = kv.get_double("F");
  cfg.weights = kv.get("weights");
  cfg.mixture_path = kv.get("mixture");
  cfg.flip_party = static_cast<int>(kv.get_int("flip_party").value_or(0));
  cfg.out = kv.get("out");
  cfg.trials = kv.get_u64("trials").value_or(0);
  cfg.threads = static_cast<unsigned>(kv.get_u64("threads").value_or(1));

  const int sources = int{cfg.F.has_value()} + int{cfg.weights.has_value()} + int{cfg.mixture_path.has_value()};
  if (command == Command::kRound || command == Command::kIterate) {
    if (sources != 1) throw ConfigError("give exactly one of F, weights, mixture");
  }
  if ((command == Command::kSweep || command == Command::kResources) &&
      (cfg.weights || cfg.mixture_path)) {
    throw ConfigError("this command takes F, not a mixture");
  }
  if (cfg.F && !(*cfg.F >= 0.0 && *cfg.F <= 1.0)) throw ConfigError("F must lie in [0, 1]");
  // n comes from the mixture when it is not given explicitly.
  if (!n_given && (cfg.weights || cfg.mixture_path)) cfg.round.n_parties = 0;

  cfg.F_min = kv.get_double("F_min").value_or(cfg.F_min);
  cfg.F_max = kv.get_double("F_max").value_or(cfg.F_max);
  cfg.F_step = kv.get_double("F_step").value_or(cfg.F_step);
  cfg.exact = kv.get_bool("exact").value_or(false);
  if (command == Command::kSweep) {
    if (!(cfg.F_min > 0.0 && cfg.F_max < 1.0 && cfg.F_min <= cfg.F_max && cfg.F_step > 0.0)) {
      throw ConfigError("sweep needs 0 < F_min <= F_max < 1 and F_step > 0");
    }
  }

  if (auto r = kv.get_int("rounds")) cfg.rounds = static_cast<int>(*r);
  cfg.target = kv.get_double("target");
  cfg.max_rounds = static_cast<int>(kv.get_int("max_rounds").value_or(64));
  if (command == Command::kIterate && !cfg.rounds && !cfg.target) {
    throw ConfigError("iterate needs rounds or target");
  }
  if (cfg.rounds && *cfg.rounds < 0) throw ConfigError("rounds must be >= 0");

  const std::pair<const char*, double resources::EfficiencyParams::*> eff_keys[] = {
      {"T_f", &resources::EfficiencyParams::T_f},
      {"eta_0", &resources::EfficiencyParams::eta_0},
      {"eta_d", &resources::EfficiencyParams::eta_d},
      {"eta_a", &resources::EfficiencyParams::eta_a}};
  for (const auto& [key, field] : eff_keys) {
    if (auto v = kv.get_double(key)) {
      cfg.efficiency.*field = *v;
      cfg.efficiency_given = true;
    }
  }
  if (kv.get_bool("per_photon_losses").value_or(false)) {
    cfg.loss_model = resources::LossModel::kPerPhoton;
    cfg.efficiency_given = true;
  }
  try {
    cfg.efficiency.validate();
  } catch (const InvalidArgumentError& e) {
    throw ConfigError(e.what());
  }

  cfg.omega_p_min = kv.get_double("omega_p_min").value_or(cfg.omega_p_min);
  cfg.omega_p_max = kv.get_double("omega_p_max").value_or(cfg.omega_p_max);
  cfg.points = static_cast<int>(kv.get_int("points").value_or(cfg.points));
  if (command == Command::kFaradayScan && !(cfg.points >= 2 && cfg.omega_p_min < cfg.omega_p_max)) {
    throw ConfigError("faraday-scan needs points >= 2 and omega_p_min < omega_p_max");
  }

  cfg.n_min = static_cast<int>(kv.get_int("n_min").value_or(0));
  cfg.n_max = static_cast<int>(kv.get_int("n_max").value_or(0));
  if (command == Command::kResources) {
    if (!cfg.F) throw ConfigError("resources needs F");
    if (cfg.n_min == 0) cfg.n_min = cfg.round.n_parties;
    if (cfg.n_max == 0) cfg.n_max = std::max(cfg.n_min, cfg.round.n_parties);
    if (cfg.n_min < 1 || cfg.n_max < cfg.n_min) throw ConfigError("need 1 <= n_min <= n_max");
  }
  if (command == Command::kSweep || (cfg.round.n_parties != 0 && command != Command::kResources &&
                                     command != Command::kFaradayScan)) {
    try {
      cfg.round.validate();
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  return cfg;
}

ghz::GhzMixture load_mixture(const RunConfig& cfg) {
  std::optional<ghz::GhzMixture> m;
  if (cfg.F) {
    const int n = cfg.round.n_parties;
    if (cfg.round.error_mode == protocol::ErrorMode::kPhaseFlip) {
      m = ghz::GhzMixture::binary_phase_flip(n, *cfg.F);
    } else {
      const int party = cfg.flip_party == 0 ? n : cfg.flip_party;
      if (party < 1 || party > n) throw ConfigError(fmt::format("flip_party must lie in 1..{}", n));
      m = ghz::GhzMixture::binary_bit_flip(n, *cfg.F, party - 1);
    }
  } else if (cfg.weights) {
    m = parse_inline_weights(*cfg.weights);
  } else if (cfg.mixture_path) {
    std::ifstream in(*cfg.mixture_path);
    if (!in) throw ConfigError(fmt::format("cannot open mixture file '{}'", *cfg.mixture_path));
    m = ghz::read_mixture(in);
  } else {
    throw ConfigError("no mixture given");
  }
  if (cfg.round.n_parties != 0 && m->n_parties() != cfg.round.n_parties) {
    throw ConfigError(fmt::format("mixture has {} parties but n = {}", m->n_parties(), cfg.round.n_parties));
  }
  return *m;
}

namespace {

protocol::RoundConfig round_config_for(const RunConfig& cfg, const ghz::GhzMixture& m) {
  protocol::RoundConfig rc = cfg.round;
  rc.n_parties = m.n_parties();
  try {
    rc.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return rc;
}

void write_weights(std::ostream& out, const ghz::GhzMixture& m) {
  for (const auto& [idx, w] : m.support()) {
    out << fmt::format("  {}{} {}\n", idx.flips_bits(m.n_parties()), idx.sign_char(), num(w));
  }
}

}  // namespace

int cmd_round(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto m = load_mixture(cfg);
  const auto rc = round_config_for(cfg, m);
  const auto result = protocol::simulate_round_exact(m, rc);

  out << fmt::format("n: {}\n", rc.n_parties);
  out << fmt::format("error: {}\n", protocol::to_string(rc.error_mode));
  out << fmt::format("gate: {}\n", rc.cavity ? "cavity" : "ideal");
  out << fmt::format("input_fidelity: {}\n", num(m.fidelity()));
  out << fmt::format("p_success: {}\n", num(result.accepted_probability));
  out << fmt::format("kept_fidelity: {}\n", num(result.kept.fidelity()));
  out << fmt::format("leakage: {}\n", num(result.leakage));
  out << "kept_weights:\n";
  write_weights(out, result.kept);
  if (result.leakage > rc.leakage_threshold) {
    err << fmt::format("warning: kept state leaks {:.3g} outside the GHZ diagonal\n", result.leakage);
  }
  if (cfg.trials > 0) {
    const auto mc = protocol::monte_carlo_round(m, rc, cfg.trials, cfg.threads);
    out << fmt::format("mc_trials: {}\n", mc.trials);
    out << fmt::format("mc_seed: {}\n", rc.seed);
    out << fmt::format("mc_acceptance_rate: {}\n", num(mc.acceptance_rate));
    out << fmt::format("mc_acceptance_stderr: {}\n", num(mc.acceptance_stderr));
    out << fmt::format("mc_kept_fidelity: {}\n", num(mc.kept_fidelity));
    out << fmt::format("mc_kept_fidelity_stderr: {}\n", num(mc.kept_fidelity_stderr));
  }
  if (!cfg.out) out << '\n';
  emit(cfg, out, [&](std::ostream& os) { protocol::write_branch_dump(os, result, rc.n_parties); });
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const auto count = static_cast<long>(std::floor((cfg.F_max - cfg.F_min) / cfg.F_step + 1e-9)) + 1;
  emit(cfg, out, [&](std::ostream& os) {
    os << "F,F_prime,p_success\n";
    for (long i = 0; i < count; ++i) {
      // Snap to a 1e-12 grid so decimal steps land on their exact values.
      const double f = std::round((cfg.F_min + static_cast<double>(i) * cfg.F_step) * 1e12) / 1e12;
      RunConfig row = cfg;
      row.F = f;
      const auto m = load_mixture(row);
      double f_prime = 0.0;
      double p = 0.0;
      if (cfg.exact) {
        const auto r = protocol::simulate_round_exact(m, cfg.round);
        f_prime = r.kept.fidelity();
        p = r.accepted_probability;
      } else {
        const auto step = protocol::recursion_step(m, cfg.round.error_mode);
        f_prime = step.mixture.fidelity();
        p = step.success_probability;
      }
      os << fmt::format("{},{},{}\n", num(f), num(f_prime), num(p));
    }
  });
  return kExitOk;
}

int cmd_iterate(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const auto m = load_mixture(cfg);
  protocol::StopRule stop{cfg.rounds, cfg.target, cfg.max_rounds};
  std::optional<protocol::PhysicalLosses> losses;
  if (cfg.efficiency_given) losses = protocol::PhysicalLosses{cfg.efficiency, cfg.loss_model};
  std::optional<protocol::ErrorMode> mode;
  if (cfg.F) mode = cfg.round.error_mode;
  const auto states = protocol::iterate(m, stop, mode, losses);
  emit(cfg, out, [&](std::ostream& os) { protocol::write_round_report(os, states); });
  return kExitOk;
}

int cmd_resources(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const double f = *cfg.F;
  const double p_p = resources::binary_postselection_probability(f);
  emit(cfg, out, [&](std::ostream& os) {
    os << "n,F,P_p,P,P_per_photon\n";
    for (int n = cfg.n_min; n <= cfg.n_max; ++n) {
      const double p = resources::success_probability(p_p, n, cfg.efficiency, resources::LossModel::kAsPrinted);
      const double pp = resources::success_probability(p_p, n, cfg.efficiency, resources::LossModel::kPerPhoton);
      os << fmt::format("{},{},{},{},{}\n", n, num(f), num(p_p), num(p), num(pp));
    }
  });
  return kExitOk;
}

int cmd_faraday_scan(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const faraday::CavityParams base = cfg.scan_params;
  const double ideal_omega_p = base.omega_c - base.kappa / 2.0;
  const bool ideal_couplings = base.omega_c == base.omega_0 && base.g == base.kappa / 2.0 && base.gamma == 0.0;
  std::optional<int> hit_row;
  emit(cfg, out, [&](std::ostream& os) {
    os << "omega_p,re_r,im_r,theta,theta_0,rotation\n";
    const double span = cfg.omega_p_max - cfg.omega_p_min;
    for (int i = 0; i < cfg.points; ++i) {
      faraday::CavityParams p = base;
      p.omega_p = cfg.omega_p_min + span * static_cast<double>(i) / static_cast<double>(cfg.points - 1);
      const auto r = faraday::reflection_coupled(p);
      const auto ph = faraday::phases(p, faraday::Regime::kAllowAbsorption);
      if (p.omega_p == ideal_omega_p) hit_row = i;
      os << fmt::format("{},{},{},{},{},{}\n", num(p.omega_p), num(r.real()), num(r.imag()), num(ph.theta),
                        num(ph.theta_0), num(ph.rotation));
    }
  });
  if (ideal_couplings && ideal_omega_p >= cfg.omega_p_min && ideal_omega_p <= cfg.omega_p_max) {
    if (hit_row) {
      err << fmt::format("ideal point omega_p = {} sampled at row {}\n", num(ideal_omega_p), *hit_row + 1);
    } else {
      err << fmt::format("ideal point omega_p = {} lies inside the scan between samples\n", num(ideal_omega_p));
    }
  }
  return kExitOk;
}

namespace {

struct FlagSpec {
  const char* flag;
  const char* key;
  bool boolean;
};

constexpr FlagSpec kFlags[] = {
    {"--out", "out", false},
    {"--seed", "seed", false},
    {"--trials", "trials", false},
    {"--threads", "threads", false},
    {"--n", "n", false},
    {"--error", "error", false},
    {"--F", "F", false},
    {"--weights", "weights", false},
    {"--mixture", "mixture", false},
    {"--flip-party", "flip_party", false},
    {"--ideal", "ideal", true},
    {"--omega-c", "omega_c", false},
    {"--omega-0", "omega_0", false},
    {"--omega-p", "omega_p", false},
    {"--kappa", "kappa", false},
    {"--gamma", "gamma", false},
    {"--g", "g", false},
    {"--regime", "regime", false},
    {"--leakage-threshold", "leakage_threshold", false},
    {"--allow-leakage", "allow_leakage", true},
    {"--T-f", "T_f", false},
    {"--eta-0", "eta_0", false},
    {"--eta-d", "eta_d", false},
    {"--eta-a", "eta_a", false},
    {"--per-photon-losses", "per_photon_losses", true},
    {"--rounds", "rounds", false},
    {"--target", "target", false},
    {"--max-rounds", "max_rounds", false},
    {"--F-min", "F_min", false},
    {"--F-max", "F_max", false},
    {"--F-step", "F_step", false},
    {"--exact", "exact", true},
    {"--omega-p-min", "omega_p_min", false},
    {"--omega-p-max", "omega_p_max", false},
    {"--points", "points", false},
    {"--n-min", "n_min", false},
    {"--n-max", "n_max", false},
};

int dispatch(Command c, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  switch (c) {
    case Command::kRound: return cmd_round(cfg, out, err);
    case Command::kSweep: return cmd_sweep(cfg, out, err);
    case Command::kIterate: return cmd_iterate(cfg, out, err);
    case Command::kResources: return cmd_resources(cfg, out, err);
    case Command::kFaradayScan: return cmd_faraday_scan(cfg, out, err);
  }
  return kExitFailure;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"GHZ-state purification with cavity parity checks"};
  app.name("ghzpur");
  app.require_subcommand(1);

  const std::pair<const char*, const char*> commands[] = {
      {"round", "one exact purification round (plus Monte Carlo with --trials)"},
      {"sweep", "F -> F' over a fidelity grid"},
      {"iterate", "repeat rounds until a round count or target fidelity"},
      {"resources", "physical success probability per attempt"},
      {"faraday-scan", "reflection coefficient and phases over the carrier frequency"},
  };
  std::string config_path;
  std::map<std::string, std::string> overrides;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "key = value file; flags override it");
    for (const auto& f : kFlags) {
      const std::string key = f.key;
      const std::string help_text{known_keys().at(f.key)};
      if (f.boolean) {
        sub->add_flag_callback(f.flag, [&overrides, key] { overrides[key] = "true"; }, help_text);
      } else {
        sub->add_option_function<std::string>(
            f.flag, [&overrides, key](const std::string& v) { overrides[key] = v; }, help_text);
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    const Command command = parse_command(app.get_subcommands().front()->get_name());
    KeyValueConfig kv;
    if (!config_path.empty()) kv = KeyValueConfig::parse_file(config_path);
    for (const auto& [k, v] : overrides) kv.set(k, v);
    const RunConfig cfg = resolve(command, kv);
    return dispatch(command, cfg, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const StagnationError& e) {
    err << "stagnation: " << e.what() << '\n';
    return kExitStagnation;
  } catch (const LeakageError& e) {
    err << "leakage: " << e.what() << '\n';
    return kExitLeakage;
  } catch (const InvalidArgumentError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NormalizationError& e) {
    err << "invalid mixture: " << e.what() << '\n';
    return kExitConfig;
  } catch (const FamilyError& e) {
    err << "invalid mixture: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace ghzpur::cli
