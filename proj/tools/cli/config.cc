#include "cli/config.h"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <sstream>

namespace ghzpur::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(fmt::format("{}: cannot parse '{}' as a number", key, text));
  }
  return value;
}

}  // namespace

const std::map<std::string_view, std::string_view>& known_keys() {
  static const std::map<std::string_view, std::string_view> keys = {
      {"F", "fidelity of a binary input mixture"},
      {"F_max", "sweep: last fidelity"},
      {"F_min", "sweep: first fidelity"},
      {"F_step", "sweep: fidelity step"},
      {"T_f", "fiber coupling and transmission efficiency"},
      {"allow_leakage", "report instead of failing when the kept state leaves the GHZ diagonal"},
      {"error", "bit-flip or phase-flip"},
      {"eta_0", "efficiency of the other optical elements"},
      {"eta_a", "atomic measurement efficiency"},
      {"eta_d", "single-photon detector efficiency"},
      {"exact", "sweep: run the full simulation for every row"},
      {"flip_party", "party (1-based) carrying the bit flip of a binary mixture"},
      {"g", "atom-cavity coupling"},
      {"gamma", "atomic decay rate"},
      {"ideal", "use the ideal phase gate instead of cavity parameters"},
      {"kappa", "cavity damping rate"},
      {"leakage_threshold", "largest tolerated weight outside the GHZ diagonal"},
      {"max_rounds", "iterate: give up after this many rounds"},
      {"mixture", "path of a GHZ-diagonal mixture file"},
      {"n", "number of parties"},
      {"n_max", "resources: last party count"},
      {"n_min", "resources: first party count"},
      {"omega_0", "atomic transition frequency"},
      {"omega_c", "cavity mode frequency"},
      {"omega_p", "photon carrier frequency"},
      {"omega_p_max", "faraday-scan: last carrier frequency"},
      {"omega_p_min", "faraday-scan: first carrier frequency"},
      {"out", "output path for the CSV"},
      {"per_photon_losses", "apply T_f and eta_0 once per photon"},
      {"points", "faraday-scan: number of samples"},
      {"regime", "pure-phase or allow-absorption"},
      {"rounds", "iterate: number of rounds"},
      {"seed", "Monte Carlo seed"},
      {"target", "iterate: stop once this fidelity is reached"},
      {"threads", "Monte Carlo worker threads"},
      {"trials", "Monte Carlo trials (0 disables)"},
      {"weights", "inline mixture, e.g. 00+:0.7,01+:0.1"},
  };
  return keys;
}

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("line {}: expected key = value", line_no));
    }
    const auto key = trim(view.substr(0, eq));
    const auto value = trim(view.substr(eq + 1));
    if (key.empty()) throw ConfigError(fmt::format("line {}: empty key", line_no));
    if (cfg.has(key)) throw ConfigError(fmt::format("line {}: duplicate key '{}'", line_no, key));
    try {
      cfg.set(key, std::string(value));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  return parse(in);
}

void KeyValueConfig::set(std::string_view key, std::string value) {
  if (!known_keys().contains(key)) throw ConfigError(fmt::format("unknown key '{}'", key));
  entries_.insert_or_assign(std::string(key), std::move(value));
}

bool KeyValueConfig::has(std::string_view key) const { return entries_.find(key) != entries_.end(); }

std::optional<std::string> KeyValueConfig::get(std::string_view key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void KeyValueConfig::merge(const KeyValueConfig& other) {
  for (const auto& [k, v] : other.entries_) entries_.insert_or_assign(k, v);
}

std::string KeyValueConfig::serialize() const {
  std::ostringstream out;
  for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
  return out.str();
}

std::optional<double> KeyValueConfig::get_double(std::string_view key) const {
  auto v = get(key);
  if (!v) return std::nullopt;
  return parse_number<double>(key, *v);
}

std::optional<long long> KeyValueConfig::get_int(std::string_view key) const {
  auto v = get(key);
  if (!v) return std::nullopt;
  return parse_number<long long>(key, *v);
}

std::optional<unsigned long long> KeyValueConfig::get_u64(std::string_view key) const {
  auto v = get(key);
  if (!v) return std::nullopt;
  return parse_number<unsigned long long>(key, *v);
}

std::optional<bool> KeyValueConfig::get_bool(std::string_view key) const {
  auto v = get(key);
  if (!v) return std::nullopt;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError(fmt::format("{}: expected true or false, got '{}'", key, *v));
}

}  // namespace ghzpur::cli
