#include "wban/scenario.h"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace wban {

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

// Collects problems instead of stopping at the first one.
class Reader {
 public:
  std::vector<std::string> errors;

  void unknown_keys(const YAML::Node& map, const std::string& where,
                    std::initializer_list<std::string_view> known) {
    if (!map.IsMap()) return;
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (std::find(known.begin(), known.end(), key) == known.end())
        errors.push_back(fmt::format("{}{}: unknown key", where, key));
    }
  }

  template <typename T>
  bool get(const YAML::Node& map, const char* key, const std::string& where, T& out) {
    const YAML::Node n = map[key];
    if (!n) return false;
    try {
      out = n.as<T>();
      return true;
    } catch (const YAML::Exception&) {
      errors.push_back(fmt::format("{}{}: cannot read value '{}'", where, key, dump(n)));
      return false;
    }
  }

  bool get_seconds(const YAML::Node& map, const char* key, const std::string& where,
                   SimTime& out) {
    double v = 0;
    if (!get(map, key, where, v)) return false;
    if (!std::isfinite(v) || v < 0) {
      errors.push_back(fmt::format("{}{}: must be a non-negative number of seconds", where, key));
      return false;
    }
    out = SimTime::seconds(v);
    return true;
  }

  template <typename T>
  bool get_list(const YAML::Node& map, const char* key, const std::string& where,
                std::vector<T>& out) {
    const YAML::Node n = map[key];
    if (!n) return false;
    if (!n.IsSequence()) {
      errors.push_back(fmt::format("{}{}: must be a list", where, key));
      return false;
    }
    std::vector<T> v;
    for (const auto& item : n) {
      try {
        v.push_back(item.as<T>());
      } catch (const YAML::Exception&) {
        errors.push_back(fmt::format("{}{}: cannot read element '{}'", where, key, dump(item)));
        return false;
      }
    }
    out = std::move(v);
    return true;
  }

  static std::string dump(const YAML::Node& n) {
    YAML::Emitter e;
    e << YAML::Flow << n;
    return e.c_str();
  }
};

void read_strategy_fields(Reader& r, const YAML::Node& n, const std::string& where,
                          StrategyParams& p) {
  r.unknown_keys(n, where, {"kind", "ttl", "K", "P", "I", "delta", "T", "Q", "app_bits"});
  std::string kind;
  if (r.get(n, "kind", where, kind)) {
    if (auto k = parse_strategy(kind))
      p.kind = *k;
    else
      r.errors.push_back(fmt::format("{}kind: unknown strategy '{}'", where, kind));
  }
  r.get(n, "ttl", where, p.ttl_init);
  r.get(n, "K", where, p.pruned_k);
  r.get(n, "P", where, p.probability);
  r.get_seconds(n, "I", where, p.hello_interval);
  r.get(n, "delta", where, p.mbp_delta);
  r.get_seconds(n, "T", where, p.mbp_timer);
  r.get(n, "Q", where, p.mbp_quota);
  r.get(n, "app_bits", where, p.app_bits);
}

std::vector<StrategyParams> read_strategy_list(Reader& r, const YAML::Node& n,
                                               const std::string& key,
                                               const StrategyParams& defaults) {
  std::vector<StrategyParams> out;
  if (!n.IsSequence()) {
    r.errors.push_back(key + ": must be a list");
    return out;
  }
  for (std::size_t i = 0; i < n.size(); ++i) {
    const std::string where = fmt::format("{}[{}].", key, i);
    StrategyParams p = defaults;
    const YAML::Node item = n[i];
    if (item.IsScalar()) {
      const auto name = item.as<std::string>();
      if (auto k = parse_strategy(name))
        p.kind = *k;
      else
        r.errors.push_back(fmt::format("{}kind: unknown strategy '{}'", where, name));
    } else if (item.IsMap()) {
      if (!item["kind"]) r.errors.push_back(where + "kind: missing");
      read_strategy_fields(r, item, where, p);
    } else {
      r.errors.push_back(where.substr(0, where.size() - 1) + ": must be a name or a mapping");
    }
    out.push_back(p);
  }
  return out;
}

// A 7x7 matrix in site order; entries "mean/std", "-" on the diagonal, and
// either "-" (mirror) or the same value in the lower triangle.
void read_matrix(Reader& r, const YAML::Node& rows, Posture posture, ChannelConfig& cfg) {
  const std::string where = fmt::format("channel.postures.{}", to_string(posture));
  if (!rows.IsSequence() || rows.size() != kNumSites) {
    r.errors.push_back(fmt::format("{}: must be a list of {} rows", where, kNumSites));
    return;
  }
  std::array<std::array<std::optional<LinkStats>, kNumSites>, kNumSites> cell{};
  for (int i = 0; i < kNumSites; ++i) {
    const YAML::Node row = rows[i];
    if (!row.IsSequence() || row.size() != kNumSites) {
      r.errors.push_back(fmt::format("{} row {}: must have {} entries", where,
                                     to_string(site_at(i)), kNumSites));
      return;
    }
    for (int j = 0; j < kNumSites; ++j) {
      const auto text = row[j].as<std::string>();
      if (text == "-") continue;
      LinkStats ls{};
      char slash = 0;
      std::istringstream in(text);
      if (!(in >> ls.mean_db >> slash >> ls.std_db) || slash != '/' || !(in >> std::ws).eof()) {
        r.errors.push_back(fmt::format("{} {}-{}: '{}' is not 'mean/std'", where,
                                       to_string(site_at(i)), to_string(site_at(j)), text));
        continue;
      }
      if (i == j) {
        r.errors.push_back(fmt::format("{} {}: diagonal must be '-'", where,
                                       to_string(site_at(i))));
        continue;
      }
      cell[i][j] = ls;
    }
  }
  for (int i = 0; i < kNumSites; ++i) {
    for (int j = i + 1; j < kNumSites; ++j) {
      const auto pair =
          fmt::format("{} {}-{}", where, to_string(site_at(i)), to_string(site_at(j)));
      const auto& up = cell[i][j];
      const auto& lo = cell[j][i];
      if (!up && !lo) {
        r.errors.push_back(pair + ": missing");
        continue;
      }
      if (up && lo && !(*up == *lo)) {
        r.errors.push_back(fmt::format("{}: matrix is not symmetric ({:g}/{:g} vs {:g}/{:g})",
                                       pair, up->mean_db, up->std_db, lo->mean_db, lo->std_db));
        continue;
      }
      cfg.set_link(posture, site_at(i), site_at(j), up ? *up : *lo);
    }
  }
}

void read_channel(Reader& r, const YAML::Node& n, const std::filesystem::path& base_dir,
                  ChannelConfig& cfg) {
  if (n.IsScalar()) {
    if (n.as<std::string>() != "default")
      r.errors.push_back("channel: expected 'default' or a mapping");
    return;
  }
  if (!n.IsMap()) {
    r.errors.push_back("channel: expected 'default' or a mapping");
    return;
  }
  r.unknown_keys(n, "channel.",
                 {"file", "coherence_s", "tx_power_dbm", "sensitivity_dbm", "postures"});
  YAML::Node src = n;
  if (n["file"]) {
    const std::filesystem::path file = base_dir / n["file"].as<std::string>();
    try {
      src = YAML::LoadFile(file.string());
    } catch (const YAML::BadFile&) {
      throw ScenarioIoError(fmt::format("cannot read channel file {}", file.string()));
    } catch (const YAML::Exception& e) {
      throw ScenarioIoError(fmt::format("{}: {}", file.string(), e.what()));
    }
    if (src["channel"]) src = src["channel"];
  }
  r.get_seconds(n, "coherence_s", "channel.", cfg.coherence_interval);
  r.get(n, "tx_power_dbm", "channel.", cfg.tx_power_dbm);
  r.get(n, "sensitivity_dbm", "channel.", cfg.sensitivity_dbm);
  const YAML::Node postures = src["postures"];
  if (!postures) {
    r.errors.push_back("channel.postures: missing");
    return;
  }
  if (!postures.IsMap()) {
    r.errors.push_back("channel.postures: must map posture names to matrices");
    return;
  }
  std::set<Posture> seen;
  for (const auto& kv : postures) {
    const auto name = kv.first.as<std::string>();
    auto p = parse_posture(name);
    if (!p) {
      r.errors.push_back(fmt::format("channel.postures.{}: unknown posture", name));
      continue;
    }
    seen.insert(*p);
    read_matrix(r, kv.second, *p, cfg);
  }
  for (Posture p : kAllPostures)
    if (!seen.count(p))
      r.errors.push_back(fmt::format("channel.postures.{}: missing", to_string(p)));
}

void read_mac(Reader& r, const YAML::Node& n, MacParams& mac) {
  if (!n.IsMap()) {
    r.errors.push_back("mac: must be a mapping");
    return;
  }
  r.unknown_keys(n, "mac.",
                 {"queue_capacity", "min_be", "max_be", "max_csma_backoffs", "backoff_unit_us",
                  "cca_us", "turnaround_us", "data_rate_bps", "header_bits"});
  r.get(n, "queue_capacity", "mac.", mac.queue_capacity);
  r.get(n, "min_be", "mac.", mac.min_be);
  r.get(n, "max_be", "mac.", mac.max_be);
  r.get(n, "max_csma_backoffs", "mac.", mac.max_csma_backoffs);
  std::int64_t us = 0;
  if (r.get(n, "backoff_unit_us", "mac.", us)) mac.backoff_unit = SimTime::micros(us);
  if (r.get(n, "cca_us", "mac.", us)) mac.cca_duration = SimTime::micros(us);
  if (r.get(n, "turnaround_us", "mac.", us)) mac.turnaround = SimTime::micros(us);
  r.get(n, "data_rate_bps", "mac.", mac.data_rate_bps);
  r.get(n, "header_bits", "mac.", mac.header_bits);
}

void read_sweeps(Reader& r, const YAML::Node& n, Scenario& s) {
  if (!n.IsMap()) {
    r.errors.push_back("sweeps: must be a mapping");
    return;
  }
  r.unknown_keys(n, "sweeps.",
                 {"ttl", "rates", "rate_window_s", "queue_capacities", "queue_study_rate",
                  "mbp_timers_s"});
  r.get_list(n, "ttl", "sweeps.", s.ttl_sweep);
  r.get_list(n, "rates", "sweeps.", s.rates);
  r.get_seconds(n, "rate_window_s", "sweeps.", s.rate_window);
  r.get_list(n, "queue_capacities", "sweeps.", s.queue_capacities);
  r.get(n, "queue_study_rate", "sweeps.", s.queue_study_rate);
  r.get_list(n, "mbp_timers_s", "sweeps.", s.mbp_timers_s);
}

std::vector<StrategyParams> default_strategy_set(const StrategyParams& d) {
  auto make = [&d](StrategyKind k, auto&& tweak) {
    StrategyParams p = d;
    p.kind = k;
    tweak(p);
    return p;
  };
  auto same = [](StrategyParams&) {};
  return {
      make(StrategyKind::kFlooding, same),
      make(StrategyKind::kPlainFlooding, same),
      make(StrategyKind::kPrunedFlooding, [](StrategyParams& p) { p.pruned_k = 2; }),
      make(StrategyKind::kPrunedFlooding, [](StrategyParams& p) { p.pruned_k = 3; }),
      make(StrategyKind::kPrunedFlooding, [](StrategyParams& p) { p.pruned_k = 5; }),
      make(StrategyKind::kProbabilistic, same),
      make(StrategyKind::kProbabilisticDecreasing, same),
      make(StrategyKind::kTabuFlooding, same),
      make(StrategyKind::kEbp, [](StrategyParams& p) { p.hello_interval = SimTime::millis(250); }),
      make(StrategyKind::kEbp, [](StrategyParams& p) { p.hello_interval = SimTime::millis(500); }),
      make(StrategyKind::kMbp, [](StrategyParams& p) { p.mbp_delta = 2; }),
      make(StrategyKind::kMbp, [](StrategyParams& p) { p.mbp_delta = 3; }),
      make(StrategyKind::kOptFlood, same),
  };
}

std::vector<StrategyParams> default_rate_set(const StrategyParams& d) {
  std::vector<StrategyParams> out;
  for (StrategyKind k : {StrategyKind::kFlooding, StrategyKind::kPrunedFlooding,
                         StrategyKind::kProbabilistic, StrategyKind::kMbp,
                         StrategyKind::kOptFlood}) {
    StrategyParams p = d;
    p.kind = k;
    out.push_back(p);
  }
  return out;
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> violations)
    : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

std::vector<double> default_mbp_timers() {
  constexpr int kCount = 15;
  constexpr double kLo = 0.005;
  constexpr double kHi = 1.0;
  std::vector<double> out;
  for (int i = 0; i < kCount; ++i) {
    const double v = kLo * std::pow(kHi / kLo, static_cast<double>(i) / (kCount - 1));
    out.push_back(std::round(v * 1e6) / 1e6);  // whole microseconds
  }
  return out;
}

Scenario default_scenario() {
  Scenario s;
  s.mbp_timers_s = default_mbp_timers();
  s.strategies = default_strategy_set(s.defaults);
  s.rate_strategies = default_rate_set(s.defaults);
  return s;
}

Scenario parse_scenario(const std::string& yaml_text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ScenarioIoError(fmt::format("not valid YAML: {}", e.what()));
  }
  if (!root.IsMap()) throw ScenarioError({"top level: must be a mapping"});

  Reader r;
  Scenario s = default_scenario();
  r.unknown_keys(root, "",
                 {"id", "seed_base", "seeds", "posture", "postures", "duration_s",
                  "rate_drain_s", "channel", "mac", "defaults", "strategies", "rate_strategies",
                  "sweeps"});
  r.get(root, "id", "", s.id);
  r.get(root, "seed_base", "", s.seed_base);
  r.get(root, "seeds", "", s.seeds);
  std::string posture;
  if (r.get(root, "posture", "", posture)) {
    if (auto p = parse_posture(posture))
      s.posture = *p;
    else
      r.errors.push_back(fmt::format("posture: unknown posture '{}'", posture));
  }
  std::vector<std::string> postures;
  if (r.get_list(root, "postures", "", postures)) {
    s.postures.clear();
    for (const auto& name : postures) {
      if (auto p = parse_posture(name))
        s.postures.push_back(*p);
      else
        r.errors.push_back(fmt::format("postures: unknown posture '{}'", name));
    }
  }
  r.get_seconds(root, "duration_s", "", s.duration);
  r.get_seconds(root, "rate_drain_s", "", s.rate_drain);
  if (root["channel"]) read_channel(r, root["channel"], base_dir, s.channel);
  if (root["mac"]) read_mac(r, root["mac"], s.mac);
  if (root["defaults"]) {
    if (root["defaults"]["kind"]) r.errors.push_back("defaults.kind: not allowed here");
    read_strategy_fields(r, root["defaults"], "defaults.", s.defaults);
  }
  s.strategies = default_strategy_set(s.defaults);
  s.rate_strategies = default_rate_set(s.defaults);
  if (root["strategies"])
    s.strategies = read_strategy_list(r, root["strategies"], "strategies", s.defaults);
  if (root["rate_strategies"])
    s.rate_strategies =
        read_strategy_list(r, root["rate_strategies"], "rate_strategies", s.defaults);
  if (root["sweeps"]) read_sweeps(r, root["sweeps"], s);

  if (!r.errors.empty()) throw ScenarioError(std::move(r.errors));
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioIoError(fmt::format("cannot read {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw ScenarioIoError(fmt::format("cannot read {}", path.string()));
  Scenario s = parse_scenario(buf.str(), path.parent_path());
  auto v = validate_scenario(s);
  if (!v.empty()) throw ScenarioError(std::move(v));
  return s;
}

std::vector<std::string> validate_scenario(const Scenario& s, bool run_checks) {
  std::vector<std::string> out;
  auto add = [&out](std::string where, const std::vector<std::string>& v) {
    for (const auto& m : v) out.push_back(where + m);
  };
  if (s.id.empty()) out.push_back("id: must not be empty");
  if (s.seeds < 1) out.push_back("seeds: must be >= 1");
  if (s.postures.empty()) out.push_back("postures: must not be empty");
  if (s.duration <= SimTime()) out.push_back("duration_s: must be > 0");
  if (s.rate_drain < SimTime()) out.push_back("rate_drain_s: must be >= 0");
  add("channel: ", s.channel.violations());
  add("mac: ", s.mac.violations());
  add("defaults: ", s.defaults.violations());
  if (s.strategies.empty()) out.push_back("strategies: must not be empty");
  if (s.rate_strategies.empty()) out.push_back("rate_strategies: must not be empty");
  for (std::size_t i = 0; i < s.strategies.size(); ++i)
    add(fmt::format("strategies[{}]: ", i), s.strategies[i].violations());
  for (std::size_t i = 0; i < s.rate_strategies.size(); ++i)
    add(fmt::format("rate_strategies[{}]: ", i), s.rate_strategies[i].violations());

  if (s.ttl_sweep.empty()) out.push_back("sweeps.ttl: must not be empty");
  for (int t : s.ttl_sweep)
    if (t < 1) out.push_back(fmt::format("sweeps.ttl: {} must be >= 1", t));
  if (s.rates.empty()) out.push_back("sweeps.rates: must not be empty");
  for (double r : s.rates)
    if (!(r > 0)) out.push_back(fmt::format("sweeps.rates: {} must be > 0", r));
  if (s.rate_window <= SimTime()) out.push_back("sweeps.rate_window_s: must be > 0");
  if (s.queue_capacities.empty()) out.push_back("sweeps.queue_capacities: must not be empty");
  for (std::size_t q : s.queue_capacities)
    if (q < 1) out.push_back("sweeps.queue_capacities: capacities must be >= 1");
  if (!(s.queue_study_rate > 0)) out.push_back("sweeps.queue_study_rate: must be > 0");
  if (s.mbp_timers_s.empty()) out.push_back("sweeps.mbp_timers_s: must not be empty");
  for (double t : s.mbp_timers_s)
    if (!(t > 0)) out.push_back(fmt::format("sweeps.mbp_timers_s: {} must be > 0", t));

  if (run_checks && out.empty()) {
    StrategyParams flood = s.defaults;
    flood.kind = StrategyKind::kFlooding;
    flood.ttl_init = std::max(flood.ttl_init,
                              *std::max_element(s.ttl_sweep.begin(), s.ttl_sweep.end()));
    Simulation sim(single_packet_run(s, flood, s.posture, s.seed(0)));
    sim.run();
    if (!sim.finished_quiescent())
      out.push_back(fmt::format(
          "duration_s: Flooding at ttl={} still active after {:g} s; increase the duration",
          flood.ttl_init, s.duration.sec()));
  }
  return out;
}

RunConfig single_packet_run(const Scenario& s, const StrategyParams& p, Posture posture,
                            std::uint64_t seed) {
  RunConfig c;
  c.scenario_key = s.id;
  c.channel = s.channel;
  c.posture = posture;
  c.strategy = p;
  c.mac = s.mac;
  c.source.mode = SourceMode::kSinglePacket;
  c.duration = s.duration;
  c.seed = seed;
  return c;
}

RunConfig rate_run(const Scenario& s, const StrategyParams& p, double rate_pps,
                   std::size_t queue_capacity, std::uint64_t seed) {
  RunConfig c;
  c.scenario_key = s.id;
  c.channel = s.channel;
  c.posture = s.posture;
  c.strategy = p;
  c.mac = s.mac;
  c.mac.queue_capacity = queue_capacity;
  c.source.mode = SourceMode::kRate;
  c.source.rate_pps = rate_pps;
  c.source.window = s.rate_window;
  c.duration = s.rate_drain;
  c.seed = seed;
  return c;
}

}  // namespace wban
