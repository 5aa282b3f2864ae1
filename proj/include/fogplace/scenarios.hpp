#pragma once

// Scenario configuration (YAML), the demand x N x geo sweep, and report files.

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "fogplace/energy.hpp"
#include "fogplace/error.hpp"
#include "fogplace/placement.hpp"
#include "fogplace/power.hpp"
#include "fogplace/timing.hpp"
#include "fogplace/topology.hpp"

namespace fogplace {

/// Power profiles per device class; topology entries without their own profile take these.
struct PowerDefaults {
  DevicePowerProfile lte_bs{528.0, 333.0, 0.3e9, true, 0.003};
  DevicePowerProfile ont{15.0, 8.0, 1.25e9, true, 0.003};
  DevicePowerProfile olt{1940.0, 60.0, 20e9, true, 0.003};
  DevicePowerProfile metro{1100.0, 660.0, 40e9, true, 0.003};
  DevicePowerProfile cloud{0.0, 0.0, 40e9, true, 0.003};
  DevicePowerProfile node_switch{3.52, 0.57, 16e9, false, 1.0};
  DevicePowerProfile server{180.0, 78.0, 60.0, false, 1.0};
};

struct SweepGrid {
  std::vector<double> fractions{0.2, 0.4, 0.6, 0.8, 1.0};
  std::vector<int> servers{2, 4};
  std::vector<bool> geo{false, true};
};

struct ScenarioConfig {
  Topology topology;  // power profiles filled in
  SignalSpec signal;
  ServerSpec server;  // pat_cap resolved from pat_fraction unless given
  TimingConstants timing;
  DevicePowerProfile node_switch;
  double pat_fraction = 0.2;
  SweepGrid sweep;
  bool duplicate_results = false;
  std::string output_dir = "out";

  int cohort() const {
    int n = 0;
    for (const auto& c : topology.clinics) n += c.patient_count;
    return n;
  }
};

// ---------------------------------------------------------------- numbers

/// Fixed-notation decimal rounded to 6 significant digits.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.5e", v);
  const double r = std::strtod(buf, nullptr);
  const int exp10 = static_cast<int>(std::floor(std::log10(std::abs(r))));
  const int decimals = std::max(0, 5 - exp10);
  std::snprintf(buf, sizeof buf, "%.*f", decimals, r);
  std::string s = buf;
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

// ---------------------------------------------------------------- config

namespace detail {

class ConfigReader {
 public:
  std::vector<std::string> errors;

  static std::string where(const YAML::Node& n) {
    const auto m = n.Mark();
    if (m.is_null()) return "";
    return " (line " + std::to_string(m.line + 1) + ")";
  }

  template <class T>
  std::optional<T> get(const YAML::Node& parent, const std::string& key, const std::string& path) {
    const YAML::Node n = parent[key];
    if (!n) return std::nullopt;
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      errors.push_back(path + "." + key + ": expected " + type_name<T>() + where(n));
      return std::nullopt;
    }
  }

  template <class T>
  void set(const YAML::Node& parent, const std::string& key, const std::string& path, T& out) {
    if (auto v = get<T>(parent, key, path)) out = *v;
  }

  template <class T>
  T need(const YAML::Node& parent, const std::string& key, const std::string& path, T fallback = {}) {
    if (!parent[key]) {
      errors.push_back(path + ": missing '" + key + "'" + where(parent));
      return fallback;
    }
    return get<T>(parent, key, path).value_or(fallback);
  }

  void known_keys(const YAML::Node& n, const std::string& path, std::initializer_list<const char*> keys) {
    if (!n.IsMap()) {
      errors.push_back(path + ": expected a mapping" + where(n));
      return;
    }
    for (const auto& kv : n) {
      const auto k = kv.first.as<std::string>();
      if (std::none_of(keys.begin(), keys.end(), [&](const char* s) { return k == s; }))
        errors.push_back(path + ": unknown field '" + k + "'" + where(kv.first));
    }
  }

  std::optional<DevicePowerProfile> profile(const YAML::Node& n, const std::string& path,
                                            const DevicePowerProfile& base) {
    if (!n) return std::nullopt;
    known_keys(n, path, {"max_power", "idle_power", "capacity", "shared", "idle_share"});
    if (!n.IsMap()) return std::nullopt;
    DevicePowerProfile p = base;
    set(n, "max_power", path, p.max_power);
    set(n, "idle_power", path, p.idle_power);
    set(n, "capacity", path, p.capacity);
    set(n, "shared", path, p.shared);
    set(n, "idle_share", path, p.idle_share);
    for (auto& v : validate(p, path)) errors.push_back(v + where(n));
    return p;
  }

 private:
  template <class T>
  static const char* type_name() {
    if constexpr (std::is_same_v<T, bool>) return "true/false";
    else if constexpr (std::is_integral_v<T>) return "an integer";
    else if constexpr (std::is_floating_point_v<T>) return "a number";
    else if constexpr (std::is_same_v<T, std::string>) return "a string";
    else return "a list";
  }
};

}  // namespace detail

/// Parses and validates a scenario document; omitted constants keep their defaults.
inline ScenarioConfig parse_config(const YAML::Node& root, const std::string& base_dir = ".") {
  detail::ConfigReader rd;
  ScenarioConfig cfg;
  if (!root.IsMap()) throw InputError("config: top level must be a mapping");
  rd.known_keys(root, "config", {"topology", "signal", "power", "sweep"});

  PowerDefaults pw;
  if (const auto n = root["power"]) {
    rd.known_keys(n, "power", {"lte_bs", "ont", "olt", "metro", "cloud", "switch", "server"});
    if (auto p = rd.profile(n["lte_bs"], "power.lte_bs", pw.lte_bs)) pw.lte_bs = *p;
    if (auto p = rd.profile(n["ont"], "power.ont", pw.ont)) pw.ont = *p;
    if (auto p = rd.profile(n["olt"], "power.olt", pw.olt)) pw.olt = *p;
    if (auto p = rd.profile(n["metro"], "power.metro", pw.metro)) pw.metro = *p;
    if (auto p = rd.profile(n["cloud"], "power.cloud", pw.cloud)) pw.cloud = *p;
    if (auto p = rd.profile(n["switch"], "power.switch", pw.node_switch)) pw.node_switch = *p;
    if (auto p = rd.profile(n["server"], "power.server", pw.server)) pw.server = *p;
  }
  cfg.node_switch = pw.node_switch;
  cfg.server.power = pw.server;

  std::optional<int> pat_cap;
  if (const auto n = root["signal"]) {
    const std::string s = "signal";
    rd.known_keys(n, s, {"ecg_bits", "result_bits", "recording_time", "budget", "re_rate", "healthcare_share",
                         "proc_slope", "proc_intercept", "pat_fraction", "pat_cap", "duplicate_results"});
    rd.set(n, "ecg_bits", s, cfg.signal.ecg_bits);
    rd.set(n, "result_bits", s, cfg.signal.result_bits);
    rd.set(n, "recording_time", s, cfg.signal.recording_time);
    rd.set(n, "budget", s, cfg.timing.budget);
    rd.set(n, "re_rate", s, cfg.timing.re_rate);
    rd.set(n, "healthcare_share", s, cfg.timing.healthcare_share);
    rd.set(n, "proc_slope", s, cfg.server.proc_slope);
    rd.set(n, "proc_intercept", s, cfg.server.proc_intercept);
    rd.set(n, "pat_fraction", s, cfg.pat_fraction);
    pat_cap = rd.get<int>(n, "pat_cap", s);
    rd.set(n, "duplicate_results", s, cfg.duplicate_results);
  }

  const auto topo = root["topology"];
  if (!topo) {
    rd.errors.push_back("config: missing 'topology'");
  } else {
    const std::string s = "topology";
    rd.known_keys(topo, s, {"clusters", "metro_link_capacity", "cloud_uplink_capacity", "olts", "onts",
                            "base_stations", "clinics"});
    auto& t = cfg.topology;
    rd.set(topo, "clusters", s, t.clusters);
    rd.set(topo, "metro_link_capacity", s, t.metro_link_capacity);
    rd.set(topo, "cloud_uplink_capacity", s, t.cloud_uplink_capacity);
    t.metro_power = pw.metro;
    t.cloud_power = pw.cloud;

    auto each = [&](const char* key, auto&& fn) {
      const auto list = topo[key];
      if (!list) {
        rd.errors.push_back(s + ": missing '" + key + "'");
        return;
      }
      if (!list.IsSequence()) {
        rd.errors.push_back(s + "." + key + ": expected a list" + rd.where(list));
        return;
      }
      for (std::size_t i = 0; i < list.size(); ++i) fn(list[i], s + "." + key + "[" + std::to_string(i) + "]");
    };
    each("olts", [&](const YAML::Node& n, const std::string& p) {
      rd.known_keys(n, p, {"id", "cluster", "power"});
      Olt o;
      o.id = rd.need<std::string>(n, "id", p);
      o.cluster = rd.need<int>(n, "cluster", p);
      o.power = rd.profile(n["power"], p + ".power", pw.olt).value_or(pw.olt);
      t.olts.push_back(std::move(o));
    });
    each("onts", [&](const YAML::Node& n, const std::string& p) {
      rd.known_keys(n, p, {"id", "olt", "uplink_capacity", "power"});
      Ont o;
      o.id = rd.need<std::string>(n, "id", p);
      o.olt_id = rd.need<std::string>(n, "olt", p);
      rd.set(n, "uplink_capacity", p, o.uplink_capacity);
      o.power = rd.profile(n["power"], p + ".power", pw.ont).value_or(pw.ont);
      t.onts.push_back(std::move(o));
    });
    each("base_stations", [&](const YAML::Node& n, const std::string& p) {
      rd.known_keys(n, p, {"id", "ont", "capacity", "power"});
      BaseStation b;
      b.id = rd.need<std::string>(n, "id", p);
      b.ont_id = rd.need<std::string>(n, "ont", p);
      rd.set(n, "capacity", p, b.capacity);
      b.power = rd.profile(n["power"], p + ".power", pw.lte_bs).value_or(pw.lte_bs);
      t.base_stations.push_back(std::move(b));
    });
    each("clinics", [&](const YAML::Node& n, const std::string& p) {
      rd.known_keys(n, p, {"id", "patients", "bs"});
      Clinic c;
      c.id = rd.need<std::string>(n, "id", p);
      c.patient_count = rd.need<int>(n, "patients", p);
      c.candidate_bs = rd.need<std::vector<std::string>>(n, "bs", p);
      t.clinics.push_back(std::move(c));
    });
    for (auto& v : validate(t)) rd.errors.push_back("topology: " + v);
  }

  if (const auto n = root["sweep"]) {
    const std::string s = "sweep";
    rd.known_keys(n, s, {"fractions", "servers", "geo", "output"});
    rd.set(n, "fractions", s, cfg.sweep.fractions);
    rd.set(n, "servers", s, cfg.sweep.servers);
    if (auto g = rd.get<std::vector<bool>>(n, "geo", s)) cfg.sweep.geo = *g;
    rd.set(n, "output", s, cfg.output_dir);
  }
  if (!cfg.output_dir.empty() && std::filesystem::path(cfg.output_dir).is_relative())
    cfg.output_dir = (std::filesystem::path(base_dir) / cfg.output_dir).lexically_normal().string();

  for (double f : cfg.sweep.fractions)
    if (!(f > 0.0 && f <= 1.0)) rd.errors.push_back("sweep.fractions: " + format_number(f) + " is outside (0, 1]");
  for (int nv : cfg.sweep.servers)
    if (nv < 1) rd.errors.push_back("sweep.servers: " + std::to_string(nv) + " is below 1");
  if (cfg.sweep.fractions.empty() || cfg.sweep.servers.empty() || cfg.sweep.geo.empty())
    rd.errors.push_back("sweep: fractions, servers and geo must be non-empty");

  auto positive = [&](double v, const char* what) {
    if (!(v > 0.0)) rd.errors.push_back(std::string("signal.") + what + " must be > 0");
  };
  positive(cfg.signal.ecg_bits, "ecg_bits");
  positive(cfg.signal.result_bits, "result_bits");
  positive(cfg.timing.budget, "budget");
  positive(cfg.timing.re_rate, "re_rate");
  if (!(cfg.signal.recording_time >= 0.0)) rd.errors.push_back("signal.recording_time must be >= 0");
  if (!(cfg.timing.healthcare_share > 0.0 && cfg.timing.healthcare_share <= 1.0))
    rd.errors.push_back("signal.healthcare_share must be in (0, 1]");
  if (!(cfg.server.proc_slope >= 0.0) || !(cfg.server.proc_intercept >= 0.0))
    rd.errors.push_back("signal.proc_slope and signal.proc_intercept must be >= 0");
  if (!(cfg.pat_fraction > 0.0 && cfg.pat_fraction <= 1.0)) rd.errors.push_back("signal.pat_fraction must be in (0, 1]");

  if (pat_cap) {
    cfg.server.pat_cap = *pat_cap;
  } else {
    cfg.server.pat_cap = static_cast<int>(std::lround(cfg.pat_fraction * cfg.cohort()));
  }
  if (cfg.server.pat_cap < 1) rd.errors.push_back("server patient capacity resolves to " +
                                                  std::to_string(cfg.server.pat_cap) + ", must be >= 1");
  cfg.server.power.capacity = std::max(cfg.server.pat_cap, 1);

  if (!rd.errors.empty()) throw InputError("invalid config", rd.errors);
  return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw InputError("cannot read config '" + path + "'");
  } catch (const YAML::ParserException& e) {
    throw InputError("config '" + path + "': parse error at line " + std::to_string(e.mark.line + 1) +
                     ", column " + std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  return parse_config(root, std::filesystem::path(path).parent_path().string());
}

// ---------------------------------------------------------------- problems

/// Per-clinic counts scaled by `fraction`, largest remainder first, summing to round(fraction * cohort).
inline std::vector<int> scale_demand(const std::vector<int>& base, double fraction) {
  long total = std::accumulate(base.begin(), base.end(), 0L);
  const long target = std::lround(fraction * static_cast<double>(total));
  std::vector<int> out(base.size(), 0);
  if (total == 0) return out;
  std::vector<std::pair<double, std::size_t>> rest;
  long given = 0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double exact = static_cast<double>(base[i]) * static_cast<double>(target) / static_cast<double>(total);
    out[i] = static_cast<int>(std::floor(exact));
    given += out[i];
    rest.push_back({exact - out[i], i});
  }
  std::stable_sort(rest.begin(), rest.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; given < target && k < rest.size(); ++k, ++given) ++out[rest[k].second];
  return out;
}

inline PlacementProblem make_problem(const ScenarioConfig& cfg, std::shared_ptr<const Network> net, double fraction,
                                     int servers, bool geo) {
  PlacementProblem pb;
  pb.network = std::move(net);
  pb.signal = cfg.signal;
  pb.server = cfg.server;
  pb.timing = cfg.timing;
  pb.node_switch = cfg.node_switch;
  std::vector<int> base;
  for (const auto& c : cfg.topology.clinics) base.push_back(c.patient_count);
  pb.demand = scale_demand(base, fraction);
  pb.servers_per_node = servers;
  pb.geo_constraint = geo;
  pb.duplicate_results = cfg.duplicate_results;
  return pb;
}

// ---------------------------------------------------------------- sweep

struct SweepRow {
  double fraction = 0.0;
  int servers = 0;
  bool geo = false;
  int demand = 0;
  std::string status;  // optimal, bound_gap, or infeasible/error
  std::string reason;  // failure message, empty when solved
  double network_j = 0.0;
  double processing_j = 0.0;
  double total_j = 0.0;
  std::vector<std::string> active_nodes;
  int server_count = 0;
  long bb_nodes = 0;
  double solve_seconds = 0.0;
  std::optional<Solution> solution;

  bool solved() const { return solution.has_value(); }
};

struct SweepResult {
  std::vector<SweepRow> rows;  // fractions outermost, then N, then geo
};

inline std::string cell_name(double fraction, int servers, bool geo) {
  return "f" + format_number(fraction) + "_N" + std::to_string(servers) + (geo ? "_geo-on" : "_geo-off");
}

inline std::string cell_name(const SweepRow& r) { return cell_name(r.fraction, r.servers, r.geo); }

inline SweepRow solve_cell(const ScenarioConfig& cfg, std::shared_ptr<const Network> net, double fraction,
                           int servers, bool geo) {
  SweepRow row;
  row.fraction = fraction;
  row.servers = servers;
  row.geo = geo;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const auto pb = make_problem(cfg, net, fraction, servers, geo);
    row.demand = pb.total_demand();
    Solution sol = solve_exact(pb);
    row.status = sol.optimality == Optimality::proven_optimal ? "optimal" : "bound_gap";
    row.network_j = sol.energy.network_total;
    row.processing_j = sol.energy.processing_total;
    row.total_j = sol.energy.grand_total;
    const auto nodes = net->candidate_nodes(servers);
    for (auto n : active_nodes(sol.placement)) row.active_nodes.push_back(nodes[n.value].id);
    row.server_count = total_servers(sol.placement);
    row.bb_nodes = sol.nodes_explored;
    row.solution = std::move(sol);
  } catch (const InfeasibleError& e) {
    row.status = std::string("infeasible:") + to_string(e.kind());
    row.reason = e.what();
  } catch (const Error& e) {
    row.status = "error";
    row.reason = e.what();
  }
  row.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

/// Solves every grid cell; `jobs` > 1 solves cells concurrently, rows stay in grid order.
inline SweepResult run_sweep(const ScenarioConfig& cfg, unsigned jobs = 1) {
  auto net = std::make_shared<const Network>(cfg.topology);
  struct Cell {
    double f;
    int n;
    bool g;
  };
  std::vector<Cell> cells;
  for (double f : cfg.sweep.fractions)
    for (int n : cfg.sweep.servers)
      for (bool g : cfg.sweep.geo) cells.push_back({f, n, g});

  SweepResult out;
  out.rows.resize(cells.size());
  jobs = std::max(1u, jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++)
      out.rows[i] = solve_cell(cfg, net, cells[i].f, cells[i].n, cells[i].g);
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < std::min<std::size_t>(jobs, cells.size()); ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return out;
}

// ---------------------------------------------------------------- writers

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw InputError("cannot write '" + tmp.string() + "'");
    os << content;
    if (!os) throw InputError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline std::string placement_csv(const Solution& sol, const Network& net, int servers_per_node) {
  const auto nodes = net.candidate_nodes(servers_per_node);
  std::ostringstream os;
  os << "clinic,bs,primary_node,backup_node,patients\n";
  for (const auto& [k, count] : sol.placement.assignments) {
    if (count == 0) continue;
    os << net.clinics()[k.clinic.value].id << ',' << net.device(k.bs).id << ',' << nodes[k.primary.value].id << ','
       << nodes[k.backup.value].id << ',' << count << '\n';
  }
  return os.str();
}

inline std::string energy_csv(const EnergyReport& r) {
  std::ostringstream os;
  os << "device_id,device_kind,idle_J,proportional_J,total_J\n";
  for (const auto& d : r.devices)
    os << d.id << ',' << d.kind << ',' << format_number(d.idle_j) << ',' << format_number(d.proportional_j) << ','
       << format_number(d.total()) << '\n';
  os << "network_total,total,,," << format_number(r.network_total) << '\n';
  os << "processing_total,total,,," << format_number(r.processing_total) << '\n';
  os << "grand_total,total,,," << format_number(r.grand_total) << '\n';
  return os.str();
}

inline nlohmann::ordered_json summary_json(const SweepRow& row, const Network& net) {
  using nlohmann::ordered_json;
  auto num = [](double v) { return ordered_json(std::strtod(format_number(v).c_str(), nullptr)); };
  ordered_json j;
  j["cell"] = cell_name(row);
  j["demand_fraction"] = num(row.fraction);
  j["demand"] = row.demand;
  j["servers_per_node"] = row.servers;
  j["geo"] = row.geo;
  j["status"] = row.status;
  if (!row.solved()) {
    j["reason"] = row.reason;
    return j;
  }
  const auto& sol = *row.solution;
  j["objective_J"] = num(sol.objective);
  j["network_J"] = num(row.network_j);
  j["processing_J"] = num(row.processing_j);
  j["bound_gap_J"] = num(sol.bound_gap);
  j["active_nodes"] = row.active_nodes;
  const auto nodes = net.candidate_nodes(row.servers);
  ordered_json servers = ordered_json::object();
  for (const auto& [n, s] : sol.placement.servers)
    if (s > 0) servers[nodes[n.value].id] = s;
  j["servers"] = servers;
  j["server_count"] = row.server_count;
  j["bb_nodes"] = row.bb_nodes;
  const auto& p = sol.plan;
  j["rate_plan"] = {{"max_patients_per_node", p.max_patients},
                    {"processing_time_s", num(p.processing_time)},
                    {"max_upload_time_s", num(p.max_upload_time)},
                    {"upload_re", p.upload.resource_elements},
                    {"upload_rate_bps", num(p.upload.rate)},
                    {"upload_time_s", num(p.upload.time)},
                    {"upload_air_share_bps", num(p.upload_air_share)},
                    {"upload_path_share_bps", num(p.upload_path_share)},
                    {"feedback_re", p.feedback.resource_elements},
                    {"feedback_rate_bps", num(p.feedback.rate)},
                    {"feedback_time_s", num(p.feedback.time)},
                    {"storage_rate_bps", num(p.storage.rate)},
                    {"storage_time_s", num(p.storage.time)}};
  return j;
}

inline std::string summary_csv(const SweepResult& s) {
  std::ostringstream os;
  os << "demand_fraction,N,geo,demand,network_J,processing_J,total_J,active_nodes,server_count,solve_status,"
        "bb_nodes,reason\n";
  for (const auto& r : s.rows) {
    os << format_number(r.fraction) << ',' << r.servers << ',' << (r.geo ? "on" : "off") << ',' << r.demand << ',';
    if (r.solved()) {
      std::string nodes;
      for (const auto& n : r.active_nodes) nodes += (nodes.empty() ? "" : ";") + n;
      os << format_number(r.network_j) << ',' << format_number(r.processing_j) << ',' << format_number(r.total_j)
         << ',' << nodes << ',' << r.server_count << ',' << r.status << ',' << r.bb_nodes << ",\n";
    } else {
      std::string why = r.reason;
      std::replace(why.begin(), why.end(), ',', ';');
      std::replace(why.begin(), why.end(), '\n', ' ');
      os << ",,,,," << r.status << ",,\"" << why << "\"\n";
    }
  }
  return os.str();
}

inline std::string timing_csv(const SweepResult& s) {
  std::ostringstream os;
  os << "demand_fraction,N,geo,solve_time_s\n";
  for (const auto& r : s.rows)
    os << format_number(r.fraction) << ',' << r.servers << ',' << (r.geo ? "on" : "off") << ','
       << format_number(r.solve_seconds) << '\n';
  return os.str();
}

/// One file per energy component: a row per demand fraction, a column per (N, geo) series.
inline std::pair<std::string, std::string> plot_data(const SweepResult& s) {
  std::vector<std::pair<int, bool>> series;
  std::vector<double> fractions;
  for (const auto& r : s.rows) {
    if (std::find(series.begin(), series.end(), std::make_pair(r.servers, r.geo)) == series.end())
      series.push_back({r.servers, r.geo});
    if (std::find(fractions.begin(), fractions.end(), r.fraction) == fractions.end()) fractions.push_back(r.fraction);
  }
  std::sort(series.begin(), series.end());
  std::string header = "# demand_fraction";
  for (auto [n, g] : series) header += " N" + std::to_string(n) + (g ? "_geo-on" : "_geo-off");
  header += "\n";

  auto table = [&](double SweepRow::*field) {
    std::string out = header;
    for (double f : fractions) {
      out += format_number(f);
      for (auto [n, g] : series) {
        auto it = std::find_if(s.rows.begin(), s.rows.end(),
                               [&](const SweepRow& r) { return r.fraction == f && r.servers == n && r.geo == g; });
        out += " ";
        out += (it != s.rows.end() && it->solved()) ? format_number((*it).*field) : "nan";
      }
      out += "\n";
    }
    return out;
  };
  return {table(&SweepRow::network_j), table(&SweepRow::processing_j)};
}

/// Writes one cell's placement, energy and summary files.
inline void write_cell(const SweepRow& row, const Network& net, const std::filesystem::path& dir) {
  const auto name = cell_name(row);
  if (row.solved()) {
    write_file_atomic(dir / ("placement_" + name + ".csv"), placement_csv(*row.solution, net, row.servers));
    write_file_atomic(dir / ("energy_" + name + ".csv"), energy_csv(row.solution->energy));
  }
  write_file_atomic(dir / ("summary_" + name + ".json"), summary_json(row, net).dump(2) + "\n");
}

inline void write_sweep(const SweepResult& s, const Network& net, const std::filesystem::path& dir) {
  for (const auto& r : s.rows) write_cell(r, net, dir);
  write_file_atomic(dir / "sweep_summary.csv", summary_csv(s));
  write_file_atomic(dir / "sweep_timing.csv", timing_csv(s));
  if (s.rows.empty()) return;
  auto [network, processing] = plot_data(s);
  write_file_atomic(dir / "plot_network.dat", network);
  write_file_atomic(dir / "plot_processing.dat", processing);
}

// ---------------------------------------------------------------- placement files

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

/// Reads a placement table written by placement_csv. Unknown ids are input errors.
inline Placement read_placement_csv(std::istream& is, const Network& net, int servers_per_node) {
  const auto nodes = net.candidate_nodes(servers_per_node);
  std::map<std::string, std::uint32_t> node_ix, clinic_ix;
  for (std::uint32_t i = 0; i < nodes.size(); ++i) node_ix[nodes[i].id] = i;
  for (std::uint32_t i = 0; i < net.clinics().size(); ++i) clinic_ix[net.clinics()[i].id] = i;

  Placement pl;
  std::vector<std::string> errors;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (lineno == 1 || line.empty() || line == "\r") continue;
    const auto f = detail::split_csv_line(line);
    const std::string at = "line " + std::to_string(lineno) + ": ";
    if (f.size() != 5) {
      errors.push_back(at + "expected 5 fields");
      continue;
    }
    auto c = clinic_ix.find(f[0]);
    auto bs = net.find(f[1]);
    auto np = node_ix.find(f[2]), nb = node_ix.find(f[3]);
    int count = 0;
    try {
      std::size_t used = 0;
      count = std::stoi(f[4], &used);
      if (used != f[4].size()) throw std::invalid_argument(f[4]);
    } catch (const std::exception&) {
      errors.push_back(at + "patient count '" + f[4] + "' is not an integer");
      continue;
    }
    if (c == clinic_ix.end()) errors.push_back(at + "unknown clinic '" + f[0] + "'");
    if (!bs) errors.push_back(at + "unknown base station '" + f[1] + "'");
    if (np == node_ix.end()) errors.push_back(at + "unknown node '" + f[2] + "'");
    if (nb == node_ix.end()) errors.push_back(at + "unknown node '" + f[3] + "'");
    if (c == clinic_ix.end() || !bs || np == node_ix.end() || nb == node_ix.end()) continue;
    pl.assignments[{ClinicIndex{c->second}, *bs, NodeIndex{np->second}, NodeIndex{nb->second}}] += count;
  }
  if (!errors.empty()) throw InputError("invalid placement file", errors);
  return pl;
}

}  // namespace fogplace
