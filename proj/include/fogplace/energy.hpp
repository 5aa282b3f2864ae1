#pragma once

// Per-window energy accounting of a placement: shared network devices are
// charged a fraction of their idle power once they carry any traffic, plus
// energy-per-bit for every bit they forward; node switches and processing
// servers are dedicated and pay full idle power.

#include <cmath>
#include <compare>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fogplace/error.hpp"
#include "fogplace/power.hpp"
#include "fogplace/timing.hpp"
#include "fogplace/topology.hpp"

namespace fogplace {

/// Patients of `clinic` reaching the network through `bs`, processed by a
/// primary server at `primary` and protected by a backup server at `backup`.
struct AssignmentKey {
  ClinicIndex clinic;
  DeviceIndex bs;
  NodeIndex primary;
  NodeIndex backup;
  friend auto operator<=>(const AssignmentKey&, const AssignmentKey&) = default;
};

struct Placement {
  std::map<AssignmentKey, int> assignments;
  std::map<NodeIndex, int> servers;  // active servers per candidate node

  friend bool operator==(const Placement&, const Placement&) = default;
};

/// Primary plus backup load hosted at each candidate node.
inline std::vector<int> node_loads(const Placement& p, std::size_t node_count) {
  std::vector<int> load(node_count, 0);
  for (const auto& [k, n] : p.assignments) {
    if (k.primary.value < node_count) load[k.primary.value] += n;
    if (k.backup.value < node_count) load[k.backup.value] += n;
  }
  return load;
}

inline int servers_at(const Placement& p, NodeIndex n) {
  auto it = p.servers.find(n);
  return it == p.servers.end() ? 0 : it->second;
}

struct DeviceEnergy {
  std::string id;
  std::string kind;
  double idle_j = 0.0;
  double proportional_j = 0.0;
  double total() const { return idle_j + proportional_j; }
};

struct EnergyReport {
  std::vector<DeviceEnergy> devices;
  double network_total = 0.0;
  double processing_total = 0.0;
  double grand_total = 0.0;
};

/// Parameters of the accounting that are not part of the topology.
struct EnergyInputs {
  SignalSpec signal;
  ServerSpec server;
  DevicePowerProfile node_switch{3.52, 0.57, 16e9, false, 1.0};
  double window = 240.0;  // s
  bool duplicate_results = false;
};

/// Splits `load` over `servers` as evenly as possible, largest shares first.
inline std::vector<int> balanced_loads(int load, int servers) {
  std::vector<int> out(servers, servers > 0 ? load / servers : 0);
  for (int i = 0; i < (servers > 0 ? load % servers : 0); ++i) ++out[i];
  return out;
}

class EnergyModel {
 public:
  EnergyModel(std::shared_ptr<const Network> net, int servers_per_node, EnergyInputs inputs)
      : net_(std::move(net)), nodes_(net_->candidate_nodes(servers_per_node)), in_(std::move(inputs)) {
    for (auto& v : validate(in_.node_switch, "node switch")) throw InputError(v);
    for (auto& v : validate(in_.server.power, "processing server")) throw InputError(v);

    const auto& devs = net_->devices();
    epb_.resize(devs.size(), std::numeric_limits<double>::quiet_NaN());
    idle_.resize(devs.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < devs.size(); ++i) {
      if (devs[i].power) {
        epb_[i] = energy_per_bit(*devs[i].power);
        idle_[i] = device_idle_energy(*devs[i].power, true, in_.window);
      }
    }
    bs_ordinal_.assign(devs.size(), -1);
    const auto& bss = net_->base_stations();
    for (std::size_t b = 0; b < bss.size(); ++b) bs_ordinal_[bss[b].value] = static_cast<int>(b);

    access_.resize(bss.size() * nodes_.size());
    for (std::size_t b = 0; b < bss.size(); ++b)
      for (std::size_t n = 0; n < nodes_.size(); ++n)
        access_[b * nodes_.size() + n] = net_->route(bss[b], nodes_[n].device).devices;
    storage_.resize(nodes_.size());
    for (std::size_t n = 0; n < nodes_.size(); ++n)
      storage_[n] = net_->route(nodes_[n].device, net_->cloud()).devices;
  }

  const Network& network() const { return *net_; }
  std::shared_ptr<const Network> network_ptr() const { return net_; }
  const std::vector<CandidateNode>& nodes() const { return nodes_; }
  const EnergyInputs& inputs() const { return in_; }
  int servers_per_node() const { return nodes_.empty() ? 0 : nodes_.front().max_servers; }

  int bs_ordinal(DeviceIndex bs) const {
    int o = bs.value < bs_ordinal_.size() ? bs_ordinal_[bs.value] : -1;
    if (o < 0) throw InputError("device '" + describe(bs) + "' is not a base station");
    return o;
  }

  /// Devices on the path between a base station and a candidate node (either direction).
  const std::vector<DeviceIndex>& access_devices(DeviceIndex bs, NodeIndex n) const {
    return access_.at(static_cast<std::size_t>(bs_ordinal(bs)) * nodes_.size() + n.value);
  }
  /// Devices on the path from a candidate node to the cloud sink.
  const std::vector<DeviceIndex>& storage_devices(NodeIndex n) const { return storage_.at(n.value); }

  double device_energy_per_bit(DeviceIndex d) const {
    double e = epb_.at(d.value);
    if (std::isnan(e)) throw InputError("flow crosses device '" + describe(d) + "' which has no power profile");
    return e;
  }
  double device_idle(DeviceIndex d) const {
    double e = idle_.at(d.value);
    if (std::isnan(e)) throw InputError("flow crosses device '" + describe(d) + "' which has no power profile");
    return e;
  }
  double switch_energy_per_bit() const { return energy_per_bit(in_.node_switch); }
  double switch_idle() const { return device_idle_energy(in_.node_switch, true, in_.window); }
  double server_idle() const { return device_idle_energy(in_.server.power, true, in_.window); }

  /// Proportional network energy of one patient's recording sent from `bs` to node `n`.
  double upload_unit(DeviceIndex bs, NodeIndex n) const {
    return in_.signal.ecg_bits * (path_epb(access_devices(bs, n)) + switch_energy_per_bit());
  }
  /// One result sent from node `n` back to the clinic behind `bs`.
  double feedback_unit(DeviceIndex bs, NodeIndex n) const {
    return in_.signal.result_bits * (path_epb(access_devices(bs, n)) + switch_energy_per_bit());
  }
  /// One result sent from node `n` to the cloud.
  double storage_unit(NodeIndex n) const {
    return in_.signal.result_bits * (path_epb(storage_devices(n)) + switch_energy_per_bit());
  }

  /// Energy of one server handling `patients` recordings, idle included.
  double server_energy(int patients) const {
    const auto& p = in_.server.power;
    const double util = static_cast<double>(patients) / in_.server.pat_cap;
    return server_idle() + (p.max_power - p.idle_power) * util * processing_time(in_.server, patients);
  }

  double node_processing_energy(int load, int servers) const {
    if (load > servers * in_.server.pat_cap)
      throw InfeasibleError(Infeasibility::capacity, std::to_string(load) + " patients exceed " +
                                                         std::to_string(servers) + " servers");
    double e = 0.0;
    for (int l : balanced_loads(load, servers)) e += server_energy(l);
    return e;
  }

  EnergyReport network_energy(const Placement& p) const {
    const auto& devs = net_->devices();
    std::vector<double> bits(devs.size(), 0.0);
    std::vector<char> active(devs.size(), 0);
    std::vector<double> switch_bits(nodes_.size(), 0.0);
    std::vector<char> switch_active(nodes_.size(), 0);

    auto carry = [&](const std::vector<DeviceIndex>& path, NodeIndex node, double b) {
      for (auto d : path) {
        bits[d.value] += b;
        active[d.value] = 1;
      }
      switch_bits[node.value] += b;
      switch_active[node.value] = 1;
    };

    const double pi = in_.signal.ecg_bits, alpha = in_.signal.result_bits;
    for (const auto& [k, count] : p.assignments) {
      if (count <= 0) continue;
      check_node(k.primary);
      check_node(k.backup);
      const double n = count;
      const auto& to_primary = access_devices(k.bs, k.primary);
      const auto& to_backup = access_devices(k.bs, k.backup);
      carry(to_primary, k.primary, n * pi);
      carry(to_backup, k.backup, n * pi);
      carry(to_primary, k.primary, n * alpha);
      carry(storage_devices(k.primary), k.primary, n * alpha);
      if (in_.duplicate_results) {
        carry(to_backup, k.backup, n * alpha);
        carry(storage_devices(k.backup), k.backup, n * alpha);
      }
    }
    for (const auto& [node, count] : p.servers) {
      if (count <= 0) continue;
      check_node(node);
      switch_active[node.value] = 1;
      active[nodes_[node.value].device.value] = 1;
    }

    EnergyReport r;
    for (std::size_t i = 0; i < devs.size(); ++i) {
      if (!active[i]) continue;
      DeviceIndex d{static_cast<std::uint32_t>(i)};
      DeviceEnergy e{devs[i].id, to_string(devs[i].kind), device_idle(d), device_energy_per_bit(d) * bits[i]};
      r.network_total += e.total();
      r.devices.push_back(std::move(e));
    }
    const double sw_epb = switch_energy_per_bit();
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
      if (!switch_active[n]) continue;
      DeviceEnergy e{"sw@" + nodes_[n].id, "switch", switch_idle(), sw_epb * switch_bits[n]};
      r.network_total += e.total();
      r.devices.push_back(std::move(e));
    }
    r.grand_total = r.network_total;
    return r;
  }

  /// Server entries and processing total; node load is spread evenly over its servers.
  EnergyReport processing_energy(const Placement& p) const {
    EnergyReport r;
    const auto load = node_loads(p, nodes_.size());
    const auto& sp = in_.server.power;
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
      const int s = servers_at(p, NodeIndex{static_cast<std::uint32_t>(n)});
      if (s < 0) throw InputError("negative server count at node '" + nodes_[n].id + "'");
      if (load[n] > s * in_.server.pat_cap)
        throw InfeasibleError(Infeasibility::capacity, "node '" + nodes_[n].id + "' hosts " +
                                                           std::to_string(load[n]) + " patients on " +
                                                           std::to_string(s) + " servers");
      const auto loads = balanced_loads(load[n], s);
      for (int i = 0; i < s; ++i) {
        const int l = loads[i];
        DeviceEnergy e{"srv@" + nodes_[n].id + "#" + std::to_string(i), "server", server_idle(),
                       (sp.max_power - sp.idle_power) * (static_cast<double>(l) / in_.server.pat_cap) *
                           processing_time(in_.server, l)};
        r.processing_total += e.total();
        r.devices.push_back(std::move(e));
      }
    }
    r.grand_total = r.processing_total;
    return r;
  }

  EnergyReport evaluate(const Placement& p) const {
    EnergyReport r = network_energy(p);
    EnergyReport proc = processing_energy(p);
    r.processing_total = proc.processing_total;
    for (auto& e : proc.devices) r.devices.push_back(std::move(e));
    r.grand_total = r.network_total + r.processing_total;
    return r;
  }

 private:
  double path_epb(const std::vector<DeviceIndex>& path) const {
    double e = 0.0;
    for (auto d : path) e += device_energy_per_bit(d);
    return e;
  }

  void check_node(NodeIndex n) const {
    if (n.value >= nodes_.size()) throw InputError("node index " + std::to_string(n.value) + " out of range");
  }

  std::string describe(DeviceIndex d) const {
    return d.value < net_->devices().size() ? net_->device(d).id : "#" + std::to_string(d.value);
  }

  std::shared_ptr<const Network> net_;
  std::vector<CandidateNode> nodes_;
  EnergyInputs in_;
  std::vector<double> epb_, idle_;
  std::vector<int> bs_ordinal_;
  std::vector<std::vector<DeviceIndex>> access_, storage_;
};

}  // namespace fogplace
