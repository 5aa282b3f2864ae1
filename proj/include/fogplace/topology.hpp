#pragma once

// Four-layer access network: LTE base stations hang off one ONT each, ONTs
// hang off the OLT of their cluster, OLTs meet at a metro aggregation point,
// and every OLT has its own uplink to the cloud storage sink.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fogplace/error.hpp"
#include "fogplace/power.hpp"

namespace fogplace {

inline constexpr std::string_view kMetroId = "metro";
inline constexpr std::string_view kCloudId = "cloud";

struct Clinic {
  std::string id;
  int patient_count = 0;
  std::vector<std::string> candidate_bs;
};

struct BaseStation {
  std::string id;
  std::string ont_id;
  double capacity = 0.3e9;  // bit/s, also the BS-ONT backhaul
  std::optional<DevicePowerProfile> power;
};

struct Ont {
  std::string id;
  std::string olt_id;
  double uplink_capacity = 1.25e9;  // GPON upstream towards the OLT
  std::optional<DevicePowerProfile> power;
};

struct Olt {
  std::string id;
  int cluster = 0;
  std::optional<DevicePowerProfile> power;
};

/// Plain description of the access network as read from configuration.
struct Topology {
  std::vector<Clinic> clinics;
  std::vector<BaseStation> base_stations;
  std::vector<Ont> onts;
  std::vector<Olt> olts;
  int clusters = 1;
  double cloud_uplink_capacity = 40e9;
  double metro_link_capacity = 40e9;
  std::optional<DevicePowerProfile> metro_power;
  std::optional<DevicePowerProfile> cloud_power;
};

/// Returns one entry per broken invariant; empty means the topology is usable.
inline std::vector<std::string> validate(const Topology& t) {
  std::vector<std::string> out;
  if (t.clusters < 1) out.push_back("clusters must be a positive integer");
  if (!(t.cloud_uplink_capacity > 0.0)) out.push_back("cloud uplink capacity must be > 0");
  if (!(t.metro_link_capacity > 0.0)) out.push_back("metro link capacity must be > 0");

  std::set<std::string> device_ids{std::string(kMetroId), std::string(kCloudId)};
  auto claim = [&](const std::string& id, const char* what) {
    if (id.empty()) {
      out.push_back(std::string(what) + " with empty id");
    } else if (!device_ids.insert(id).second) {
      out.push_back(std::string(what) + " '" + id + "': duplicate or reserved device id");
    }
  };
  auto check_power = [&](const std::optional<DevicePowerProfile>& p, const std::string& who) {
    if (p) {
      for (auto& v : validate(*p, who)) out.push_back(std::move(v));
    }
  };

  std::map<std::string, int> olt_cluster;
  std::vector<int> olts_per_cluster(std::max(t.clusters, 0), 0);
  for (const auto& olt : t.olts) {
    claim(olt.id, "OLT");
    if (olt.cluster < 0 || olt.cluster >= t.clusters) {
      out.push_back("OLT '" + olt.id + "': cluster " + std::to_string(olt.cluster) + " out of range");
    } else {
      ++olts_per_cluster[olt.cluster];
    }
    olt_cluster[olt.id] = olt.cluster;
    check_power(olt.power, "OLT '" + olt.id + "'");
  }
  for (int k = 0; k < static_cast<int>(olts_per_cluster.size()); ++k) {
    if (olts_per_cluster[k] != 1)
      out.push_back("cluster " + std::to_string(k) + " has " + std::to_string(olts_per_cluster[k]) +
                    " OLTs, expected exactly 1");
  }

  std::map<std::string, int> ont_cluster;
  for (const auto& ont : t.onts) {
    claim(ont.id, "ONT");
    if (!(ont.uplink_capacity > 0.0)) out.push_back("ONT '" + ont.id + "': uplink capacity must be > 0");
    auto it = olt_cluster.find(ont.olt_id);
    if (it == olt_cluster.end()) {
      out.push_back("ONT '" + ont.id + "': unknown OLT '" + ont.olt_id + "'");
      ont_cluster[ont.id] = -1;
    } else {
      ont_cluster[ont.id] = it->second;
    }
    check_power(ont.power, "ONT '" + ont.id + "'");
  }

  std::map<std::string, int> bs_cluster;
  std::map<std::string, int> ont_users;
  for (const auto& bs : t.base_stations) {
    claim(bs.id, "base station");
    if (!(bs.capacity > 0.0)) out.push_back("base station '" + bs.id + "': capacity must be > 0");
    auto it = ont_cluster.find(bs.ont_id);
    if (it == ont_cluster.end()) {
      out.push_back("base station '" + bs.id + "': unknown ONT '" + bs.ont_id + "'");
      bs_cluster[bs.id] = -1;
    } else {
      bs_cluster[bs.id] = it->second;
      ++ont_users[bs.ont_id];
    }
    check_power(bs.power, "base station '" + bs.id + "'");
  }
  for (const auto& ont : t.onts) {
    const int users = ont_users[ont.id];
    if (users != 1)
      out.push_back("ONT '" + ont.id + "': serves " + std::to_string(users) +
                    " base stations, expected exactly 1");
  }

  std::set<std::string> clinic_ids;
  for (const auto& c : t.clinics) {
    const std::string who = "clinic '" + c.id + "'";
    if (c.id.empty() || !clinic_ids.insert(c.id).second) out.push_back(who + ": empty or duplicate id");
    if (c.patient_count < 0) out.push_back(who + ": negative patient count");
    if (c.candidate_bs.empty()) out.push_back(who + ": no candidate base station");
    if (c.candidate_bs.size() > 3) out.push_back(who + ": more than 3 candidate base stations");
    std::set<std::string> seen;
    std::map<int, int> per_cluster;
    for (const auto& b : c.candidate_bs) {
      if (!seen.insert(b).second) out.push_back(who + ": base station '" + b + "' listed twice");
      auto it = bs_cluster.find(b);
      if (it == bs_cluster.end()) {
        out.push_back(who + ": unknown base station '" + b + "'");
      } else if (it->second >= 0) {
        ++per_cluster[it->second];
      }
    }
    for (auto [k, n] : per_cluster) {
      if (n > 2)
        out.push_back(who + ": " + std::to_string(n) + " base stations in cluster " + std::to_string(k) +
                      " (at most 2 per cluster)");
    }
  }

  check_power(t.metro_power, "metro");
  check_power(t.cloud_power, "cloud");
  return out;
}

enum class DeviceKind { base_station, ont, olt, metro, cloud };

inline const char* to_string(DeviceKind k) {
  switch (k) {
    case DeviceKind::base_station: return "lte_bs";
    case DeviceKind::ont: return "ont";
    case DeviceKind::olt: return "olt";
    case DeviceKind::metro: return "metro";
    case DeviceKind::cloud: return "cloud";
  }
  return "unknown";
}

/// Dense index into one of the network's tables, typed by what it indexes.
template <class Tag>
struct Index {
  std::uint32_t value = 0;
  friend auto operator<=>(const Index&, const Index&) = default;
};

using DeviceIndex = Index<struct DeviceTag>;
using ClinicIndex = Index<struct ClinicTag>;
using NodeIndex = Index<struct NodeTag>;  // position in candidate_nodes()

/// Hop sequence between two devices. link_capacity[i] belongs to the link
/// joining devices[i] and devices[i + 1].
struct Path {
  std::vector<DeviceIndex> devices;
  std::vector<double> link_capacity;

  bool empty() const { return devices.empty(); }
  double bottleneck() const {
    return link_capacity.empty() ? 0.0 : *std::min_element(link_capacity.begin(), link_capacity.end());
  }
  Path reversed() const {
    Path r{{devices.rbegin(), devices.rend()}, {link_capacity.rbegin(), link_capacity.rend()}};
    return r;
  }
  friend bool operator==(const Path&, const Path&) = default;
};

enum class NodeKind { ont, olt };

struct CandidateNode {
  std::string id;
  NodeKind kind = NodeKind::olt;
  int cluster_id = 0;
  int max_servers = 1;
  DeviceIndex device;
};

struct Device {
  std::string id;
  DeviceKind kind = DeviceKind::metro;
  int cluster = -1;  // -1 for metro and cloud
  std::optional<DeviceIndex> parent;
  double parent_link_capacity = 0.0;
  std::optional<DevicePowerProfile> power;
};

struct ClinicSite {
  std::string id;
  int patient_count = 0;
  std::vector<DeviceIndex> candidate_bs;
};

/// Indexed, validated view of a Topology with tree routing. Immutable.
class Network {
 public:
  explicit Network(Topology topology) : topology_(std::move(topology)) {
    auto violations = validate(topology_);
    if (!violations.empty()) throw InputError("invalid topology", std::move(violations));
    build();
  }

  const Topology& topology() const { return topology_; }
  const std::vector<Device>& devices() const { return devices_; }
  const Device& device(DeviceIndex i) const { return devices_.at(i.value); }
  const std::vector<ClinicSite>& clinics() const { return clinics_; }
  const std::vector<DeviceIndex>& base_stations() const { return base_stations_; }
  const std::vector<DeviceIndex>& onts() const { return onts_; }
  const std::vector<DeviceIndex>& olts() const { return olts_; }
  DeviceIndex metro() const { return metro_; }
  DeviceIndex cloud() const { return cloud_; }
  int clusters() const { return topology_.clusters; }

  std::optional<DeviceIndex> find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
  }

  DeviceIndex at(std::string_view id) const {
    auto d = find(id);
    if (!d) throw InputError("unknown device id '" + std::string(id) + "'");
    return *d;
  }

  /// ONT a base station is attached to.
  DeviceIndex ont_of(DeviceIndex bs) const { return *device(bs).parent; }
  /// OLT heading the cluster of any clustered device.
  DeviceIndex olt_of_cluster(int cluster) const { return olts_by_cluster_.at(cluster); }

  Path route(DeviceIndex from, DeviceIndex to) const {
    if (from == to) return {};
    if (to == cloud_) return route_to_cloud(from);
    if (from == cloud_) return route_to_cloud(to).reversed();

    auto up_from = ancestors(from);
    auto up_to = ancestors(to);
    // Trim the common suffix down to the lowest common ancestor.
    std::size_t a = up_from.size(), b = up_to.size();
    while (a > 0 && b > 0 && up_from[a - 1] == up_to[b - 1]) {
      --a;
      --b;
    }
    Path p;
    for (std::size_t i = 0; i <= a; ++i) p.devices.push_back(up_from[i]);
    for (std::size_t i = 0; i < a; ++i) p.link_capacity.push_back(device(up_from[i]).parent_link_capacity);
    for (std::size_t i = b; i-- > 0;) {
      p.devices.push_back(up_to[i]);
      p.link_capacity.push_back(device(up_to[i]).parent_link_capacity);
    }
    return p;
  }

  Path route(std::string_view from, std::string_view to) const { return route(at(from), at(to)); }

  std::vector<CandidateNode> candidate_nodes(int max_servers) const {
    std::vector<CandidateNode> out;
    out.reserve(olts_.size() + onts_.size());
    for (auto olt : olts_) out.push_back({device(olt).id, NodeKind::olt, device(olt).cluster, max_servers, olt});
    for (auto ont : onts_) out.push_back({device(ont).id, NodeKind::ont, device(ont).cluster, max_servers, ont});
    return out;
  }

 private:
  DeviceIndex add(Device d) {
    DeviceIndex idx{static_cast<std::uint32_t>(devices_.size())};
    by_id_.emplace(d.id, idx);
    devices_.push_back(std::move(d));
    return idx;
  }

  void build() {
    metro_ = add({std::string(kMetroId), DeviceKind::metro, -1, std::nullopt, 0.0, topology_.metro_power});
    cloud_ = add({std::string(kCloudId), DeviceKind::cloud, -1, std::nullopt, 0.0, topology_.cloud_power});

    std::vector<const Olt*> olts_sorted;
    for (const auto& o : topology_.olts) olts_sorted.push_back(&o);
    std::sort(olts_sorted.begin(), olts_sorted.end(),
              [](const Olt* x, const Olt* y) { return x->cluster < y->cluster; });
    olts_by_cluster_.assign(topology_.clusters, DeviceIndex{});
    for (const Olt* o : olts_sorted) {
      auto idx = add({o->id, DeviceKind::olt, o->cluster, metro_, topology_.metro_link_capacity, o->power});
      olts_.push_back(idx);
      olts_by_cluster_[o->cluster] = idx;
    }

    // ONTs follow base-station order so candidate ordering is stable.
    std::map<std::string, const Ont*> ont_by_id;
    for (const auto& o : topology_.onts) ont_by_id[o.id] = &o;
    std::vector<DeviceIndex> ont_for_bs;
    for (const auto& bs : topology_.base_stations) {
      const Ont* o = ont_by_id.at(bs.ont_id);
      auto olt = at(o->olt_id);
      auto idx = add({o->id, DeviceKind::ont, device(olt).cluster, olt, o->uplink_capacity, o->power});
      onts_.push_back(idx);
      ont_for_bs.push_back(idx);
    }
    for (std::size_t i = 0; i < topology_.base_stations.size(); ++i) {
      const auto& bs = topology_.base_stations[i];
      auto ont = ont_for_bs[i];
      base_stations_.push_back(
          add({bs.id, DeviceKind::base_station, device(ont).cluster, ont, bs.capacity, bs.power}));
    }

    for (const auto& c : topology_.clinics) {
      ClinicSite site{c.id, c.patient_count, {}};
      for (const auto& b : c.candidate_bs) site.candidate_bs.push_back(at(b));
      clinics_.push_back(std::move(site));
    }
  }

  std::vector<DeviceIndex> ancestors(DeviceIndex d) const {
    std::vector<DeviceIndex> chain{d};
    while (auto p = device(chain.back()).parent) chain.push_back(*p);
    return chain;
  }

  Path route_to_cloud(DeviceIndex from) const {
    const Device& d = device(from);
    if (d.cluster < 0)
      throw InputError("no unique route from '" + d.id + "' to the cloud sink");
    Path p = route(from, olt_of_cluster(d.cluster));
    if (p.empty()) p.devices.push_back(from);
    p.devices.push_back(cloud_);
    p.link_capacity.push_back(topology_.cloud_uplink_capacity);
    return p;
  }

  Topology topology_;
  std::vector<Device> devices_;
  std::unordered_map<std::string, DeviceIndex> by_id_;
  std::vector<ClinicSite> clinics_;
  std::vector<DeviceIndex> base_stations_, onts_, olts_, olts_by_cluster_;
  DeviceIndex metro_{}, cloud_{};
};

inline Path route(const Network& net, std::string_view from, std::string_view to) {
  return net.route(from, to);
}

inline std::vector<CandidateNode> candidate_nodes(const Network& net, int max_servers) {
  return net.candidate_nodes(max_servers);
}

}  // namespace fogplace
