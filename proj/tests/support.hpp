#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "fogplace/fogplace.hpp"

namespace fogplace::testing {

inline std::string source_path(const std::string& rel) { return std::string(FOGPLACE_SOURCE_DIR) + "/" + rel; }

inline ScenarioConfig case_study() { return load_config(source_path("configs/case_study.yaml")); }

inline DevicePowerProfile shared_profile(double max, double idle, double cap) { return {max, idle, cap, true, 0.003}; }

/// `bs_per_cluster[k]` base stations under the OLT of cluster k; clinics are
/// given as lists of base-station ordinals (0-based, cluster-major).
inline Topology tree(const std::vector<int>& bs_per_cluster, const std::vector<std::vector<int>>& clinic_bs,
                     const std::vector<int>& patients = {}) {
  Topology t;
  t.clusters = static_cast<int>(bs_per_cluster.size());
  t.metro_power = shared_profile(1100, 660, 40e9);
  t.cloud_power = DevicePowerProfile{0, 0, 40e9, true, 0.003};
  int b = 0;
  for (int k = 0; k < t.clusters; ++k) {
    t.olts.push_back({"olt" + std::to_string(k), k, shared_profile(1940, 60, 20e9)});
    for (int i = 0; i < bs_per_cluster[k]; ++i, ++b) {
      t.onts.push_back({"ont" + std::to_string(b), "olt" + std::to_string(k), 1.25e9, shared_profile(15, 8, 1.25e9)});
      t.base_stations.push_back({"bs" + std::to_string(b), "ont" + std::to_string(b), 0.3e9,
                                 shared_profile(528, 333, 0.3e9)});
    }
  }
  for (std::size_t c = 0; c < clinic_bs.size(); ++c) {
    Clinic cl{"c" + std::to_string(c), c < patients.size() ? patients[c] : 1, {}};
    for (int i : clinic_bs[c]) cl.candidate_bs.push_back("bs" + std::to_string(i));
    t.clinics.push_back(std::move(cl));
  }
  return t;
}

inline PlacementProblem problem_on(Topology t, std::vector<int> demand, int N, bool geo, int pat_cap = 60) {
  PlacementProblem pb;
  pb.network = std::make_shared<const Network>(std::move(t));
  pb.demand = std::move(demand);
  pb.servers_per_node = N;
  pb.geo_constraint = geo;
  pb.server.pat_cap = pat_cap;
  pb.server.power.capacity = pat_cap;
  return pb;
}

/// Random instance inside the enumeration bounds: <= 3 clinics, <= 4 nodes, <= 6 patients.
inline PlacementProblem random_small_problem(std::mt19937_64& rng) {
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto real = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto profile = [&](double cap) {
    const double idle = real(0.0, 400.0);
    return DevicePowerProfile{idle + real(0.0, 600.0), idle, cap * real(0.5, 2.0), uni(0, 3) > 0, real(0.001, 1.0)};
  };

  const int clusters = uni(1, 2);
  // Nodes = OLTs + ONTs (one ONT per base station) stay <= 4.
  std::vector<int> per;
  if (clusters == 1) {
    per = {uni(1, 3)};
  } else {
    per = {uni(1, 2), 0};
    per[1] = uni(0, 2 - per[0]);
  }
  const int bs_total = per[0] + (clusters == 2 ? per[1] : 0);
  Topology t = tree(per, {});
  for (auto& o : t.olts) o.power = profile(20e9);
  for (auto& o : t.onts) o.power = profile(1.25e9);
  for (auto& b : t.base_stations) b.power = profile(0.3e9);
  t.metro_power = profile(40e9);
  t.cloud_power = profile(40e9);

  const int clinics = uni(1, 3);
  std::vector<int> demand(clinics, 0);
  const int total = uni(0, 6);
  for (int i = 0; i < total; ++i) ++demand[uni(0, clinics - 1)];
  for (int c = 0; c < clinics; ++c) {
    std::vector<int> all(bs_total);
    for (int i = 0; i < bs_total; ++i) all[i] = i;
    std::shuffle(all.begin(), all.end(), rng);
    const int m = uni(1, std::min(2, bs_total));
    Clinic cl{"c" + std::to_string(c), demand[c], {}};
    for (int i = 0; i < m; ++i) cl.candidate_bs.push_back("bs" + std::to_string(all[i]));
    t.clinics.push_back(std::move(cl));
  }

  PlacementProblem pb = problem_on(std::move(t), demand, uni(1, 3), uni(0, 1) == 1, uni(1, 3));
  pb.duplicate_results = uni(0, 3) == 0;
  const double sidle = real(0.0, 100.0);
  pb.server.power = {sidle + real(0.0, 150.0), sidle, static_cast<double>(pb.server.pat_cap), false, 1.0};
  const double widle = real(0.0, 5.0);
  pb.node_switch = {widle + real(0.0, 5.0), widle, 16e9, false, 1.0};
  return pb;
}

}  // namespace fogplace::testing
