#pragma once

// Minimum-energy placement of primary and backup processing servers.
//
// The integer model works on aggregated flows rather than one column per
// (clinic, bs, primary, backup) tuple:
//
//   w[c][b]  patients of clinic c entering through base station b
//   p[b][n]  patients entering at b whose primary server sits at node n
//   q[b][n]  same for the backup server
//   s[n]     servers at node n,  y[n] node switch on,  z[d] shared device on
//   t[n]     sum of squared per-server loads at n (processing is convex in load)
//
// Per-patient energy is separable in (b, primary) and (b, backup), so the
// aggregation loses nothing. The geographic constraint needs primary and
// backup lists at each base station to be pairable without a shared node;
// that holds exactly when p[b][n] + q[b][n] <= W[b] for every node (Hall's
// condition on a complete bipartite graph minus its matching diagonal).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fogplace/energy.hpp"
#include "fogplace/error.hpp"
#include "fogplace/lp.hpp"
#include "fogplace/milp.hpp"
#include "fogplace/timing.hpp"
#include "fogplace/topology.hpp"

namespace fogplace {

struct PlacementProblem {
  std::shared_ptr<const Network> network;
  SignalSpec signal;
  ServerSpec server;
  TimingConstants timing;
  DevicePowerProfile node_switch{3.52, 0.57, 16e9, false, 1.0};
  std::vector<int> demand;  // patients per clinic, clinic order
  int servers_per_node = 2;
  bool geo_constraint = false;
  bool duplicate_results = false;

  int total_demand() const {
    int d = 0;
    for (int v : demand) d += v;
    return d;
  }
};

inline EnergyModel make_energy_model(const PlacementProblem& pb) {
  EnergyInputs in{pb.signal, pb.server, pb.node_switch, pb.timing.budget, pb.duplicate_results};
  return EnergyModel(pb.network, pb.servers_per_node, std::move(in));
}

enum class Optimality { proven_optimal, bound_gap };

struct Solution {
  Placement placement;
  EnergyReport energy;
  double objective = 0.0;
  Optimality optimality = Optimality::proven_optimal;
  double bound_gap = 0.0;
  long nodes_explored = 0;
  RatePlan plan;
};

/// Candidate nodes hosting at least one server, in candidate order.
inline std::vector<NodeIndex> active_nodes(const Placement& p) {
  std::vector<NodeIndex> out;
  for (const auto& [n, s] : p.servers)
    if (s > 0) out.push_back(n);
  return out;
}

inline int total_servers(const Placement& p) {
  int s = 0;
  for (const auto& [n, c] : p.servers) s += std::max(c, 0);
  return s;
}

/// Every broken placement invariant, one entry each.
inline std::vector<std::string> verify(const Placement& pl, const PlacementProblem& pb) {
  std::vector<std::string> out;
  const Network& net = *pb.network;
  const auto nodes = net.candidate_nodes(pb.servers_per_node);
  const auto& clinics = net.clinics();
  auto node_name = [&](NodeIndex n) {
    return n.value < nodes.size() ? nodes[n.value].id : "#" + std::to_string(n.value);
  };
  auto dev_name = [&](DeviceIndex d) {
    return d.value < net.devices().size() ? net.device(d).id : "#" + std::to_string(d.value);
  };

  std::vector<long> served(clinics.size(), 0);
  std::vector<long> load(nodes.size(), 0);
  for (const auto& [k, count] : pl.assignments) {
    if (count == 0) continue;
    if (k.clinic.value >= clinics.size()) {
      out.push_back("assignment references unknown clinic #" + std::to_string(k.clinic.value));
      continue;
    }
    const auto& c = clinics[k.clinic.value];
    const std::string who = "clinic '" + c.id + "' via '" + dev_name(k.bs) + "'";
    if (count < 0) {
      out.push_back(who + ": negative patient count");
      continue;
    }
    served[k.clinic.value] += count;
    if (std::find(c.candidate_bs.begin(), c.candidate_bs.end(), k.bs) == c.candidate_bs.end())
      out.push_back(who + ": base station is not a candidate of the clinic");
    bool nodes_ok = true;
    for (auto n : {k.primary, k.backup}) {
      if (n.value >= nodes.size()) {
        out.push_back(who + ": unknown candidate node #" + std::to_string(n.value));
        nodes_ok = false;
      }
    }
    if (!nodes_ok) continue;
    load[k.primary.value] += count;
    load[k.backup.value] += count;
    if (pb.geo_constraint && k.primary == k.backup)
      out.push_back(who + ": primary and backup share node '" + node_name(k.primary) + "'");
  }
  for (std::size_t c = 0; c < clinics.size(); ++c) {
    const long want = c < pb.demand.size() ? pb.demand[c] : 0;
    if (served[c] != want)
      out.push_back("clinic '" + clinics[c].id + "': " + std::to_string(served[c]) + " of " +
                    std::to_string(want) + " patients assigned");
  }
  for (const auto& [n, s] : pl.servers) {
    if (n.value >= nodes.size()) {
      out.push_back("servers at unknown candidate node #" + std::to_string(n.value));
    } else if (s < 0) {
      out.push_back("node '" + node_name(n) + "': negative server count");
    } else if (s > pb.servers_per_node) {
      out.push_back("node '" + node_name(n) + "': " + std::to_string(s) + " servers exceed the cap of " +
                    std::to_string(pb.servers_per_node));
    }
  }
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    const NodeIndex ni{static_cast<std::uint32_t>(n)};
    const long cap = static_cast<long>(servers_at(pl, ni)) * pb.server.pat_cap;
    if (load[n] > cap)
      out.push_back("node '" + nodes[n].id + "': primary+backup load " + std::to_string(load[n]) +
                    " exceeds server capacity " + std::to_string(cap));
  }
  return out;
}

/// Integer model of a placement problem plus the column maps needed to decode it.
struct Formulation {
  milp::Model model;
  RatePlan plan;
  std::vector<std::vector<int>> w;     // [clinic][candidate slot] -> column, -1 if absent
  std::vector<std::vector<int>> p, q;  // [bs ordinal][node] -> column, -1 if absent
  std::vector<int> servers, switch_on, load_sq;
  std::vector<int> device_on;          // [device] -> column, -1 if the device costs nothing idle
  std::vector<lp::Row> geo_rows;       // pairing rows, added lazily when violated
  std::vector<std::vector<int>> cut_levels;  // processing cuts already in the model, per node
  int rows = 0;
  int columns() const { return model.lp.cols(); }
};

namespace detail {

inline lp::Row processing_cut(const Formulation& f, std::size_t n, int j) {
  // t_n >= (2j+1) L_n - j(j+1) s_n, exact for the balanced split at integer points.
  lp::Row r;
  r.sense = lp::Sense::less_equal;
  r.rhs = 0.0;
  const double slope = 2.0 * j + 1.0;
  for (std::size_t b = 0; b < f.p.size(); ++b) {
    if (f.p[b][n] >= 0) r.terms.push_back({f.p[b][n], slope});
    if (f.q[b][n] >= 0) r.terms.push_back({f.q[b][n], slope});
  }
  r.terms.push_back({f.servers[n], -static_cast<double>(j) * (j + 1)});
  r.terms.push_back({f.load_sq[n], -1.0});
  return r;
}

}  // namespace detail

inline Formulation formulate(const PlacementProblem& pb) {
  if (!pb.network) throw InputError("placement problem has no network");
  const Network& net = *pb.network;
  if (pb.servers_per_node < 1) throw InputError("servers per node must be >= 1");
  if (pb.demand.size() != net.clinics().size())
    throw InputError("demand lists " + std::to_string(pb.demand.size()) + " clinics, topology has " +
                     std::to_string(net.clinics().size()));
  for (std::size_t c = 0; c < pb.demand.size(); ++c)
    if (pb.demand[c] < 0) throw InputError("clinic '" + net.clinics()[c].id + "': negative demand");

  Formulation f;
  f.plan = make_rate_plan(net, pb.signal, pb.server, pb.timing, pb.servers_per_node);

  const EnergyModel em = make_energy_model(pb);
  const auto& nodes = em.nodes();
  const std::size_t K = nodes.size();
  const int N = pb.servers_per_node, Pat = pb.server.pat_cap;
  const long D = pb.total_demand();
  if (2 * D > static_cast<long>(K) * N * Pat)
    throw InfeasibleError(Infeasibility::capacity,
                          std::to_string(D) + " patients need " + std::to_string(2 * D) +
                              " server slots, candidate nodes offer " + std::to_string(K * N * Pat));

  const auto& bss = net.base_stations();
  const auto& clinics = net.clinics();
  auto& m = f.model;

  // Shared-device activation columns.
  f.device_on.assign(net.devices().size(), -1);
  auto device_col = [&](DeviceIndex d) -> int {
    if (f.device_on[d.value] >= 0) return f.device_on[d.value];
    const double idle = em.device_idle(d);
    if (idle <= 0.0) return -1;
    f.device_on[d.value] = m.add_col(idle, 0.0, 1.0, true, 2);
    return f.device_on[d.value];
  };

  std::vector<long> reach(bss.size(), 0);  // most patients a base station can see
  f.w.resize(clinics.size());
  for (std::size_t c = 0; c < clinics.size(); ++c) {
    f.w[c].assign(clinics[c].candidate_bs.size(), -1);
    if (pb.demand[c] == 0) continue;
    for (std::size_t i = 0; i < clinics[c].candidate_bs.size(); ++i) {
      f.w[c][i] = m.add_col(0.0, 0.0, pb.demand[c], true);
      reach[em.bs_ordinal(clinics[c].candidate_bs[i])] += pb.demand[c];
    }
  }

  const auto& sp = pb.server.power;
  const double per_patient_proc = (sp.max_power - sp.idle_power) / Pat * pb.server.proc_intercept;
  const double per_square_proc = (sp.max_power - sp.idle_power) / Pat * pb.server.proc_slope;
  const double node_cap = static_cast<double>(N) * Pat;

  f.p.assign(bss.size(), std::vector<int>(K, -1));
  f.q.assign(bss.size(), std::vector<int>(K, -1));
  for (std::size_t b = 0; b < bss.size(); ++b) {
    if (reach[b] == 0) continue;
    const double ub = std::min<double>(reach[b], node_cap);
    for (std::size_t n = 0; n < K; ++n) {
      const NodeIndex ni{static_cast<std::uint32_t>(n)};
      const double up = em.upload_unit(bss[b], ni);
      const double results = em.feedback_unit(bss[b], ni) + em.storage_unit(ni);
      f.p[b][n] = m.add_col(up + results + per_patient_proc, 0.0, ub, true);
      f.q[b][n] = m.add_col(up + (pb.duplicate_results ? results : 0.0) + per_patient_proc, 0.0, ub, true);
    }
  }

  f.servers.resize(K);
  f.switch_on.resize(K);
  f.load_sq.resize(K);
  f.cut_levels.assign(K, {});
  for (std::size_t n = 0; n < K; ++n) {
    f.servers[n] = m.add_col(em.server_idle(), 0.0, N, true, 1);
    f.switch_on[n] = m.add_col(em.switch_idle(), 0.0, 1.0, true, 2);
    f.load_sq[n] = m.add_col(per_square_proc, 0.0, static_cast<double>(N) * Pat * Pat, false);
  }

  auto& rows = m.lp;
  // Every patient of a clinic enters through one of its base stations.
  for (std::size_t c = 0; c < clinics.size(); ++c) {
    if (pb.demand[c] == 0) continue;
    std::vector<lp::Term> t;
    for (int col : f.w[c]) t.push_back({col, 1.0});
    rows.add_row(std::move(t), lp::Sense::equal, pb.demand[c]);
  }
  // Everything entering at b gets one primary and one backup.
  std::vector<std::vector<lp::Term>> entering(bss.size());
  for (std::size_t c = 0; c < clinics.size(); ++c)
    for (std::size_t i = 0; i < f.w[c].size(); ++i)
      if (f.w[c][i] >= 0) entering[em.bs_ordinal(clinics[c].candidate_bs[i])].push_back({f.w[c][i], -1.0});
  for (std::size_t b = 0; b < bss.size(); ++b) {
    if (reach[b] == 0) continue;
    for (const auto* role : {&f.p, &f.q}) {
      auto t = entering[b];
      for (std::size_t n = 0; n < K; ++n) t.push_back({(*role)[b][n], 1.0});
      rows.add_row(std::move(t), lp::Sense::equal, 0.0);
    }
    if (pb.geo_constraint) {
      for (std::size_t n = 0; n < K; ++n) {
        auto t = entering[b];
        t.push_back({f.p[b][n], 1.0});
        t.push_back({f.q[b][n], 1.0});
        f.geo_rows.push_back({std::move(t), lp::Sense::less_equal, 0.0});
      }
    }
  }
  // Node capacity and switch activation.
  for (std::size_t n = 0; n < K; ++n) {
    std::vector<lp::Term> t;
    for (std::size_t b = 0; b < bss.size(); ++b) {
      if (f.p[b][n] < 0) continue;
      t.push_back({f.p[b][n], 1.0});
      t.push_back({f.q[b][n], 1.0});
    }
    t.push_back({f.servers[n], -static_cast<double>(Pat)});
    rows.add_row(std::move(t), lp::Sense::less_equal, 0.0);
    rows.add_row({{f.servers[n], 1.0}, {f.switch_on[n], -static_cast<double>(N)}}, lp::Sense::less_equal, 0.0);
  }

  // Base stations, their ONTs, and node hosts get strong activation rows;
  // any other device a flow crosses is linked per destination node.
  std::vector<int> bs_on(bss.size(), -1);
  for (std::size_t b = 0; b < bss.size(); ++b) {
    if (reach[b] == 0) continue;
    bs_on[b] = device_col(bss[b]);
  }
  for (std::size_t c = 0; c < clinics.size(); ++c)
    for (std::size_t i = 0; i < f.w[c].size(); ++i) {
      if (f.w[c][i] < 0) continue;
      const int z = bs_on[em.bs_ordinal(clinics[c].candidate_bs[i])];
      if (z >= 0) rows.add_row({{f.w[c][i], 1.0}, {z, -static_cast<double>(pb.demand[c])}}, lp::Sense::less_equal, 0.0);
    }
  std::vector<int> ont_on(bss.size(), -1);
  for (std::size_t b = 0; b < bss.size(); ++b) {
    if (bs_on[b] < 0) continue;
    ont_on[b] = device_col(net.ont_of(bss[b]));
    if (ont_on[b] >= 0) rows.add_row({{bs_on[b], 1.0}, {ont_on[b], -1.0}}, lp::Sense::less_equal, 0.0);
  }
  for (std::size_t n = 0; n < K; ++n) {
    const int z = device_col(nodes[n].device);
    if (z >= 0) rows.add_row({{f.switch_on[n], 1.0}, {z, -1.0}}, lp::Sense::less_equal, 0.0);
  }

  std::map<std::pair<std::uint32_t, std::size_t>, std::vector<lp::Term>> groups;  // (device, node)
  for (std::size_t b = 0; b < bss.size(); ++b) {
    if (reach[b] == 0) continue;
    const DeviceIndex bs = bss[b], ont = net.ont_of(bs);
    auto covered = [&](DeviceIndex d, std::size_t n) {
      if (d == bs && bs_on[b] >= 0) return true;
      if (d == ont && bs_on[b] >= 0 && ont_on[b] >= 0) return true;
      return d == nodes[n].device;
    };
    for (std::size_t n = 0; n < K; ++n) {
      const NodeIndex ni{static_cast<std::uint32_t>(n)};
      for (int role = 0; role < 2; ++role) {
        const int col = role == 0 ? f.p[b][n] : f.q[b][n];
        std::set<std::uint32_t> crossed;
        for (auto d : em.access_devices(bs, ni)) crossed.insert(d.value);
        if (role == 0 || pb.duplicate_results)
          for (auto d : em.storage_devices(ni)) crossed.insert(d.value);
        for (auto dv : crossed) {
          const DeviceIndex d{dv};
          if (covered(d, n) || device_col(d) < 0) continue;
          groups[{dv, n}].push_back({col, 1.0});
        }
      }
    }
  }
  for (auto& [key, terms] : groups) {
    const int z = f.device_on[key.first];
    terms.push_back({z, -std::min<double>(2.0 * D, node_cap)});
    rows.add_row(std::move(terms), lp::Sense::less_equal, 0.0);
  }

  // Outer processing cuts: empty/one patient and full load.
  for (std::size_t n = 0; n < K; ++n) {
    for (int j : {0, Pat - 1}) {
      if (std::find(f.cut_levels[n].begin(), f.cut_levels[n].end(), j) != f.cut_levels[n].end()) continue;
      rows.rows.push_back(detail::processing_cut(f, n, j));
      f.cut_levels[n].push_back(j);
    }
  }
  f.rows = static_cast<int>(rows.rows.size());
  return f;
}

namespace detail {

/// Pairs primary and backup lists at one base station; forbids equal nodes
/// when `distinct`. Returns counts per (primary, backup) or nullopt when no
/// pairing exists.
inline std::optional<std::vector<std::vector<int>>> pair_roles(const std::vector<int>& prim,
                                                               const std::vector<int>& back, bool distinct) {
  const int K = static_cast<int>(prim.size());
  // Max-flow on source -> primary node -> backup node -> sink.
  const int S = 2 * K, T = 2 * K + 1, V = 2 * K + 2;
  std::vector<std::vector<int>> cap(V, std::vector<int>(V, 0));
  const int big = 1 << 28;
  int need = 0;
  for (int n = 0; n < K; ++n) {
    cap[S][n] = prim[n];
    cap[K + n][T] = back[n];
    need += prim[n];
    for (int k = 0; k < K; ++k)
      if (!distinct || n != k) cap[n][K + k] = big;
  }
  auto residual = cap;
  int flow = 0;
  for (;;) {
    std::vector<int> prev(V, -1);
    prev[S] = S;
    std::vector<int> queue{S};
    for (std::size_t h = 0; h < queue.size() && prev[T] < 0; ++h) {
      const int u = queue[h];
      for (int v = 0; v < V; ++v)
        if (prev[v] < 0 && residual[u][v] > 0) {
          prev[v] = u;
          queue.push_back(v);
        }
    }
    if (prev[T] < 0) break;
    int add = big;
    for (int v = T; v != S; v = prev[v]) add = std::min(add, residual[prev[v]][v]);
    for (int v = T; v != S; v = prev[v]) {
      residual[prev[v]][v] -= add;
      residual[v][prev[v]] += add;
    }
    flow += add;
  }
  if (flow != need) return std::nullopt;
  std::vector<std::vector<int>> pairs(K, std::vector<int>(K, 0));
  for (int n = 0; n < K; ++n)
    for (int k = 0; k < K; ++k)
      if (cap[n][K + k] > 0) pairs[n][k] = cap[n][K + k] - residual[n][K + k];
  return pairs;
}

inline long rounded(double v) { return std::lround(v); }

inline Placement decode(const Formulation& f, const PlacementProblem& pb, const std::vector<double>& x) {
  const Network& net = *pb.network;
  const auto& clinics = net.clinics();
  const auto& bss = net.base_stations();
  const std::size_t K = f.servers.size();
  Placement pl;

  std::vector<std::vector<std::pair<std::size_t, int>>> users(bss.size());  // (clinic, count)
  std::vector<int> bs_ord(net.devices().size(), -1);
  for (std::size_t b = 0; b < bss.size(); ++b) bs_ord[bss[b].value] = static_cast<int>(b);
  for (std::size_t c = 0; c < clinics.size(); ++c)
    for (std::size_t i = 0; i < f.w[c].size(); ++i) {
      if (f.w[c][i] < 0) continue;
      const int v = static_cast<int>(rounded(x[f.w[c][i]]));
      if (v > 0) users[bs_ord[clinics[c].candidate_bs[i].value]].push_back({c, v});
    }

  for (std::size_t b = 0; b < bss.size(); ++b) {
    if (users[b].empty()) continue;
    std::vector<int> prim(K, 0), back(K, 0);
    for (std::size_t n = 0; n < K; ++n) {
      prim[n] = static_cast<int>(rounded(x[f.p[b][n]]));
      back[n] = static_cast<int>(rounded(x[f.q[b][n]]));
    }
    auto pairs = pair_roles(prim, back, pb.geo_constraint);
    if (!pairs) throw std::logic_error("integer solution has no valid primary/backup pairing");
    std::size_t u = 0;
    int left = users[b][0].second;
    for (std::size_t n = 0; n < K; ++n)
      for (std::size_t k = 0; k < K; ++k) {
        int count = (*pairs)[n][k];
        while (count > 0) {
          while (left == 0) left = users[b][++u].second;
          const int take = std::min(count, left);
          AssignmentKey key{ClinicIndex{static_cast<std::uint32_t>(users[b][u].first)}, bss[b],
                            NodeIndex{static_cast<std::uint32_t>(n)}, NodeIndex{static_cast<std::uint32_t>(k)}};
          pl.assignments[key] += take;
          count -= take;
          left -= take;
        }
      }
  }
  for (std::size_t n = 0; n < K; ++n) {
    const int s = static_cast<int>(rounded(x[f.servers[n]]));
    if (s > 0) pl.servers[NodeIndex{static_cast<std::uint32_t>(n)}] = s;
  }
  return pl;
}

inline std::vector<NodeIndex> active_from(const Formulation& f, const std::vector<double>& x) {
  std::vector<NodeIndex> out;
  for (std::size_t n = 0; n < f.servers.size(); ++n)
    if (x[f.servers[n]] > 0.5) out.push_back(NodeIndex{static_cast<std::uint32_t>(n)});
  return out;
}

}  // namespace detail

inline Solution solve_exact(const PlacementProblem& pb, milp::Options options = {}) {
  Formulation f = formulate(pb);
  const int Pat = pb.server.pat_cap;

  std::vector<char> geo_sent(f.geo_rows.size(), 0);
  auto separate = [&f, &geo_sent, Pat](const std::vector<double>& x) {
    std::vector<lp::Row> out;
    for (std::size_t i = 0; i < f.geo_rows.size(); ++i) {
      if (geo_sent[i]) continue;
      double lhs = 0.0;
      for (const auto& t : f.geo_rows[i].terms) lhs += t.coef * x[t.col];
      if (lhs > 1e-7) {
        geo_sent[i] = 1;
        out.push_back(f.geo_rows[i]);
      }
    }
    for (std::size_t n = 0; n < f.servers.size(); ++n) {
      double load = 0.0;
      for (std::size_t b = 0; b < f.p.size(); ++b)
        if (f.p[b][n] >= 0) load += x[f.p[b][n]] + x[f.q[b][n]];
      const double s = x[f.servers[n]], t = x[f.load_sq[n]];
      if (s < 1e-9) continue;
      const int j = std::clamp(static_cast<int>(std::floor(load / s + 1e-12)), 0, Pat - 1);
      const double need = (2.0 * j + 1.0) * load - static_cast<double>(j) * (j + 1) * s;
      if (need > t + 1e-7 * (1.0 + std::abs(need))) {
        auto& levels = f.cut_levels[n];
        if (std::find(levels.begin(), levels.end(), j) != levels.end()) continue;
        levels.push_back(j);
        out.push_back(detail::processing_cut(f, n, j));
      }
    }
    return out;
  };

  auto prefer = [&f](const std::vector<double>& cand, const std::vector<double>& inc) {
    const auto a = detail::active_from(f, cand), b = detail::active_from(f, inc);
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  };

  auto res = milp::solve(f.model, options, separate, prefer);
  if (res.status == milp::Status::infeasible) {
    if (pb.geo_constraint)
      throw InfeasibleError(Infeasibility::placement,
                            "no placement keeps every primary and backup on different nodes");
    throw InfeasibleError(Infeasibility::placement, "no feasible placement");
  }
  if (res.x.empty()) throw InfeasibleError(Infeasibility::placement, "node limit reached before any placement");

  Solution sol;
  sol.plan = f.plan;
  sol.placement = detail::decode(f, pb, res.x);
  sol.energy = make_energy_model(pb).evaluate(sol.placement);
  sol.objective = sol.energy.grand_total;
  sol.nodes_explored = res.nodes;
  if (res.status == milp::Status::optimal) {
    sol.optimality = Optimality::proven_optimal;
    sol.bound_gap = 0.0;
  } else {
    sol.optimality = Optimality::bound_gap;
    sol.bound_gap = std::max(0.0, res.objective - res.best_bound);
  }
  return sol;
}

struct OracleLimits {
  std::size_t max_nodes = 4;
  std::size_t max_clinics = 4;
  int max_patients = 8;
};

/// Exhaustive search over patient-granular assignments; small instances only.
inline Solution solve_oracle(const PlacementProblem& pb, OracleLimits limits = {}) {
  if (!pb.network) throw InputError("placement problem has no network");
  const Network& net = *pb.network;
  const EnergyModel em = make_energy_model(pb);
  const auto& nodes = em.nodes();
  const auto& clinics = net.clinics();
  if (pb.demand.size() != clinics.size()) throw InputError("demand does not match the clinic list");
  if (nodes.size() > limits.max_nodes || clinics.size() > limits.max_clinics ||
      pb.total_demand() > limits.max_patients)
    throw InputError("instance exceeds oracle enumeration bounds (" + std::to_string(nodes.size()) +
                     " nodes, " + std::to_string(clinics.size()) + " clinics, " +
                     std::to_string(pb.total_demand()) + " patients)");
  for (int d : pb.demand)
    if (d < 0) throw InputError("negative demand");

  Solution sol;
  sol.plan = make_rate_plan(net, pb.signal, pb.server, pb.timing, pb.servers_per_node);

  const std::size_t K = nodes.size();
  const int N = pb.servers_per_node, Pat = pb.server.pat_cap;

  struct Choice {
    DeviceIndex bs;
    NodeIndex primary, backup;
  };
  std::vector<std::vector<Choice>> choices(clinics.size());
  for (std::size_t c = 0; c < clinics.size(); ++c)
    for (auto bs : clinics[c].candidate_bs)
      for (std::uint32_t a = 0; a < K; ++a)
        for (std::uint32_t b = 0; b < K; ++b)
          if (!pb.geo_constraint || a != b) choices[c].push_back({bs, NodeIndex{a}, NodeIndex{b}});

  std::vector<std::vector<int>> counts(clinics.size());
  for (std::size_t c = 0; c < clinics.size(); ++c) counts[c].assign(choices[c].size(), 0);

  bool found = false;
  double best = std::numeric_limits<double>::infinity();
  Placement best_pl;
  EnergyReport best_report;

  auto evaluate_leaf = [&]() {
    Placement pl;
    std::vector<int> load(K, 0);
    for (std::size_t c = 0; c < clinics.size(); ++c)
      for (std::size_t i = 0; i < choices[c].size(); ++i) {
        if (counts[c][i] == 0) continue;
        const auto& ch = choices[c][i];
        pl.assignments[{ClinicIndex{static_cast<std::uint32_t>(c)}, ch.bs, ch.primary, ch.backup}] += counts[c][i];
        load[ch.primary.value] += counts[c][i];
        load[ch.backup.value] += counts[c][i];
      }
    // A loaded node already has its switch and host on, so its server count
    // only changes that node's processing energy; empty nodes stay dark.
    for (std::size_t n = 0; n < K; ++n) {
      if (load[n] == 0) continue;
      const int lo = (load[n] + Pat - 1) / Pat;
      if (lo > N) return;
      int pick = lo;
      double pick_e = em.node_processing_energy(load[n], lo);
      for (int s = lo + 1; s <= N; ++s) {
        const double e = em.node_processing_energy(load[n], s);
        if (e < pick_e) {
          pick_e = e;
          pick = s;
        }
      }
      pl.servers[NodeIndex{static_cast<std::uint32_t>(n)}] = pick;
    }
    EnergyReport r = em.evaluate(pl);
    const bool tie = found && std::abs(r.grand_total - best) <= 1e-12 * std::max(1.0, best);
    if (!found || (r.grand_total < best && !tie) ||
        (tie && std::lexicographical_compare(active_nodes(pl).begin(), active_nodes(pl).end(),
                                             active_nodes(best_pl).begin(), active_nodes(best_pl).end()))) {
      found = true;
      best = r.grand_total;
      best_pl = std::move(pl);
      best_report = std::move(r);
    }
  };

  // Multisets of size demand[c] over the clinic's choices, clinic by clinic.
  std::function<void(std::size_t, std::size_t, int)> walk = [&](std::size_t c, std::size_t from, int left) {
    if (c == clinics.size()) {
      evaluate_leaf();
      return;
    }
    if (left == 0) {
      walk(c + 1, 0, c + 1 < clinics.size() ? pb.demand[c + 1] : 0);
      return;
    }
    for (std::size_t i = from; i < choices[c].size(); ++i) {
      ++counts[c][i];
      walk(c, i, left - 1);
      --counts[c][i];
    }
  };
  walk(0, 0, clinics.empty() ? 0 : pb.demand[0]);

  if (!found) throw InfeasibleError(Infeasibility::placement, "no feasible placement");
  sol.placement = std::move(best_pl);
  sol.energy = std::move(best_report);
  sol.objective = sol.energy.grand_total;
  return sol;
}

}  // namespace fogplace
