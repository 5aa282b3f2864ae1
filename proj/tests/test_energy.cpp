#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "support.hpp"

using namespace fogplace;
using namespace fogplace::testing;

namespace {

constexpr double kWindow = 240.0;
const NodeIndex kOlt{0}, kOnt0{1}, kOnt1{2};
const DeviceIndex kBs0{5};  // metro, cloud, olt0, ont0, ont1, bs0, bs1

EnergyModel model_for(const Topology& t, int N = 2, bool dup = false) {
  EnergyInputs in;
  in.duplicate_results = dup;
  return EnergyModel(std::make_shared<const Network>(t), N, in);
}

Placement one_patient(NodeIndex primary, NodeIndex backup) {
  Placement p;
  p.assignments[{ClinicIndex{0}, kBs0, primary, backup}] = 1;
  return p;
}

double entry(const EnergyReport& r, const std::string& id) {
  for (const auto& d : r.devices)
    if (d.id == id) return d.total();
  return 0.0;
}

}  // namespace

TEST(EnergyPerBit, Examples) {
  EXPECT_DOUBLE_EQ(energy_per_bit({3.52, 0.57, 16e9}), 1.84375e-10);
  EXPECT_DOUBLE_EQ(energy_per_bit({528, 333, 0.3e9}), 6.5e-7);
  EXPECT_EQ(energy_per_bit({50, 50, 1e9}), 0.0);
}

TEST(DeviceIdleEnergy, Examples) {
  EXPECT_NEAR(device_idle_energy({528, 333, 0.3e9, true, 0.003}, true, kWindow), 239.76, 1e-9);
  EXPECT_EQ(device_idle_energy({528, 333, 0.3e9, true, 0.003}, false, kWindow), 0.0);
  EXPECT_DOUBLE_EQ(device_idle_energy({180, 78, 60, false, 1.0}, true, kWindow), 18720.0);
}

TEST(PowerProfile, Validation) {
  EXPECT_TRUE(validate(DevicePowerProfile{10, 5, 1, true, 0.5}, "x").empty());
  EXPECT_EQ(validate(DevicePowerProfile{10, -1, 1, false, 1}, "x").size(), 1u);
  EXPECT_EQ(validate(DevicePowerProfile{4, 5, 1, false, 1}, "x").size(), 1u);
  EXPECT_EQ(validate(DevicePowerProfile{10, 5, 0, false, 1}, "x").size(), 1u);
  EXPECT_EQ(validate(DevicePowerProfile{10, 5, 1, true, 0}, "x").size(), 1u);
}

TEST(NetworkEnergy, ZeroPatients) {
  const auto em = model_for(tree({2}, {{0}}));
  const auto r = em.network_energy(Placement{});
  EXPECT_EQ(r.network_total, 0.0);
  EXPECT_TRUE(r.devices.empty());
}

TEST(NetworkEnergy, ColocatedOnOwnOnt) {
  const auto t = tree({2}, {{0}});
  const auto em = model_for(t);
  auto p = one_patient(kOnt0, kOnt0);
  p.servers[kOnt0] = 2;
  ASSERT_EQ(em.network().device(kBs0).id, "bs0");
  const auto r = em.network_energy(p);

  const double pi = 252800, alpha = 256;
  const double bs_epb = (528.0 - 333.0) / 0.3e9, ont_epb = 7.0 / 1.25e9, olt_epb = 1880.0 / 20e9,
               sw_epb = (3.52 - 0.57) / 16e9;
  const double idle = 0.003 * 333 * kWindow + 0.003 * 8 * kWindow + 0.003 * 60 * kWindow + 0.57 * kWindow;
  const double upload = 2 * pi * (bs_epb + ont_epb + sw_epb);
  const double feedback = alpha * (bs_epb + ont_epb + sw_epb);
  const double storage = alpha * (ont_epb + olt_epb + sw_epb);
  EXPECT_NEAR(r.network_total, idle + upload + feedback + storage, 1e-9 * r.network_total);
  EXPECT_NEAR(entry(r, "bs0"), 0.003 * 333 * kWindow + (2 * pi + alpha) * bs_epb, 1e-9);
  EXPECT_NEAR(entry(r, "olt0"), 0.003 * 60 * kWindow + alpha * olt_epb, 1e-9);
  EXPECT_EQ(entry(r, "ont1"), 0.0);
  EXPECT_EQ(entry(r, "metro"), 0.0);
}

TEST(NetworkEnergy, BackupAtOltCostsMore) {
  const auto em = model_for(tree({2}, {{0}}));
  auto a = one_patient(kOnt0, kOnt0);
  a.servers[kOnt0] = 2;
  auto b = one_patient(kOnt0, kOlt);
  b.servers[kOnt0] = 1;
  b.servers[kOlt] = 1;
  EXPECT_GT(em.network_energy(b).network_total, em.network_energy(a).network_total);
}

TEST(NetworkEnergy, MissingProfileIsAnInputError) {
  auto t = tree({2}, {{0}});
  t.onts[0].power.reset();
  const auto em = model_for(t);
  EXPECT_THROW(em.network_energy(one_patient(kOlt, kOlt)), InputError);

  t = tree({2}, {{1}});
  t.onts[0].power.reset();
  const auto em2 = model_for(t);
  Placement p;
  p.assignments[{ClinicIndex{0}, DeviceIndex{6}, kOnt1, kOlt}] = 1;  // never touches ont0
  EXPECT_NO_THROW(em2.network_energy(p));
}

TEST(NetworkEnergy, DuplicateResultsCarriesSecondCopy) {
  const auto t = tree({2}, {{0}});
  const auto p = one_patient(kOnt0, kOlt);
  const double single = model_for(t, 2, false).network_energy(p).network_total;
  const double dual = model_for(t, 2, true).network_energy(p).network_total;
  const double ont_epb = 7.0 / 1.25e9, olt_epb = 1880.0 / 20e9, bs_epb = 195.0 / 0.3e9, sw = 2.95 / 16e9;
  // backup at the OLT: feedback olt->ont->bs, storage olt->cloud
  EXPECT_NEAR(dual - single, 256 * (olt_epb + ont_epb + bs_epb + sw) + 256 * (olt_epb + sw), 1e-12);
}

TEST(ProcessingEnergy, Examples) {
  const auto em = model_for(tree({2}, {{0}}));
  EXPECT_EQ(em.processing_energy(Placement{}).processing_total, 0.0);
  EXPECT_NEAR(em.server_energy(60), 78 * 240 + 102 * 1.0 * 4.8057, 1e-9);
  EXPECT_NEAR(em.server_energy(60), 19210.2, 0.05);
}

TEST(ProcessingEnergy, EvenSplitOverServers) {
  const auto em = model_for(tree({2}, {{0}}));
  Placement p;
  p.assignments[{ClinicIndex{0}, kBs0, kOlt, kOlt}] = 7;  // 14 patient slots at the OLT
  p.servers[kOlt] = 3;
  EXPECT_EQ(balanced_loads(14, 3), (std::vector<int>{5, 5, 4}));
  const double expect = 2 * em.server_energy(5) + em.server_energy(4);
  EXPECT_NEAR(em.processing_energy(p).processing_total, expect, 1e-9);
  p.servers[kOlt] = 0;
  EXPECT_THROW(em.processing_energy(p), InfeasibleError);
}

TEST(ProcessingEnergy, IndependentOfLocation) {
  const auto em = model_for(tree({2}, {{0}}));
  std::vector<NodeIndex> nodes{kOlt, kOnt0, kOnt1};
  std::vector<int> loads{4, 9, 0};
  std::sort(nodes.begin(), nodes.end());
  double first = -1;
  do {
    Placement p;
    for (int i = 0; i < 3; ++i) {
      if (loads[i] == 0) continue;
      p.assignments[{ClinicIndex{0}, kBs0, nodes[i], nodes[i]}] = loads[i];
      p.servers[nodes[i]] = 1;
    }
    const double e = em.processing_energy(p).processing_total;
    if (first < 0) first = e;
    EXPECT_DOUBLE_EQ(e, first);
  } while (std::next_permutation(nodes.begin(), nodes.end()));
}

TEST(EnergyReport, TotalsAreSumsOfEntries) {
  const auto cfg = case_study();
  auto net = std::make_shared<const Network>(cfg.topology);
  EnergyModel em(net, 2, EnergyInputs{cfg.signal, cfg.server, cfg.node_switch, 240, false});
  std::mt19937_64 rng(7);
  const auto K = em.nodes().size();
  for (int trial = 0; trial < 50; ++trial) {
    Placement p;
    std::vector<int> load(K, 0);
    for (std::uint32_t c = 0; c < net->clinics().size(); ++c) {
      const auto& cand = net->clinics()[c].candidate_bs;
      const auto bs = cand[rng() % cand.size()];
      const NodeIndex a{static_cast<std::uint32_t>(rng() % K)}, b{static_cast<std::uint32_t>(rng() % K)};
      const int n = static_cast<int>(rng() % 5);
      p.assignments[{ClinicIndex{c}, bs, a, b}] += n;
      load[a.value] += n;
      load[b.value] += n;
    }
    for (std::uint32_t n = 0; n < K; ++n)
      if (load[n]) p.servers[NodeIndex{n}] = (load[n] + 59) / 60;
    const auto r = em.evaluate(p);
    double net_sum = 0, proc_sum = 0;
    for (const auto& d : r.devices) {
      EXPECT_GE(d.idle_j, 0.0);
      EXPECT_GE(d.proportional_j, 0.0);
      (d.kind == std::string("server") ? proc_sum : net_sum) += d.total();
    }
    EXPECT_NEAR(r.network_total, net_sum, 1e-9 * r.network_total);
    EXPECT_NEAR(r.processing_total, proc_sum, 1e-9 * r.processing_total);
    EXPECT_EQ(r.grand_total, r.network_total + r.processing_total);
  }
}

TEST(EnergyReport, AddingAFlowNeverLowersAnyDevice) {
  const auto cfg = case_study();
  auto net = std::make_shared<const Network>(cfg.topology);
  EnergyModel em(net, 2, EnergyInputs{cfg.signal, cfg.server, cfg.node_switch, 240, false});
  const auto K = em.nodes().size();
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    Placement p;
    for (int k = 0; k < 3; ++k) {
      const std::uint32_t c = rng() % net->clinics().size();
      const auto& cand = net->clinics()[c].candidate_bs;
      p.assignments[{ClinicIndex{c}, cand[rng() % cand.size()], NodeIndex{static_cast<std::uint32_t>(rng() % K)},
                     NodeIndex{static_cast<std::uint32_t>(rng() % K)}}] += 1;
    }
    Placement more = p;
    const std::uint32_t c = rng() % net->clinics().size();
    const auto& cand = net->clinics()[c].candidate_bs;
    more.assignments[{ClinicIndex{c}, cand[rng() % cand.size()], NodeIndex{static_cast<std::uint32_t>(rng() % K)},
                      NodeIndex{static_cast<std::uint32_t>(rng() % K)}}] += 1;
    const auto before = em.network_energy(p), after = em.network_energy(more);
    for (const auto& d : before.devices) EXPECT_GE(entry(after, d.id), d.total()) << d.id;
    EXPECT_GE(after.network_total, before.network_total);
  }
}

TEST(EnergyReport, ProportionalToBitsWithoutIdle) {
  auto t = tree({2, 1}, {{0}, {2}});
  for (auto& b : t.base_stations) b.power->idle_power = 0;
  for (auto& o : t.onts) o.power->idle_power = 0;
  for (auto& o : t.olts) o.power->idle_power = 0;
  t.metro_power->idle_power = 0;
  EnergyInputs in;
  in.node_switch.idle_power = 0;
  EnergyModel em(std::make_shared<const Network>(t), 2, in);
  Placement p;
  p.assignments[{ClinicIndex{0}, DeviceIndex{7}, NodeIndex{0}, NodeIndex{1}}] = 2;
  p.assignments[{ClinicIndex{1}, DeviceIndex{9}, NodeIndex{4}, NodeIndex{2}}] = 3;
  ASSERT_EQ(em.network().device(DeviceIndex{7}).id, "bs0");
  ASSERT_EQ(em.network().device(DeviceIndex{9}).id, "bs2");
  const double base = em.network_energy(p).network_total;
  for (int k : {2, 3, 7}) {
    Placement q = p;
    for (auto& [key, n] : q.assignments) n *= k;
    EXPECT_NEAR(em.network_energy(q).network_total, k * base, 1e-12 * k * base);
  }
}
