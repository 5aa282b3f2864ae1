#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "support.hpp"

using namespace fogplace;
using namespace fogplace::testing;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(topology:
  clusters: 1
  olts:
    - {id: olt-x, cluster: 0}
  onts:
    - {id: ont-a, olt: olt-x}
    - {id: ont-b, olt: olt-x}
  base_stations:
    - {id: bs-a, ont: ont-a}
    - {id: bs-b, ont: ont-b}
  clinics:
    - {id: north, patients: 4, bs: [bs-a]}
    - {id: south, patients: 3, bs: [bs-a, bs-b]}
signal:
  pat_cap: 3
sweep:
  fractions: [0.5, 1.0]
  servers: [2, 3]
  geo: [false, true]
  output: small_out
)";

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("fogplace_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return path / name;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  auto at = s.find(from);
  if (at == std::string::npos) throw std::logic_error("fixture text not found: " + from);
  return s.replace(at, from.size(), to);
}

std::string error_text(const fs::path& p) {
  try {
    load_config(p.string());
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(LoadConfig, BundledCaseStudyShape) {
  const auto cfg = case_study();
  const auto& t = cfg.topology;
  EXPECT_EQ(t.clinics.size(), 16u);
  EXPECT_EQ(std::accumulate(t.clinics.begin(), t.clinics.end(), 0,
                            [](int a, const Clinic& c) { return a + c.patient_count; }),
            300);
  EXPECT_EQ(t.base_stations.size(), 13u);
  EXPECT_EQ(t.clusters, 2);
  EXPECT_EQ(cfg.server.pat_cap, 60);
  EXPECT_EQ(cfg.sweep.fractions.size() * cfg.sweep.servers.size() * cfg.sweep.geo.size(), 20u);
}

TEST(LoadConfig, OmittedConstantsTakeDefaults) {
  TempDir d;
  const auto cfg = load_config(d.write("c.yaml", kSmall).string());
  EXPECT_EQ(cfg.timing.re_rate, 336.0);
  EXPECT_EQ(cfg.timing.budget, 240.0);
  EXPECT_EQ(cfg.timing.healthcare_share, 0.003);
  EXPECT_EQ(cfg.signal.ecg_bits, 252800.0);
  EXPECT_EQ(cfg.server.proc_intercept, 4.6857);
  EXPECT_EQ(cfg.server.pat_cap, 3);
  EXPECT_EQ(cfg.topology.olts[0].power->max_power, 1940.0);
  EXPECT_FALSE(cfg.duplicate_results);
  EXPECT_EQ(fs::path(cfg.output_dir), (d.path / "small_out").lexically_normal());
}

TEST(LoadConfig, PatCapFromFraction) {
  TempDir d;
  const auto cfg = load_config(d.write("c.yaml", replace(kSmall, "pat_cap: 3", "pat_fraction: 0.5")).string());
  EXPECT_EQ(cfg.server.pat_cap, 4);  // round(0.5 * 7)
}

TEST(LoadConfig, NegativeCapacityRejected) {
  TempDir d;
  const auto p = d.write("c.yaml", replace(kSmall, "{id: bs-b, ont: ont-b}", "{id: bs-b, ont: ont-b, capacity: -5}"));
  EXPECT_NE(error_text(p).find("capacity"), std::string::npos) << error_text(p);
}

TEST(LoadConfig, ListsAllViolations) {
  TempDir d;
  std::string text = replace(kSmall, "fractions: [0.5, 1.0]", "fractions: [0.5, 1.5]");
  text = replace(text, "servers: [2, 3]", "servers: [0, 3]");
  try {
    load_config(d.write("c.yaml", text).string());
    FAIL();
  } catch (const InputError& e) {
    EXPECT_EQ(e.details().size(), 2u) << e.what();
  }
}

TEST(LoadConfig, UnknownFieldNamed) {
  TempDir d;
  const auto msg = error_text(d.write("c.yaml", replace(kSmall, "pat_cap: 3", "pat_cap: 3\n  re_rat: 300")));
  EXPECT_NE(msg.find("re_rat"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 16"), std::string::npos) << msg;
}

TEST(LoadConfig, ParseErrorCarriesLine) {
  TempDir d;
  const auto msg = error_text(d.write("c.yaml", replace(kSmall, "pat_cap: 3", "pat_cap: [3")));
  EXPECT_NE(msg.find("line"), std::string::npos) << msg;
}

TEST(LoadConfig, MissingFile) { EXPECT_THROW(load_config("/nonexistent/x.yaml"), InputError); }

TEST(ScaleDemand, LargestRemainder) {
  std::vector<int> base(12, 19);
  base.insert(base.end(), 4, 18);
  for (double f : {0.2, 0.4, 0.6, 0.8, 1.0}) {
    const auto d = scale_demand(base, f);
    EXPECT_EQ(std::accumulate(d.begin(), d.end(), 0), static_cast<int>(std::lround(300 * f)));
    for (std::size_t i = 0; i < base.size(); ++i) {
      EXPECT_GE(d[i], static_cast<int>(std::floor(base[i] * f)));
      EXPECT_LE(d[i], static_cast<int>(std::ceil(base[i] * f)));
    }
  }
  EXPECT_EQ(scale_demand({1, 1, 1}, 0.5), (std::vector<int>{1, 1, 0}));  // ties keep clinic order
  EXPECT_EQ(scale_demand({0, 0}, 1.0), (std::vector<int>{0, 0}));
}

TEST(FormatNumber, SixSignificantDigits) {
  EXPECT_EQ(format_number(0.0), "0");
  EXPECT_EQ(format_number(0.2), "0.2");
  EXPECT_EQ(format_number(40093.3912), "40093.4");
  EXPECT_EQ(format_number(1234567.0), "1234570");
  EXPECT_EQ(format_number(0.000123456789), "0.000123457");
  EXPECT_EQ(format_number(-2.5), "-2.5");
}

TEST(Sweep, RowsFilesAndDeterminism) {
  TempDir d;
  const auto cfg = load_config(d.write("c.yaml", kSmall).string());
  const auto net = Network(cfg.topology);
  const auto a = run_sweep(cfg, 1);
  const auto b = run_sweep(cfg, 4);
  ASSERT_EQ(a.rows.size(), 8u);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto& r = a.rows[i];
    ASSERT_TRUE(r.solved()) << cell_name(r) << " " << r.reason;
    EXPECT_EQ(r.network_j + r.processing_j, r.total_j) << cell_name(r);
    EXPECT_EQ(cell_name(r), cell_name(b.rows[i]));
    EXPECT_EQ(r.total_j, b.rows[i].total_j);
  }
  write_sweep(a, net, d.path / "a");
  write_sweep(b, net, d.path / "b");
  for (const auto& e : fs::directory_iterator(d.path / "a")) {
    const auto name = e.path().filename().string();
    if (name == "sweep_timing.csv") continue;
    EXPECT_EQ(slurp(e.path()), slurp(d.path / "b" / name)) << name;
  }

  const auto summary = slurp(d.path / "a" / "sweep_summary.csv");
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 9);  // header + 8 rows
  EXPECT_EQ(summary.substr(0, summary.find(',')), "demand_fraction");
  EXPECT_TRUE(fs::exists(d.path / "a" / "placement_f0.5_N2_geo-on.csv"));
  EXPECT_TRUE(fs::exists(d.path / "a" / "energy_f1_N3_geo-off.csv"));

  const auto energy = slurp(d.path / "a" / "energy_f1_N3_geo-off.csv");
  EXPECT_EQ(energy.substr(0, energy.find('\n')), "device_id,device_kind,idle_J,proportional_J,total_J");
  EXPECT_NE(energy.find("\ngrand_total,"), std::string::npos);
}

TEST(Sweep, PlotDataSeries) {
  TempDir d;
  const auto cfg = load_config(d.write("c.yaml", kSmall).string());
  const auto [network, processing] = plot_data(run_sweep(cfg, 2));
  EXPECT_EQ(network.substr(0, network.find('\n')), "# demand_fraction N2_geo-off N2_geo-on N3_geo-off N3_geo-on");
  EXPECT_EQ(std::count(network.begin(), network.end(), '\n'), 3);
  EXPECT_EQ(std::count(processing.begin(), processing.end(), '\n'), 3);

  // Processing series coincide for geo on and off.
  std::istringstream is(processing);
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string f, n2off, n2on, n3off, n3on;
    ls >> f >> n2off >> n2on >> n3off >> n3on;
    EXPECT_EQ(n2off, n2on) << line;
    EXPECT_EQ(n3off, n3on) << line;
  }
}

TEST(Sweep, SingleCellZeroDemand) {
  TempDir d;
  std::string text = replace(kSmall, "patients: 4", "patients: 0");
  text = replace(text, "patients: 3", "patients: 0");
  text = replace(text, "fractions: [0.5, 1.0]", "fractions: [1.0]");
  text = replace(text, "servers: [2, 3]", "servers: [2]");
  text = replace(text, "geo: [false, true]", "geo: [true]");
  const auto cfg = load_config(d.write("c.yaml", text).string());
  const auto s = run_sweep(cfg);
  ASSERT_EQ(s.rows.size(), 1u);
  EXPECT_TRUE(s.rows[0].solved());
  EXPECT_EQ(s.rows[0].total_j, 0.0);
  EXPECT_EQ(s.rows[0].server_count, 0);
  const auto [network, processing] = plot_data(s);
  EXPECT_EQ(network, "# demand_fraction N2_geo-on\n1 0\n");
}

TEST(Sweep, InfeasibleCellRecordedAndSweepContinues) {
  TempDir d;
  // 7 patients need 14 slots; 3 nodes x 1 server x 3 patients = 9 at N=1.
  const auto cfg =
      load_config(d.write("c.yaml", replace(kSmall, "servers: [2, 3]", "servers: [1, 3]")).string());
  const auto s = run_sweep(cfg, 2);
  ASSERT_EQ(s.rows.size(), 8u);
  int failed = 0;
  for (const auto& r : s.rows) {
    if (r.solved()) continue;
    ++failed;
    EXPECT_EQ(r.status, "infeasible:capacity");
    EXPECT_NE(r.reason.find("capacity"), std::string::npos) << r.reason;
  }
  EXPECT_EQ(failed, 2);  // N=1 at fraction 1.0, both geo flags
  const auto csv = summary_csv(s);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);
}

TEST(PlacementCsv, RoundTrip) {
  const auto cfg = case_study();
  auto net = std::make_shared<const Network>(cfg.topology);
  const auto pb = make_problem(cfg, net, 0.2, 2, true);
  const auto sol = solve_exact(pb);
  std::istringstream is(placement_csv(sol, *net, 2));
  auto back = read_placement_csv(is, *net, 2);
  back.servers = sol.placement.servers;
  EXPECT_EQ(back, sol.placement);
}

TEST(PlacementCsv, UnknownIdsRejected) {
  const auto cfg = case_study();
  const Network net(cfg.topology);
  std::istringstream is("clinic,bs,primary_node,backup_node,patients\nclinic99,bs1,olt-a,olt-a,3\n");
  EXPECT_THROW(read_placement_csv(is, net, 2), InputError);
}
