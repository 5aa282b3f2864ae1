// fogplace: solve, sweep, verify and cross-check processing-server placements.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "fogplace/fogplace.hpp"

namespace fs = std::filesystem;
using namespace fogplace;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kInfeasible = 2;

struct CellArgs {
  std::optional<double> demand;
  std::optional<int> servers;
  std::string geo = "off";

  void attach(CLI::App* app) {
    app->add_option("--demand", demand, "demand fraction in (0, 1]")->check(CLI::Range(0.0, 1.0));
    app->add_option("--servers", servers, "servers per candidate node")->check(CLI::PositiveNumber);
    app->add_option("--geo", geo, "primary and backup on different nodes")->check(CLI::IsMember({"on", "off"}));
  }
  double fraction(const ScenarioConfig& c) const { return demand.value_or(c.sweep.fractions.front()); }
  int n(const ScenarioConfig& c) const { return servers.value_or(c.sweep.servers.front()); }
  bool geo_on() const { return geo == "on"; }
};

void print_row(const SweepRow& r) {
  if (r.solved()) {
    std::string nodes;
    for (const auto& n : r.active_nodes) nodes += (nodes.empty() ? "" : ",") + n;
    std::printf("%-24s %-9s network %12s J  processing %12s J  total %12s J  servers %2d  nodes [%s]\n",
                cell_name(r).c_str(), r.status.c_str(), format_number(r.network_j).c_str(),
                format_number(r.processing_j).c_str(), format_number(r.total_j).c_str(), r.server_count,
                nodes.c_str());
  } else {
    std::printf("%-24s %s  %s\n", cell_name(r).c_str(), r.status.c_str(), r.reason.c_str());
  }
}

int cmd_solve(const std::string& config, const CellArgs& cell, std::string out) {
  const auto cfg = load_config(config);
  auto net = std::make_shared<const Network>(cfg.topology);
  const auto row = solve_cell(cfg, net, cell.fraction(cfg), cell.n(cfg), cell.geo_on());
  if (row.status == "error") throw InputError(row.reason);
  write_cell(row, *net, out.empty() ? cfg.output_dir : out);
  print_row(row);
  return row.solved() ? kOk : kInfeasible;
}

int cmd_sweep(const std::string& config, std::string out, unsigned jobs) {
  const auto cfg = load_config(config);
  auto net = std::make_shared<const Network>(cfg.topology);
  const auto result = run_sweep(cfg, jobs);
  write_sweep(result, *net, out.empty() ? cfg.output_dir : out);
  bool all = true;
  for (const auto& r : result.rows) {
    print_row(r);
    all = all && r.solved();
  }
  return all ? kOk : kInfeasible;
}

int cmd_verify(const std::string& config, const std::string& placement, const std::string& summary, CellArgs cell) {
  const auto cfg = load_config(config);
  auto net = std::make_shared<const Network>(cfg.topology);

  std::optional<std::map<std::string, int>> servers;
  if (!summary.empty()) {
    std::ifstream is(summary);
    if (!is) throw InputError("cannot read summary '" + summary + "'");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(is);
      if (!cell.demand) cell.demand = j.at("demand_fraction").get<double>();
      if (!cell.servers) cell.servers = j.at("servers_per_node").get<int>();
      cell.geo = j.at("geo").get<bool>() ? "on" : "off";
      if (j.contains("servers")) servers = j.at("servers").get<std::map<std::string, int>>();
    } catch (const nlohmann::json::exception& e) {
      throw InputError("summary '" + summary + "': " + e.what());
    }
  }

  const auto pb = make_problem(cfg, net, cell.fraction(cfg), cell.n(cfg), cell.geo_on());
  std::ifstream is(placement);
  if (!is) throw InputError("cannot read placement '" + placement + "'");
  Placement pl = read_placement_csv(is, *net, pb.servers_per_node);

  const auto nodes = net->candidate_nodes(pb.servers_per_node);
  for (std::uint32_t i = 0; i < nodes.size(); ++i) {
    // Without a summary the per-node pool is taken at its cap.
    int s = pb.servers_per_node;
    if (servers) {
      auto it = servers->find(nodes[i].id);
      s = it == servers->end() ? 0 : it->second;
    }
    if (s != 0) pl.servers[NodeIndex{i}] = s;
  }
  if (servers)
    for (const auto& [id, s] : *servers)
      if (std::none_of(nodes.begin(), nodes.end(), [&](const CandidateNode& n) { return n.id == id; }))
        throw InputError("summary names unknown node '" + id + "'");

  const auto violations = verify(pl, pb);
  for (const auto& v : violations) std::printf("violation: %s\n", v.c_str());
  if (violations.empty()) {
    std::printf("%s: ok (%d patients, N=%d, geo %s%s)\n", placement.c_str(), pb.total_demand(), pb.servers_per_node,
                cell.geo.c_str(), servers ? "" : ", server pools at cap");
    return kOk;
  }
  return kInfeasible;
}

int cmd_oracle(const std::string& config, const CellArgs& cell) {
  const auto cfg = load_config(config);
  auto net = std::make_shared<const Network>(cfg.topology);
  const auto pb = make_problem(cfg, net, cell.fraction(cfg), cell.n(cfg), cell.geo_on());
  const Solution brute = solve_oracle(pb);
  const Solution exact = solve_exact(pb);
  const double rel = std::abs(brute.objective - exact.objective) / std::max(1.0, std::abs(brute.objective));
  std::printf("oracle %s J\nexact  %s J\nrelative difference %.3e\n", format_number(brute.objective).c_str(),
              format_number(exact.objective).c_str(), rel);
  const bool clean = verify(exact.placement, pb).empty() && verify(brute.placement, pb).empty();
  return rel <= 1e-9 && clean ? kOk : kInfeasible;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-optimal placement of primary/backup processing servers in a GPON/LTE-M access network"};
  app.require_subcommand(1);

  std::string config, out, placement, summary;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  CellArgs cell;

  auto* solve = app.add_subcommand("solve", "solve one scenario cell");
  solve->add_option("--config", config, "scenario YAML")->required()->check(CLI::ExistingFile);
  cell.attach(solve);
  solve->add_option("--out", out, "output directory (default: sweep.output)");

  auto* sweep = app.add_subcommand("sweep", "solve the full demand x N x geo grid");
  sweep->add_option("--config", config, "scenario YAML")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out, "output directory (default: sweep.output)");
  sweep->add_option("--jobs", jobs, "cells solved concurrently")->check(CLI::PositiveNumber);

  auto* ver = app.add_subcommand("verify", "check a placement table against the constraints");
  ver->add_option("--config", config, "scenario YAML")->required()->check(CLI::ExistingFile);
  ver->add_option("--placement", placement, "placement CSV")->required()->check(CLI::ExistingFile);
  ver->add_option("--summary", summary, "cell summary JSON (scenario and server counts)")->check(CLI::ExistingFile);
  cell.attach(ver);

  auto* oracle = app.add_subcommand("oracle", "cross-check the exact solver by enumeration (small instances)");
  oracle->add_option("--config", config, "scenario YAML")->required()->check(CLI::ExistingFile);
  cell.attach(oracle);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }

  try {
    if (*solve) return cmd_solve(config, cell, out);
    if (*sweep) return cmd_sweep(config, out, jobs);
    if (*ver) return cmd_verify(config, placement, summary, cell);
    if (*oracle) return cmd_oracle(config, cell);
  } catch (const InfeasibleError& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kInfeasible;
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInputError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInputError;
  }
  return kInputError;
}
