#pragma once

// Timing chain of one monitoring cycle: record, upload to both servers,
// process, send the result back to the clinic. Uplink/feedback rates are
// granted in whole LTE resource elements.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fogplace/error.hpp"
#include "fogplace/power.hpp"
#include "fogplace/topology.hpp"

namespace fogplace {

struct SignalSpec {
  double ecg_bits = 252.8e3;     // size of one 30 s ECG recording
  double result_bits = 256.0;    // analysed result sent to clinic and cloud
  double recording_time = 30.0;  // s
};

struct ServerSpec {
  int pat_cap = 60;               // patients one server can handle
  double proc_slope = 0.002;      // s per patient
  double proc_intercept = 4.6857; // s
  DevicePowerProfile power{180.0, 78.0, 60.0, false, 1.0};
};

/// Constants of the rate plan that do not depend on the topology.
struct TimingConstants {
  double budget = 240.0;            // total cycle deadline, s
  double re_rate = 336.0;           // bit/s per resource element (QPSK)
  double healthcare_share = 0.003;  // fraction of any link available to this application
};

/// Processing and analysis time of a server handling `patients` recordings.
inline double processing_time(const ServerSpec& server, int patients) {
  if (patients < 0 || patients > server.pat_cap)
    throw InputError("processing_time: " + std::to_string(patients) + " patients exceeds server capacity " +
                     std::to_string(server.pat_cap));
  return server.proc_slope * patients + server.proc_intercept;
}

inline int max_patients_per_node(int n_servers, int pat_cap) { return n_servers * pat_cap; }

inline double healthcare_share(double link_capacity, double share_fraction) {
  return link_capacity * share_fraction;
}

/// Largest k with k * unit <= budget. Exact multiples keep the full count.
inline long whole_units(double budget, double unit) {
  long k = static_cast<long>(std::floor(budget / unit));
  while (static_cast<double>(k + 1) * unit <= budget) ++k;
  while (k > 0 && static_cast<double>(k) * unit > budget) --k;
  return k;
}

struct FeedbackAllocation {
  double per_patient_cap = 0.0;  // bottleneck share per patient
  long resource_elements = 0;
  double rate = 0.0;
  double time = 0.0;
};

inline FeedbackAllocation feedback_allocation(double bottleneck_capacity, int max_p, double re_rate,
                                              double result_bits) {
  FeedbackAllocation a;
  a.per_patient_cap = bottleneck_capacity / max_p;
  a.resource_elements = whole_units(a.per_patient_cap, re_rate);
  if (a.resource_elements < 1)
    throw InfeasibleError(Infeasibility::rate, "feedback share " + std::to_string(a.per_patient_cap) +
                                                   " bit/s per patient is below one resource element");
  a.rate = re_rate * static_cast<double>(a.resource_elements);
  a.time = result_bits / a.rate;
  return a;
}

struct UploadAllocation {
  long resource_elements = 0;
  double rate = 0.0;
  double time = 0.0;
};

inline UploadAllocation upload_allocation(double bs_capacity_share, int max_p, double ecg_bits,
                                          double max_upload_time, double re_rate) {
  UploadAllocation a;
  a.resource_elements = whole_units(bs_capacity_share / max_p, re_rate);
  a.rate = re_rate * static_cast<double>(a.resource_elements);
  const double needed = ecg_bits / max_upload_time;
  if (a.resource_elements < 1 || a.rate < needed)
    throw InfeasibleError(Infeasibility::rate, "upload rate " + std::to_string(a.rate) +
                                                   " bit/s cannot deliver the recording within " +
                                                   std::to_string(max_upload_time) + " s");
  a.time = ecg_bits / a.rate;
  return a;
}

struct StorageAllocation {
  double rate = 0.0;
  double time = 0.0;
};

inline StorageAllocation storage_allocation(double cloud_bottleneck, int max_p, double result_bits) {
  StorageAllocation a;
  a.rate = cloud_bottleneck / max_p;
  a.time = result_bits / a.rate;
  return a;
}

struct RatePlan {
  int servers_per_node = 1;
  int max_patients = 0;  // per candidate node
  double budget = 240.0;
  double re_rate = 336.0;
  double processing_time = 0.0;  // at full server load
  double max_upload_time = 0.0;
  FeedbackAllocation feedback;
  UploadAllocation upload;
  StorageAllocation storage;
  // The air interface share and the worst share along any BS-to-node path
  // are reported separately; the upload is bounded by the smaller one.
  double upload_air_share = 0.0;
  double upload_path_share = 0.0;
  double feedback_share = 0.0;
  double storage_share = 0.0;
};

struct BudgetVerdict {
  bool feasible = false;
  double slack = 0.0;  // s, negative when over budget
};

inline BudgetVerdict check_budget(double recording, double upload, double processing, double feedback,
                                  double budget) {
  const double used = recording + upload + processing + feedback;
  return {used <= budget, budget - used};
}

inline BudgetVerdict check_budget(const RatePlan& plan, const SignalSpec& signal, const ServerSpec& server,
                                  int patients) {
  return check_budget(signal.recording_time, plan.upload.time, processing_time(server, patients),
                      plan.feedback.time, plan.budget);
}

/// Worst-case rate plan for a scenario with `servers_per_node` servers per
/// candidate node, sized so that every node may be fully loaded.
inline RatePlan make_rate_plan(const Network& net, const SignalSpec& signal, const ServerSpec& server,
                               const TimingConstants& constants, int servers_per_node) {
  if (servers_per_node < 1) throw InputError("servers per node must be >= 1");
  if (server.pat_cap < 1) throw InputError("server patient capacity must be >= 1");

  RatePlan plan;
  plan.servers_per_node = servers_per_node;
  plan.max_patients = max_patients_per_node(servers_per_node, server.pat_cap);
  plan.budget = constants.budget;
  plan.re_rate = constants.re_rate;
  plan.processing_time = processing_time(server, server.pat_cap);

  const double inf = std::numeric_limits<double>::infinity();
  const auto nodes = net.candidate_nodes(servers_per_node);
  double path_cap = inf, air_cap = inf, cloud_cap = inf;
  for (auto bs : net.base_stations()) {
    air_cap = std::min(air_cap, net.device(bs).parent_link_capacity);
    for (const auto& n : nodes) path_cap = std::min(path_cap, net.route(n.device, bs).bottleneck());
  }
  for (const auto& n : nodes) cloud_cap = std::min(cloud_cap, net.route(n.device, net.cloud()).bottleneck());

  const double share = constants.healthcare_share;
  plan.storage_share = healthcare_share(cloud_cap, share);
  plan.storage = storage_allocation(plan.storage_share, plan.max_patients, signal.result_bits);

  if (net.base_stations().empty()) {
    // Nothing can reach a server; only the recording itself has to fit.
    plan.max_upload_time = constants.budget - signal.recording_time - plan.processing_time;
    if (!check_budget(plan, signal, server, server.pat_cap).feasible)
      throw InfeasibleError(Infeasibility::timing, "processing alone exceeds the cycle budget");
    return plan;
  }

  plan.feedback_share = healthcare_share(path_cap, share);
  plan.feedback = feedback_allocation(plan.feedback_share, plan.max_patients, constants.re_rate,
                                      signal.result_bits);
  plan.max_upload_time =
      constants.budget - signal.recording_time - plan.processing_time - plan.feedback.time;
  if (!(plan.max_upload_time > 0.0))
    throw InfeasibleError(Infeasibility::timing, "no time left to upload the recording (" +
                                                     std::to_string(plan.max_upload_time) + " s)");

  plan.upload_air_share = healthcare_share(air_cap, share);
  plan.upload_path_share = plan.feedback_share;
  plan.upload = upload_allocation(std::min(plan.upload_air_share, plan.upload_path_share), plan.max_patients,
                                  signal.ecg_bits, plan.max_upload_time, constants.re_rate);

  if (!check_budget(plan, signal, server, server.pat_cap).feasible)
    throw InfeasibleError(Infeasibility::timing, "cycle budget exceeded at full server load");
  return plan;
}

}  // namespace fogplace
