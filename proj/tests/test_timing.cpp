#include <gtest/gtest.h>

#include "support.hpp"

using namespace fogplace;
using namespace fogplace::testing;

TEST(ProcessingTime, Examples) {
  const ServerSpec s;
  EXPECT_DOUBLE_EQ(processing_time(s, 60), 0.002 * 60 + 4.6857);
  EXPECT_NEAR(processing_time(s, 60), 4.8057, 1e-12);
  EXPECT_DOUBLE_EQ(processing_time(s, 0), 4.6857);
  EXPECT_THROW(processing_time(s, 120), InputError);
  EXPECT_THROW(processing_time(s, -1), InputError);
}

TEST(ProcessingTime, Affine) {
  const ServerSpec s;
  for (int a = 0; a <= 30; ++a)
    for (int b = 0; b <= 30; ++b)
      EXPECT_NEAR(processing_time(s, a) + processing_time(s, b), processing_time(s, a + b) + s.proc_intercept, 1e-12);
}

TEST(MaxPatients, Examples) {
  EXPECT_EQ(max_patients_per_node(2, 60), 120);
  EXPECT_EQ(max_patients_per_node(4, 60), 240);
  EXPECT_EQ(max_patients_per_node(1, 1), 1);
}

TEST(HealthcareShare, Examples) {
  EXPECT_DOUBLE_EQ(healthcare_share(1.25e9, 0.003), 3.75e6);
  EXPECT_DOUBLE_EQ(healthcare_share(7.7e8, 1.0), 7.7e8);
  EXPECT_DOUBLE_EQ(healthcare_share(16e9, 0.003), 4.8e7);
}

TEST(FeedbackAllocation, Examples) {
  auto a = feedback_allocation(3.75e6, 120, 336, 256);
  EXPECT_EQ(a.resource_elements, 93);
  EXPECT_DOUBLE_EQ(a.rate, 31248.0);
  EXPECT_NEAR(a.time, 256.0 / 31248.0, 1e-18);
  EXPECT_NEAR(a.time, 8.192e-3, 1e-5);

  a = feedback_allocation(336, 1, 336, 256);
  EXPECT_EQ(a.resource_elements, 1);
  EXPECT_DOUBLE_EQ(a.rate, 336.0);
  EXPECT_DOUBLE_EQ(a.time, 256.0 / 336.0);

  try {
    feedback_allocation(335, 1, 336, 256);
    FAIL() << "expected infeasibility";
  } catch (const InfeasibleError& e) {
    EXPECT_EQ(e.kind(), Infeasibility::rate);
  }
}

TEST(FeedbackAllocation, ResourceElementsAreMaximal) {
  for (double cap : {336.0, 671.9, 672.0, 1e5, 3.75e6, 9e5, 1.23456789e7})
    for (int p : {1, 7, 60, 120, 240}) {
      if (cap / p < 336) continue;
      const auto a = feedback_allocation(cap, p, 336, 256);
      EXPECT_LE(a.rate, cap / p);
      EXPECT_GT(336.0 * (a.resource_elements + 1), cap / p);
    }
}

TEST(UploadAllocation, Examples) {
  auto a = upload_allocation(9e5, 120, 252800, 180, 336);
  EXPECT_EQ(a.resource_elements, 22);
  EXPECT_DOUBLE_EQ(a.rate, 7392.0);
  EXPECT_NEAR(a.time, 34.2, 0.01);
  EXPECT_DOUBLE_EQ(a.time, 252800.0 / 7392.0);

  // rate exactly at the deadline
  a = upload_allocation(336.0 * 10, 1, 3360.0 * 2, 2.0, 336);
  EXPECT_DOUBLE_EQ(a.time, 2.0);

  EXPECT_THROW(upload_allocation(9e5, 5000, 252800, 180, 336), InfeasibleError);
}

TEST(UploadAllocation, NeverOverAllocates) {
  for (double share : {9e5, 3.75e6, 1e6 + 17})
    for (int p : {1, 60, 120})
      EXPECT_LE(upload_allocation(share, p, 1000, 1e6, 336).rate, share / p);
}

TEST(StorageAllocation, Examples) {
  auto a = storage_allocation(3.75e6, 120, 256);
  EXPECT_DOUBLE_EQ(a.rate, 31250.0);
  EXPECT_NEAR(a.time, 8.192e-3, 1e-15);
  EXPECT_DOUBLE_EQ(storage_allocation(256, 1, 256).time, 1.0);
  auto b = storage_allocation(7.5e6, 120, 256);
  EXPECT_DOUBLE_EQ(b.rate, 62500.0);
  EXPECT_DOUBLE_EQ(b.time, a.time / 2);
}

TEST(CheckBudget, Examples) {
  auto v = check_budget(30, 34.2, 4.8057, 0.0082, 240);
  EXPECT_TRUE(v.feasible);
  EXPECT_NEAR(v.slack, 170.9861, 1e-9);
  v = check_budget(240, 0, 0, 0, 240);
  EXPECT_TRUE(v.feasible);
  EXPECT_EQ(v.slack, 0.0);
  EXPECT_FALSE(check_budget(30, 240, 4.8, 0.01, 240).feasible);
}

TEST(CheckBudget, MonotoneInPatients) {
  const auto cfg = case_study();
  const Network net(cfg.topology);
  const auto plan = make_rate_plan(net, cfg.signal, cfg.server, cfg.timing, 2);
  SignalSpec sig = cfg.signal;
  sig.recording_time = plan.budget - plan.upload.time - plan.feedback.time - processing_time(cfg.server, 30);
  bool passed_above = false;
  for (int p = cfg.server.pat_cap; p >= 0; --p) {
    const bool ok = check_budget(plan, sig, cfg.server, p).feasible;
    if (passed_above) EXPECT_TRUE(ok) << p;
    passed_above = passed_above || ok;
  }
  EXPECT_TRUE(passed_above);
  EXPECT_FALSE(check_budget(plan, sig, cfg.server, 31).feasible);
}

TEST(RatePlan, CaseStudyWorstCase) {
  const auto cfg = case_study();
  const Network net(cfg.topology);
  const auto plan = make_rate_plan(net, cfg.signal, cfg.server, cfg.timing, 2);
  EXPECT_EQ(cfg.server.pat_cap, 60);
  EXPECT_EQ(plan.max_patients, 120);
  // Smallest path share is the BS link (0.3e9 * 0.003); storage rides the ONT uplink.
  EXPECT_DOUBLE_EQ(plan.feedback_share, 9e5);
  EXPECT_DOUBLE_EQ(plan.storage_share, 3.75e6);
  EXPECT_EQ(plan.feedback.resource_elements, 22);
  EXPECT_DOUBLE_EQ(plan.max_upload_time, 240 - 30 - 4.8057 - 256.0 / 7392.0);
  EXPECT_EQ(plan.upload.resource_elements, 22);
  EXPECT_DOUBLE_EQ(plan.storage.rate, 31250.0);
  EXPECT_LE(plan.feedback.rate, plan.feedback_share / plan.max_patients);
  EXPECT_GE(plan.upload.rate, cfg.signal.ecg_bits / plan.max_upload_time);
  EXPECT_TRUE(check_budget(plan, cfg.signal, cfg.server, 60).feasible);
}

TEST(RatePlan, InfeasibleWhenProcessingEatsTheBudget) {
  const auto cfg = case_study();
  const Network net(cfg.topology);
  ServerSpec slow = cfg.server;
  slow.proc_intercept = 239.0;
  try {
    make_rate_plan(net, cfg.signal, slow, cfg.timing, 2);
    FAIL();
  } catch (const InfeasibleError& e) {
    EXPECT_EQ(e.kind(), Infeasibility::timing);
  }
}

TEST(RatePlan, InfeasibleWhenFeedbackShareTooSmall) {
  const auto cfg = case_study();
  const Network net(cfg.topology);
  TimingConstants c = cfg.timing;
  c.healthcare_share = 1e-7;
  try {
    make_rate_plan(net, cfg.signal, cfg.server, c, 4);
    FAIL();
  } catch (const InfeasibleError& e) {
    EXPECT_EQ(e.kind(), Infeasibility::rate);
  }
}
