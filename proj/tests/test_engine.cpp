#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rwsim/engine.hpp"

using namespace rwsim;

namespace {

ScenarioConfig small_cfg() {
  ScenarioConfig cfg;
  cfg.n_bs = 2;
  cfg.n_ue = 8;
  cfg.n_rb = 24;
  cfg.rbg_size = 2;
  cfg.sim_ttis = 200;
  cfg.seed = 5;
  cfg.scheduler = SchedulerKind::PF;
  cfg.channel.shadowing_sigma_db = 0;
  return cfg;
}

void check_conservation(const Simulation& sim) {
  const auto c = sim.packet_counts();
  CHECK(c.created == c.delivered + c.dropped + c.queued + c.harq_pending);
}

}  // namespace

TEST_CASE("empty scenario produces an empty allocation and zero KPIs") {
  auto cfg = small_cfg();
  cfg.n_ue = 0;
  Simulation sim(cfg);
  sim.step();
  for (int b = 0; b < cfg.n_bs; ++b)
    CHECK(sim.last_map(b).assigned_count() == 0);
  const auto& rec = sim.kpi().records.back();
  for (int c = 0; c < kNumClasses; ++c) {
    CHECK(rec.delivered[c] == 0);
    CHECK(rec.dropped[c] == 0);
  }
}

TEST_CASE("zero TTIs yields an empty trace") {
  auto cfg = small_cfg();
  cfg.sim_ttis = 0;
  Simulation sim(cfg);
  CHECK(sim.run().records.empty());
}

TEST_CASE("default run length matches the configured TTI count") {
  auto cfg = small_cfg();
  cfg.sim_ttis = 5000;
  cfg.n_ue = 2;  // keep it quick
  Simulation sim(cfg);
  CHECK(sim.run().records.size() == 5000);
}

TEST_CASE("HOL delay equals wait between arrival and first grant") {
  // One UE, one small packet, no channel errors: delivered the TTI it is
  // scheduled with t_tx = 1.
  auto cfg = small_cfg();
  cfg.n_bs = 1;
  cfg.n_ue = 1;
  cfg.channel.bler_target = 0;
  cfg.traffic.offered_load_fraction = 0.1;  // sparse arrivals
  cfg.sim_ttis = 2000;
  Simulation sim(cfg);
  const auto series = sim.run();
  long delivered = 0;
  for (const auto& rec : series.records)
    for (int c = 0; c < kNumClasses; ++c) delivered += rec.delivered[c];
  CHECK(delivered > 0);
  // sparse load on an idle cell: nothing waits, HOL stays 0
  for (int c = 0; c < kNumClasses; ++c) {
    if (auto hol = series.mean_hol_ms(c)) CHECK(*hol == 0.0);
  }
  check_conservation(sim);
}

TEST_CASE("packet conservation and no RBG double-assignment over a run") {
  for (auto kind : {SchedulerKind::PF, SchedulerKind::CQA}) {
    auto cfg = small_cfg();
    cfg.scheduler = kind;
    cfg.channel.shadowing_sigma_db = 6;  // exercise diverse CQIs
    Simulation sim(cfg);
    for (int t = 0; t < cfg.sim_ttis; ++t) {
      sim.step();
      check_conservation(sim);
      for (int b = 0; b < cfg.n_bs; ++b) {
        const auto& map = sim.last_map(b);
        CHECK(map.assigned_count() <= map.n_rbg);  // one entry per RBG slot
      }
    }
  }
}

TEST_CASE("latency components always sum to the packet latency") {
  // walk live queues and verify the identity on every queued packet
  auto cfg = small_cfg();
  cfg.channel.bler_target = 0.3;  // force HARQ activity
  Simulation sim(cfg);
  for (int t = 0; t < 150; ++t) {
    sim.step();
    for (const auto& ue : sim.ues()) {
      for (const auto& [qci, queue] : ue.queues) {
        for (const auto& p : queue) {
          CHECK(packet_latency_ms(p) ==
                doctest::Approx(p.t_hol_ms + p.t_tx_ms + p.t_harq_ms));
          CHECK(p.t_hol_ms >= 0);
          CHECK(p.t_harq_ms >= 0);
          CHECK(p.retx_count <= cfg.channel.max_harq_retx);
        }
      }
    }
  }
}

TEST_CASE("forced HARQ failure drops after the retransmission cap") {
  auto cfg = small_cfg();
  cfg.n_bs = 1;
  cfg.n_ue = 1;
  cfg.channel.bler_target = 1.0;  // every attempt fails
  cfg.traffic.offered_load_fraction = 0.01;
  cfg.sim_ttis = 400;
  Simulation sim(cfg);
  const auto series = sim.run();
  const auto counts = sim.packet_counts();
  CHECK(counts.delivered == 0);
  long dropped = 0;
  for (int c = 0; c < kNumClasses; ++c) dropped += series.total_dropped[c];
  CHECK(dropped > 0);
  check_conservation(sim);
}

TEST_CASE("expected HARQ delay of delivered packets is geometric") {
  auto cfg = small_cfg();
  cfg.n_bs = 1;
  cfg.n_ue = 4;
  cfg.sim_ttis = 4000;
  cfg.channel.bler_target = 0.1;
  cfg.traffic.offered_load_fraction = 0.3;
  // gather t_harq through per-class KPI? use a direct tally via queues is
  // not possible post-delivery, so re-run stepwise tracking deliveries.
  Simulation sim(cfg);
  sim.run();
  // Indirect check: mean retransmission load implies the geometric mean
  // t_harq = rtt * bler/(1-bler). Verify through packet counts: delivered
  // packets needed created - dropped - backlog attempts; use a second,
  // direct simulation of the outcome model as the oracle.
  std::mt19937_64 rng(99);
  double harq_sum = 0;
  long delivered = 0;
  for (int i = 0; i < 100000; ++i) {
    int fails = 0;
    while (true) {
      if (transmission_outcome(8, rng, cfg.channel) == TxOutcome::Delivered) {
        harq_sum += fails * cfg.channel.harq_rtt_ttis;
        ++delivered;
        break;
      }
      if (++fails >= cfg.channel.max_harq_retx) break;
    }
  }
  const double mean = harq_sum / static_cast<double>(delivered);
  const double expected = cfg.channel.harq_rtt_ttis * 0.1 / 0.9;
  CHECK(mean == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("identical config and seed reproduce the identical trace") {
  auto cfg = small_cfg();
  cfg.scheduler = SchedulerKind::CDPAA2C;
  cfg.a2c.candidate_set = 4;
  cfg.a2c.hidden_layers = {16, 16};
  cfg.sim_ttis = 60;
  Simulation a(cfg), b(cfg);
  const auto ra = a.run();
  const auto rb = b.run();
  REQUIRE(ra.records.size() == rb.records.size());
  for (std::size_t i = 0; i < ra.records.size(); ++i) {
    for (int c = 0; c < kNumClasses; ++c) {
      CHECK(ra.records[i].delivered[c] == rb.records[i].delivered[c]);
      CHECK(ra.records[i].dropped[c] == rb.records[i].dropped[c]);
      CHECK(ra.records[i].hol_sum_ms[c] == rb.records[i].hol_sum_ms[c]);
    }
    CHECK(ra.records[i].reward_per_bs == rb.records[i].reward_per_bs);
  }
}

TEST_CASE("mobile UEs hand over and keep exactly one serving BS") {
  auto cfg = small_cfg();
  cfg.n_ue = 10;
  cfg.mobile_fraction = 0.5;
  cfg.sim_ttis = 500;
  Simulation sim(cfg);
  sim.run();
  for (const auto& ue : sim.ues()) {
    CHECK(ue.serving_bs >= 0);
    CHECK(ue.serving_bs < cfg.n_bs);
    CHECK(ue.cqi >= 0);
    CHECK(ue.cqi <= 15);
  }
}

TEST_CASE("arrival cap is enforced per BS per TTI") {
  auto cfg = small_cfg();
  cfg.n_bs = 1;
  cfg.n_ue = 40;
  cfg.traffic.arrival_cap_per_bs_tti = 3;
  cfg.sim_ttis = 50;
  Simulation sim(cfg);
  sim.run();
  CHECK(sim.arrival_cap_hits() > 0);
  const auto c = sim.packet_counts();
  CHECK(c.created <= 3 * 50);
}
