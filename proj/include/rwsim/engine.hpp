#pragma once

#include <memory>
#include <random>
#include <vector>

#include "rwsim/a2c.hpp"
#include "rwsim/channel.hpp"
#include "rwsim/domain.hpp"
#include "rwsim/metrics.hpp"
#include "rwsim/sched.hpp"
#include "rwsim/traffic.hpp"

namespace rwsim {

/// A deterministic single-run TTI loop: arrivals, HOL aging, CQI feedback,
/// scheduling, transmission/HARQ resolution, KPI accounting.
class Simulation {
 public:
  explicit Simulation(const ScenarioConfig& cfg);
  /// Run with externally trained networks (evaluation mode: epsilon 0,
  /// learning off).
  Simulation(const ScenarioConfig& cfg, A2cSystem pretrained);

  /// One TTI in order: mobility/CQI, arrivals, HARQ re-queue, queue drops,
  /// scheduling, transmission outcomes, KPI append.
  void step();

  /// Execute sim_ttis steps and return the full KPI trace.
  KpiSeries run();

  long tti() const { return tti_; }
  const std::vector<UeState>& ues() const { return ues_; }
  const std::vector<BsSite>& sites() const { return sites_; }
  const KpiSeries& kpi() const { return kpi_; }
  const RbgMap& last_map(int bs) const {
    return last_maps_.at(static_cast<std::size_t>(bs));
  }

  A2cSystem* a2c() { return a2c_ ? a2c_.get() : nullptr; }
  void set_training(bool on) {
    if (a2c_) a2c_->set_training(on);
  }

  struct PacketCounts {
    long created = 0;
    long delivered = 0;
    long dropped = 0;
    long queued = 0;
    long harq_pending = 0;
  };
  PacketCounts packet_counts() const;

  long arrival_cap_hits() const { return arrival_cap_hits_; }

  /// Snapshot used by schedulers; exposed for tests.
  SchedulerInput scheduler_input(int bs) const;

 private:
  void setup();
  void resolve_transmissions(int bs, const RbgMap& map, KpiRecord& rec,
                             std::map<int, long>& served_bits);
  void complete_packet(Packet& p, bool delivered, KpiRecord& rec);

  struct HarqEntry {
    Packet packet;
    long due_tti = 0;
  };

  ScenarioConfig cfg_;
  CqiTable table_;
  std::mt19937_64 rng_;
  long tti_ = 0;
  std::uint64_t next_packet_id_ = 1;
  double extent_m_ = 0;

  std::vector<BsSite> sites_;
  std::vector<UeState> ues_;
  std::vector<std::vector<FlowSpec>> flows_;  // parallel to ues_
  std::vector<HarqEntry> harq_pending_;
  std::vector<std::unique_ptr<Scheduler>> schedulers_;  // one per BS
  std::unique_ptr<A2cSystem> a2c_;
  std::vector<RbgMap> last_maps_;

  KpiSeries kpi_;
  long created_ = 0, delivered_ = 0, dropped_ = 0;
  long arrival_cap_hits_ = 0;
};

}  // namespace rwsim
