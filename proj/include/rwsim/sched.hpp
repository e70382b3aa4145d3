#pragma once

#include <map>
#include <random>
#include <vector>

#include "rwsim/channel.hpp"
#include "rwsim/domain.hpp"

namespace rwsim {

/// One backlogged (UE, flow) queue as seen by a scheduler.
struct QueueView {
  int ue_id = 0;
  int qci = 0;
  int cqi = 0;
  double hol_ms = 0;        // head packet wait
  long backlog_bits = 0;    // remaining bits across the queue
  double delay_budget_ms = 0;
  double priority = 0;      // QCI priority, lower is more important
  ServiceLabel label = ServiceLabel::Voice;
};

/// Per-BS snapshot handed to a scheduler each TTI. Only non-empty queues
/// appear.
struct SchedulerInput {
  long tti = 0;
  int n_rbg = 0;
  int rbg_size = 0;
  double mean_cqi = 0;  // over the BS's attached UEs
  std::vector<QueueView> queues;
  const CqiTable* table = nullptr;
};

class Scheduler {
 public:
  virtual ~Scheduler() = default;

  /// Fill an RbgMap for this TTI. Contract: at most one assignment per RBG,
  /// and every assignment references a listed queue.
  virtual RbgMap allocate(const SchedulerInput& input, std::mt19937_64& rng) = 0;

  /// Reported after transmissions resolve: bits actually served per UE.
  virtual void tti_complete(const std::map<int, long>& served_bits_per_ue) {
    (void)served_bits_per_ue;
  }
};

/// Proportional Fair: per RBG, serve the backlogged UE maximizing
/// instantaneous rate over its throughput average.
class PfScheduler : public Scheduler {
 public:
  explicit PfScheduler(double window_ttis) : window_(window_ttis) {}

  RbgMap allocate(const SchedulerInput& input, std::mt19937_64& rng) override;
  void tti_complete(const std::map<int, long>& served_bits_per_ue) override;

  double average_throughput(int ue_id) const;

 private:
  double window_;
  std::map<int, double> r_avg_;  // bits per TTI, floored at 1
};

/// Channel and QoS Aware: flows grouped by head-of-line urgency, ranked by
/// priority weight x normalized delay x achievable rate.
class CqaScheduler : public Scheduler {
 public:
  explicit CqaScheduler(double grouping_ms) : grouping_ms_(grouping_ms) {}

  RbgMap allocate(const SchedulerInput& input, std::mt19937_64& rng) override;

  /// Rank order used by allocate, exposed for property tests.
  std::vector<std::size_t> rank(const SchedulerInput& input) const;

 private:
  double grouping_ms_;
};

}  // namespace rwsim
