#include "rwsim/sched.hpp"

#include <algorithm>
#include <cmath>

namespace rwsim {

RbgMap PfScheduler::allocate(const SchedulerInput& input, std::mt19937_64&) {
  RbgMap map(input.tti, input.n_rbg);
  if (input.queues.empty()) return map;

  // Remaining backlog per UE; PF grants to UEs, the oldest flow drains first.
  std::map<int, long> backlog;
  for (const auto& q : input.queues) backlog[q.ue_id] += q.backlog_bits;

  for (int rbg = 0; rbg < input.n_rbg; ++rbg) {
    double best_metric = -1;
    const QueueView* best = nullptr;
    for (const auto& q : input.queues) {
      if (backlog[q.ue_id] <= 0) continue;
      const long rate = tb_bits(q.cqi, 1, input.rbg_size, *input.table);
      if (rate <= 0) continue;
      const double metric = static_cast<double>(rate) /
                            std::max(average_throughput(q.ue_id), 1.0);
      if (metric > best_metric ||
          (metric == best_metric && best && q.ue_id < best->ue_id)) {
        best_metric = metric;
        best = &q;
      }
    }
    if (!best) break;
    // Within the winning UE, point the grant at its most-delayed flow.
    const QueueView* target = best;
    for (const auto& q : input.queues) {
      if (q.ue_id == best->ue_id && q.hol_ms > target->hol_ms) target = &q;
    }
    map.assignments[rbg] = std::make_pair(target->ue_id, target->qci);
    backlog[target->ue_id] -=
        tb_bits(target->cqi, 1, input.rbg_size, *input.table);
  }
  return map;
}

void PfScheduler::tti_complete(const std::map<int, long>& served_bits_per_ue) {
  const double w = 1.0 / window_;
  for (auto& [ue, avg] : r_avg_) {
    const auto it = served_bits_per_ue.find(ue);
    const double served =
        it == served_bits_per_ue.end() ? 0.0 : static_cast<double>(it->second);
    avg = std::max((1.0 - w) * avg + w * served, 1.0);
  }
  for (const auto& [ue, served] : served_bits_per_ue) {
    if (!r_avg_.count(ue))
      r_avg_[ue] = std::max(w * static_cast<double>(served), 1.0);
  }
}

double PfScheduler::average_throughput(int ue_id) const {
  const auto it = r_avg_.find(ue_id);
  return it == r_avg_.end() ? 1.0 : it->second;
}

std::vector<std::size_t> CqaScheduler::rank(const SchedulerInput& input) const {
  std::vector<std::size_t> order(input.queues.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  auto group_of = [&](const QueueView& q) {
    return static_cast<long>(std::floor(q.hol_ms / grouping_ms_));
  };
  auto metric_of = [&](const QueueView& q) {
    const double weight = 1.0 / q.priority;
    const double urgency = q.hol_ms / q.delay_budget_ms;
    return weight * urgency *
           static_cast<double>(tb_bits(q.cqi, 1, input.rbg_size, *input.table));
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& qa = input.queues[a];
    const auto& qb = input.queues[b];
    const long ga = group_of(qa), gb = group_of(qb);
    if (ga != gb) return ga > gb;
    const double ma = metric_of(qa), mb = metric_of(qb);
    if (ma != mb) return ma > mb;
    if (qa.priority != qb.priority) return qa.priority < qb.priority;
    return qa.ue_id < qb.ue_id;
  });
  return order;
}

RbgMap CqaScheduler::allocate(const SchedulerInput& input, std::mt19937_64&) {
  RbgMap map(input.tti, input.n_rbg);
  if (input.queues.empty()) return map;
  const auto order = rank(input);
  int rbg = 0;
  for (std::size_t idx : order) {
    const auto& q = input.queues[idx];
    const long per_rbg = tb_bits(q.cqi, 1, input.rbg_size, *input.table);
    if (per_rbg <= 0) continue;
    long remaining = q.backlog_bits;
    while (remaining > 0 && rbg < input.n_rbg) {
      map.assignments[rbg++] = std::make_pair(q.ue_id, q.qci);
      remaining -= per_rbg;
    }
    if (rbg >= input.n_rbg) break;
  }
  return map;
}

}  // namespace rwsim
