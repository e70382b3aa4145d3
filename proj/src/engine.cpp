#include "rwsim/engine.hpp"

#include <algorithm>
#include <cmath>

namespace rwsim {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Simulation::Simulation(const ScenarioConfig& cfg)
    : cfg_(validate_config(cfg)), rng_(cfg.seed) {
  setup();
  if (cfg_.scheduler == SchedulerKind::DA2C ||
      cfg_.scheduler == SchedulerKind::CDPAA2C) {
    a2c_ = std::make_unique<A2cSystem>(cfg_, rng_);
    for (int b = 0; b < cfg_.n_bs; ++b)
      schedulers_.push_back(std::make_unique<A2cBsScheduler>(a2c_.get(), b));
  }
}

Simulation::Simulation(const ScenarioConfig& cfg, A2cSystem pretrained)
    : cfg_(validate_config(cfg)), rng_(cfg.seed) {
  setup();
  a2c_ = std::make_unique<A2cSystem>(std::move(pretrained));
  a2c_->set_training(false);
  for (int b = 0; b < cfg_.n_bs; ++b)
    schedulers_.push_back(std::make_unique<A2cBsScheduler>(a2c_.get(), b));
}

void Simulation::setup() {
  table_ = cfg_.channel.cqi_table_file.empty()
               ? CqiTable::lte_default()
               : CqiTable::load(cfg_.channel.cqi_table_file);

  // Sites on a circle whose chord equals the configured spacing.
  extent_m_ = 1.5 * cfg_.channel.bs_spacing_m;
  const Vec2 center(extent_m_ / 2, extent_m_ / 2);
  const double radius =
      cfg_.n_bs > 1
          ? cfg_.channel.bs_spacing_m / (2.0 * std::sin(kPi / cfg_.n_bs))
          : 0.0;
  for (int b = 0; b < cfg_.n_bs; ++b) {
    const double angle = 2.0 * kPi * b / cfg_.n_bs;
    sites_.push_back({center + radius * Vec2(std::cos(angle), std::sin(angle)),
                      cfg_.channel.tx_power_dbm});
  }

  std::uniform_real_distribution<double> upos(0.0, extent_m_);
  std::normal_distribution<double> shadow(0.0, cfg_.channel.shadowing_sigma_db);
  std::uniform_real_distribution<double> uangle(0.0, 2.0 * kPi);
  const int n_mobile =
      static_cast<int>(std::lround(cfg_.mobile_fraction * cfg_.n_ue));

  std::vector<int> ue_ids, mobile_ids;
  for (int u = 0; u < cfg_.n_ue; ++u) {
    UeState ue;
    ue.ue_id = u;
    ue.position = Vec2(upos(rng_), upos(rng_));
    ue.mobile = u < n_mobile;
    if (ue.mobile) {
      const double a = uangle(rng_);
      ue.velocity =
          cfg_.channel.vehicle_speed_mps * Vec2(std::cos(a), std::sin(a));
    }
    ue.shadowing_db =
        cfg_.channel.shadowing_sigma_db > 0 ? shadow(rng_) : 0.0;
    ue.serving_bs = strongest_site(ue.position, sites_, cfg_.channel);
    ue.cqi = compute_cqi(ue, sites_, cfg_.channel, table_);
    ue_ids.push_back(u);
    if (ue.mobile) mobile_ids.push_back(u);
    ues_.push_back(std::move(ue));
  }
  flows_ = assign_flows(ue_ids, mobile_ids, cfg_, rng_);

  if (cfg_.scheduler == SchedulerKind::PF) {
    for (int b = 0; b < cfg_.n_bs; ++b)
      schedulers_.push_back(std::make_unique<PfScheduler>(cfg_.pf_window_ttis));
  } else if (cfg_.scheduler == SchedulerKind::CQA) {
    for (int b = 0; b < cfg_.n_bs; ++b)
      schedulers_.push_back(std::make_unique<CqaScheduler>(cfg_.cqa_grouping_ms));
  }
  last_maps_.assign(static_cast<std::size_t>(cfg_.n_bs),
                    RbgMap(0, cfg_.n_rbg()));
}

SchedulerInput Simulation::scheduler_input(int bs) const {
  SchedulerInput input;
  input.tti = tti_;
  input.n_rbg = cfg_.n_rbg();
  input.rbg_size = cfg_.rbg_size;
  input.table = &table_;
  double cqi_sum = 0;
  int n_attached = 0;
  for (const auto& ue : ues_) {
    if (ue.serving_bs != bs) continue;
    cqi_sum += ue.cqi;
    ++n_attached;
    for (const auto& [qci, queue] : ue.queues) {
      if (queue.empty()) continue;
      QueueView v;
      v.ue_id = ue.ue_id;
      v.qci = qci;
      v.cqi = ue.cqi;
      v.hol_ms = queue.front().t_hol_ms;
      v.backlog_bits = 0;
      for (const auto& p : queue) v.backlog_bits += p.remaining_bits;
      const auto& fc = flow_class(qci);
      v.delay_budget_ms = fc.delay_budget_ms;
      v.priority = fc.priority;
      v.label = fc.label;
      input.queues.push_back(v);
    }
  }
  input.mean_cqi = n_attached > 0 ? cqi_sum / n_attached : 0.0;
  return input;
}

void Simulation::complete_packet(Packet& p, bool delivered, KpiRecord& rec) {
  p.dropped = !delivered;
  const int c = class_index(p.qci);
  if (delivered) {
    ++rec.delivered[c];
    ++delivered_;
    if (is_satisfied(p)) ++rec.satisfied[c];
  } else {
    ++rec.dropped[c];
    ++dropped_;
  }
  rec.hol_sum_ms[c] += p.t_hol_ms;
}

void Simulation::resolve_transmissions(int bs, const RbgMap& map,
                                       KpiRecord& rec,
                                       std::map<int, long>& served_bits) {
  // Total grant per (ue, qci) this TTI.
  std::map<std::pair<int, int>, int> rbg_count;
  for (const auto& a : map.assignments)
    if (a) ++rbg_count[*a];

  for (const auto& [key, n_rbg] : rbg_count) {
    const auto [ue_id, qci] = key;
    auto& ue = ues_[static_cast<std::size_t>(ue_id)];
    auto it = ue.queues.find(qci);
    if (it == ue.queues.end()) continue;
    auto& queue = it->second;
    long bits = tb_bits(ue.cqi, n_rbg, cfg_.rbg_size, table_);
    while (bits > 0 && !queue.empty()) {
      Packet& p = queue.front();
      if (!p.started_tx) p.started_tx = true;  // t_hol frozen from here on
      const long send = std::min(p.remaining_bits, bits);
      p.remaining_bits -= send;
      bits -= send;
      p.t_tx_ms += cfg_.tti_ms;  // one air attempt this TTI
      served_bits[ue_id] += send;
      if (p.remaining_bits > 0) break;  // partial; stays head-of-line
      const auto outcome = transmission_outcome(ue.cqi, rng_, cfg_.channel);
      if (outcome == TxOutcome::Delivered) {
        complete_packet(p, true, rec);
        queue.pop_front();
      } else {
        ++p.retx_count;
        p.t_harq_ms += cfg_.channel.harq_rtt_ttis * cfg_.tti_ms;
        if (p.retx_count >= cfg_.channel.max_harq_retx) {
          complete_packet(p, false, rec);
          queue.pop_front();
        } else {
          Packet pending = p;
          pending.remaining_bits = pending.size_bits;
          queue.pop_front();
          harq_pending_.push_back(
              {std::move(pending), tti_ + cfg_.channel.harq_rtt_ttis});
        }
      }
    }
  }
  (void)bs;
}

void Simulation::step() {
  KpiRecord rec;
  rec.tti = tti_;
  rec.reward_per_bs.assign(static_cast<std::size_t>(cfg_.n_bs), 0.0);

  // 1. mobility and CQI feedback
  for (auto& ue : ues_) {
    advance_mobility(ue, cfg_.tti_ms, extent_m_);
    if (ue.mobile && cfg_.channel.handover_check_period_ttis > 0 &&
        tti_ % cfg_.channel.handover_check_period_ttis == 0) {
      ue.serving_bs = strongest_site(ue.position, sites_, cfg_.channel);
    }
    ue.cqi = compute_cqi(ue, sites_, cfg_.channel, table_);
  }

  // 2. traffic arrivals, capped per BS per TTI
  std::vector<int> arrivals_per_bs(static_cast<std::size_t>(cfg_.n_bs), 0);
  for (std::size_t u = 0; u < ues_.size(); ++u) {
    auto& ue = ues_[u];
    for (const auto& spec : flows_[u]) {
      const int n = sample_arrivals(spec, rng_);
      for (int k = 0; k < n; ++k) {
        auto& count = arrivals_per_bs[static_cast<std::size_t>(ue.serving_bs)];
        if (count >= cfg_.traffic.arrival_cap_per_bs_tti) {
          ++arrival_cap_hits_;
          continue;
        }
        ++count;
        Packet p;
        p.id = next_packet_id_++;
        p.qci = spec.qci;
        p.ue_id = ue.ue_id;
        p.size_bits = spec.packet_size_bits;
        p.remaining_bits = spec.packet_size_bits;
        p.arrival_tti = tti_;
        ue.queues[spec.qci].push_back(p);
        ++created_;
      }
    }
  }

  // 3. HARQ-due packets rejoin their queue ahead of new data
  for (auto it = harq_pending_.begin(); it != harq_pending_.end();) {
    if (it->due_tti <= tti_) {
      auto& ue = ues_[static_cast<std::size_t>(it->packet.ue_id)];
      ue.queues[it->packet.qci].push_front(it->packet);
      it = harq_pending_.erase(it);
    } else {
      ++it;
    }
  }

  // 4. age HOL delays; drop queued packets past drop_factor x budget
  for (auto& ue : ues_) {
    for (auto& [qci, queue] : ue.queues) {
      const double budget = flow_class(qci).delay_budget_ms;
      for (auto it = queue.begin(); it != queue.end();) {
        if (!it->started_tx)
          it->t_hol_ms = static_cast<double>(tti_ - it->arrival_tti) * cfg_.tti_ms;
        if (!it->started_tx && it->t_hol_ms >= cfg_.drop_factor * budget) {
          complete_packet(*it, false, rec);
          it = queue.erase(it);
        } else {
          ++it;
        }
      }
    }
  }

  // 5. schedule and transmit per BS
  for (int b = 0; b < cfg_.n_bs; ++b) {
    const SchedulerInput input = scheduler_input(b);
    RbgMap map(tti_, cfg_.n_rbg());
    if (!input.queues.empty())
      map = schedulers_[static_cast<std::size_t>(b)]->allocate(input, rng_);
    std::map<int, long> served;
    resolve_transmissions(b, map, rec, served);
    schedulers_[static_cast<std::size_t>(b)]->tti_complete(served);
    if (a2c_) rec.reward_per_bs[static_cast<std::size_t>(b)] = a2c_->take_reward(b);
    last_maps_[static_cast<std::size_t>(b)] = std::move(map);
  }

  // 6. record
  kpi_.append(rec);
  ++tti_;
}

KpiSeries Simulation::run() {
  for (long t = 0; t < cfg_.sim_ttis; ++t) step();
  return kpi_;
}

Simulation::PacketCounts Simulation::packet_counts() const {
  PacketCounts c;
  c.created = created_;
  c.delivered = delivered_;
  c.dropped = dropped_;
  for (const auto& ue : ues_)
    for (const auto& [qci, queue] : ue.queues)
      c.queued += static_cast<long>(queue.size());
  c.harq_pending = static_cast<long>(harq_pending_.size());
  return c;
}

}  // namespace rwsim
