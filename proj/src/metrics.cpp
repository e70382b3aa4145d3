#include "rwsim/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace rwsim {

int class_index(int qci) {
  switch (qci) {
    case 1: return 0;   // Voice
    case 5: return 1;   // IMS
    case 6: return 2;   // Video
    case 75: return 3;  // V2X
  }
  throw std::out_of_range("unknown QCI " + std::to_string(qci));
}

int qci_of_class_index(int idx) {
  static const int qcis[kNumClasses] = {1, 5, 6, 75};
  return qcis[idx];
}

void KpiSeries::append(const KpiRecord& rec) {
  records.push_back(rec);
  for (int c = 0; c < kNumClasses; ++c) {
    total_delivered[c] += rec.delivered[c];
    total_dropped[c] += rec.dropped[c];
    total_satisfied[c] += rec.satisfied[c];
    total_hol_ms[c] += rec.hol_sum_ms[c];
  }
}

std::optional<double> KpiSeries::delivery_ratio(int c) const {
  const long completed = total_delivered[c] + total_dropped[c];
  if (completed == 0) return std::nullopt;
  return static_cast<double>(total_satisfied[c]) /
         static_cast<double>(completed);
}

std::optional<double> KpiSeries::mean_hol_ms(int c) const {
  const long completed = total_delivered[c] + total_dropped[c];
  if (completed == 0) return std::nullopt;
  return total_hol_ms[c] / static_cast<double>(completed);
}

std::vector<double> KpiSeries::reward_per_tti() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records)
    out.push_back(std::accumulate(r.reward_per_bs.begin(),
                                  r.reward_per_bs.end(), 0.0));
  return out;
}

std::vector<double> reward_curve(const std::vector<double>& reward_per_tti,
                                 int window) {
  if (window < 1) throw std::invalid_argument("reward_curve: window must be >= 1");
  std::vector<double> out(reward_per_tti.size());
  double acc = 0;
  for (std::size_t i = 0; i < reward_per_tti.size(); ++i) {
    acc += reward_per_tti[i];
    if (i >= static_cast<std::size_t>(window))
      acc -= reward_per_tti[i - static_cast<std::size_t>(window)];
    const auto n = std::min<std::size_t>(i + 1, static_cast<std::size_t>(window));
    out[i] = acc / static_cast<double>(n);
  }
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

void export_csv(const KpiSeries& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write CSV: " + path);
  out << "tti,class,delivered,dropped,satisfied,mean_hol_ms,reward\n";
  for (const auto& rec : series.records) {
    const double reward = std::accumulate(rec.reward_per_bs.begin(),
                                          rec.reward_per_bs.end(), 0.0);
    for (int c = 0; c < kNumClasses; ++c) {
      const long completed = rec.delivered[c] + rec.dropped[c];
      const double mean_hol =
          completed > 0 ? rec.hol_sum_ms[c] / static_cast<double>(completed)
                        : 0.0;
      out << rec.tti << ','
          << to_string(flow_class(qci_of_class_index(c)).label) << ','
          << rec.delivered[c] << ',' << rec.dropped[c] << ','
          << rec.satisfied[c] << ',' << fmt(mean_hol) << ',' << fmt(reward)
          << '\n';
    }
  }
  if (!out) throw std::runtime_error("CSV write failed: " + path);
}

std::string summary_json(const KpiSeries& series, const ScenarioConfig& cfg) {
  nlohmann::json j;
  for (int c = 0; c < kNumClasses; ++c) {
    const auto label = to_string(flow_class(qci_of_class_index(c)).label);
    nlohmann::json cls;
    cls["delivered"] = series.total_delivered[c];
    cls["dropped"] = series.total_dropped[c];
    cls["satisfied"] = series.total_satisfied[c];
    if (auto ratio = series.delivery_ratio(c))
      cls["delivery_ratio"] = *ratio;
    else
      cls["delivery_ratio"] = nullptr;
    if (auto hol = series.mean_hol_ms(c))
      cls["mean_hol_ms"] = *hol;
    else
      cls["mean_hol_ms"] = nullptr;
    j["classes"][label] = cls;
  }
  j["config"] = {
      {"n_bs", cfg.n_bs},
      {"n_ue", cfg.n_ue},
      {"mobile_fraction", cfg.mobile_fraction},
      {"n_rb", cfg.n_rb},
      {"rbg_size", cfg.rbg_size},
      {"sim_ttis", cfg.sim_ttis},
      {"max_load_per_ue_bps", cfg.max_load_per_ue_bps},
      {"scheduler", to_string(cfg.scheduler)},
      {"offered_load_fraction", cfg.traffic.offered_load_fraction},
  };
  j["seed"] = cfg.seed;
  j["ttis"] = series.records.size();
  return j.dump(2) + "\n";
}

void export_json(const KpiSeries& series, const ScenarioConfig& cfg,
                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write JSON: " + path);
  out << summary_json(series, cfg);
  if (!out) throw std::runtime_error("JSON write failed: " + path);
}

}  // namespace rwsim
