#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "rwsim/domain.hpp"

namespace rwsim {

constexpr int kNumClasses = 4;  // Voice, IMS, Video, V2X

int class_index(int qci);
int qci_of_class_index(int idx);

/// Per-TTI, per-class counters plus the per-BS reward sums of learning runs.
struct KpiRecord {
  long tti = 0;
  std::array<long, kNumClasses> delivered{};
  std::array<long, kNumClasses> dropped{};
  std::array<long, kNumClasses> satisfied{};
  std::array<double, kNumClasses> hol_sum_ms{};  // over completed packets
  std::vector<double> reward_per_bs;
};

/// Whole-run trace plus cumulative totals.
struct KpiSeries {
  std::vector<KpiRecord> records;

  std::array<long, kNumClasses> total_delivered{};
  std::array<long, kNumClasses> total_dropped{};
  std::array<long, kNumClasses> total_satisfied{};
  std::array<double, kNumClasses> total_hol_ms{};

  void append(const KpiRecord& rec);

  /// satisfied / (delivered + dropped); empty when nothing completed.
  std::optional<double> delivery_ratio(int class_idx) const;

  /// Mean head-of-line delay over completed packets.
  std::optional<double> mean_hol_ms(int class_idx) const;

  /// Per-TTI reward summed over BSs.
  std::vector<double> reward_per_tti() const;
};

/// Sliding-window running mean; the first W-1 entries average the prefix.
std::vector<double> reward_curve(const std::vector<double>& reward_per_tti,
                                 int window);

/// One CSV row per (TTI, class): tti,class,delivered,dropped,satisfied,
/// mean_hol_ms,reward.
void export_csv(const KpiSeries& series, const std::string& path);

/// Summary JSON: per-class delivery ratio and mean HOL, config echo, seed.
void export_json(const KpiSeries& series, const ScenarioConfig& cfg,
                 const std::string& path);

std::string summary_json(const KpiSeries& series, const ScenarioConfig& cfg);

}  // namespace rwsim
