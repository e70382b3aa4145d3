#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace rwsim {

using Vec2 = Eigen::Vector2d;

enum class ResourceType { GBR, NonGBR };
enum class ServiceLabel { Voice, IMS, Video, V2X };

const char* to_string(ServiceLabel label);
const char* to_string(ResourceType type);

/// One QCI row: priority and delay budget for a traffic type.
struct FlowClass {
  int qci;
  ResourceType resource_type;
  double priority;
  double delay_budget_ms;
  ServiceLabel label;
};

/// The four built-in QCI classes (Voice, IMS, Video, V2X).
const std::array<FlowClass, 4>& builtin_flow_classes();

/// Lookup by QCI. Throws std::out_of_range for unknown QCIs.
const FlowClass& flow_class(int qci);

/// A MAC-level downlink unit queued for one UE.
struct Packet {
  std::uint64_t id = 0;
  int qci = 0;
  int ue_id = 0;
  long size_bits = 0;
  long remaining_bits = 0;  // not yet transmitted over the air
  long arrival_tti = 0;
  double t_hol_ms = 0;   // scheduling wait (head-of-line delay)
  double t_tx_ms = 0;    // air-interface time, 1 ms per transmit attempt
  double t_harq_ms = 0;  // accumulated retransmission round trips
  int retx_count = 0;
  bool started_tx = false;  // first grant seen; t_hol_ms is frozen
  bool dropped = false;
};

/// Total latency: scheduling wait + air time + HARQ round trips.
double packet_latency_ms(const Packet& p);

/// A completed packet counts as satisfied when its head-of-line delay is
/// strictly below the class delay budget. Dropped packets never satisfy.
bool is_satisfied(const Packet& p);

struct UeState {
  int ue_id = 0;
  Vec2 position{0, 0};
  Vec2 velocity{0, 0};
  bool mobile = false;
  int serving_bs = 0;
  int cqi = 0;                 // wideband CQI in [0,15]
  double shadowing_db = 0;     // static log-normal offset, drawn at setup
  std::map<int, std::deque<Packet>> queues;  // qci -> FIFO
};

/// Per-BS, per-TTI allocation of resource block groups.
struct RbgMap {
  long tti = 0;
  int n_rbg = 0;
  // assignment of each RBG: (ue_id, qci), or empty for idle
  std::vector<std::optional<std::pair<int, int>>> assignments;

  explicit RbgMap(long tti_ = 0, int n_rbg_ = 0)
      : tti(tti_), n_rbg(n_rbg_), assignments(n_rbg_) {}

  int assigned_count() const {
    int n = 0;
    for (const auto& a : assignments) n += a.has_value() ? 1 : 0;
    return n;
  }
};

enum class SchedulerKind { PF, CQA, DA2C, CDPAA2C };

const char* to_string(SchedulerKind kind);
SchedulerKind scheduler_kind_from_string(const std::string& s);

struct EpsilonSchedule {
  double epsilon0 = 1.0;
  double epsilon_min = 0.05;
  long explore_ttis = 3700;
};

struct ChannelConfig {
  // 128.1 dB @ 1 km with exponent 3.5, re-anchored at a 10 m reference so
  // the min-distance clamp stays well inside the cell.
  double pl0_db = 58.1;
  double ref_distance_m = 10.0;
  double exponent = 3.5;
  double tx_power_dbm = 46.0;
  double noise_density_dbm_hz = -174.0;
  double bandwidth_per_rb_hz = 180000.0;
  double shadowing_sigma_db = 4.0;
  double bler_target = 0.1;
  int harq_rtt_ttis = 8;
  int max_harq_retx = 3;
  double bs_spacing_m = 500.0;
  double vehicle_speed_mps = 14.0;
  long handover_check_period_ttis = 100;
  std::string cqi_table_file;  // empty -> built-in LTE table
};

struct A2cConfig {
  double gamma = 0.9;
  double lr_actor = 0.01;
  double lr_critic = 0.05;
  double tau = 5.0;    // URLLC weight; 0 for D-A2C
  double lambda = 5.0; // budget-satisfaction weight
  int candidate_set = 50;          // M: queues considered per decision
  double urllc_threshold_ms = 20.0;
  std::vector<int> hidden_layers{256, 256, 256};
  EpsilonSchedule epsilon;
};

struct TrafficConfig {
  // Per-class packet sizes in bits; rates derive from the per-UE load cap.
  long voice_packet_bits = 800;
  long ims_packet_bits = 800;
  long video_packet_bits = 8000;
  long v2x_packet_bits = 2400;
  double offered_load_fraction = 1.0;  // of max_load_per_ue
  int arrival_cap_per_bs_tti = 50;
};

struct ScenarioConfig {
  int n_bs = 3;
  int n_ue = 30;
  double mobile_fraction = 0.0;
  int n_rb = 24;
  int rbg_size = 2;
  double tti_ms = 1.0;
  long max_load_per_ue_bps = 256000;
  long sim_ttis = 5000;
  std::uint64_t seed = 1;
  SchedulerKind scheduler = SchedulerKind::PF;
  double drop_factor = 2.0;  // drop queued packets past drop_factor * budget
  double pf_window_ttis = 100.0;
  double cqa_grouping_ms = 10.0;
  TrafficConfig traffic;
  ChannelConfig channel;
  A2cConfig a2c;

  int n_rbg() const { return n_rb / rbg_size; }
};

/// Fill defaults, check ranges. Throws std::invalid_argument on violations.
ScenarioConfig validate_config(ScenarioConfig c);

/// Load a scenario from a JSON file (schema in docs/config.md) and validate.
ScenarioConfig load_config(const std::string& path);

/// Parse a scenario from a JSON string (exposed for tests).
ScenarioConfig parse_config(const std::string& json_text);

}  // namespace rwsim
