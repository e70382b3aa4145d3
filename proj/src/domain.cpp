#include "rwsim/domain.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace rwsim {

const char* to_string(ServiceLabel label) {
  switch (label) {
    case ServiceLabel::Voice: return "Voice";
    case ServiceLabel::IMS: return "IMS";
    case ServiceLabel::Video: return "Video";
    case ServiceLabel::V2X: return "V2X";
  }
  return "?";
}

const char* to_string(ResourceType type) {
  return type == ResourceType::GBR ? "GBR" : "Non-GBR";
}

const std::array<FlowClass, 4>& builtin_flow_classes() {
  static const std::array<FlowClass, 4> table{{
      {1, ResourceType::GBR, 2.0, 100.0, ServiceLabel::Voice},
      {5, ResourceType::NonGBR, 1.0, 100.0, ServiceLabel::IMS},
      {6, ResourceType::NonGBR, 6.0, 300.0, ServiceLabel::Video},
      {75, ResourceType::GBR, 2.5, 20.0, ServiceLabel::V2X},
  }};
  return table;
}

const FlowClass& flow_class(int qci) {
  for (const auto& fc : builtin_flow_classes()) {
    if (fc.qci == qci) return fc;
  }
  throw std::out_of_range("unknown QCI " + std::to_string(qci));
}

double packet_latency_ms(const Packet& p) {
  return p.t_hol_ms + p.t_tx_ms + p.t_harq_ms;
}

bool is_satisfied(const Packet& p) {
  if (p.dropped) return false;
  return p.t_hol_ms < flow_class(p.qci).delay_budget_ms;
}

const char* to_string(SchedulerKind kind) {
  switch (kind) {
    case SchedulerKind::PF: return "pf";
    case SchedulerKind::CQA: return "cqa";
    case SchedulerKind::DA2C: return "da2c";
    case SchedulerKind::CDPAA2C: return "cdpa-a2c";
  }
  return "?";
}

SchedulerKind scheduler_kind_from_string(const std::string& s) {
  if (s == "pf") return SchedulerKind::PF;
  if (s == "cqa") return SchedulerKind::CQA;
  if (s == "da2c" || s == "d-a2c") return SchedulerKind::DA2C;
  if (s == "cdpa-a2c" || s == "cdpaa2c") return SchedulerKind::CDPAA2C;
  throw std::invalid_argument("unknown scheduler '" + s + "'");
}

ScenarioConfig validate_config(ScenarioConfig c) {
  auto fail = [](const std::string& msg) {
    throw std::invalid_argument("config: " + msg);
  };
  if (c.n_bs < 1) fail("n_bs must be >= 1");
  if (c.n_ue < 0) fail("n_ue must be >= 0");
  if (c.mobile_fraction < 0.0 || c.mobile_fraction > 1.0)
    fail("mobile_fraction must lie in [0,1]");
  if (c.rbg_size < 1) fail("rbg_size must be >= 1");
  if (c.n_rb < c.rbg_size) fail("n_rb must form at least one RBG");
  if (c.tti_ms <= 0) fail("tti_ms must be positive");
  if (c.sim_ttis < 0) fail("sim_ttis must be >= 0");
  if (c.max_load_per_ue_bps <= 0) fail("max_load_per_ue_bps must be positive");
  if (c.drop_factor < 1.0) fail("drop_factor must be >= 1");
  if (c.pf_window_ttis < 1.0) fail("pf_window_ttis must be >= 1");
  if (c.cqa_grouping_ms <= 0) fail("cqa_grouping_ms must be positive");
  if (c.a2c.lr_actor <= 0 || c.a2c.lr_critic <= 0)
    fail("learning rates must be positive");
  if (c.a2c.gamma < 0 || c.a2c.gamma >= 1.0) fail("gamma must lie in [0,1)");
  if (c.a2c.candidate_set < 1) fail("candidate_set must be >= 1");
  if (c.a2c.epsilon.explore_ttis < 0) fail("explore_ttis must be >= 0");
  if (c.a2c.hidden_layers.empty()) fail("hidden_layers must be non-empty");
  if (c.channel.exponent <= 0) fail("path loss exponent must be positive");
  if (c.channel.bler_target < 0 || c.channel.bler_target > 1.0)
    fail("bler_target must lie in [0,1]");
  if (c.channel.harq_rtt_ttis < 1) fail("harq_rtt_ttis must be >= 1");
  if (c.channel.max_harq_retx < 0) fail("max_harq_retx must be >= 0");
  if (c.traffic.offered_load_fraction <= 0)
    fail("offered_load_fraction must be positive");
  if (c.traffic.arrival_cap_per_bs_tti < 1)
    fail("arrival_cap_per_bs_tti must be >= 1");
  return c;
}

namespace {

template <typename T>
void get_to_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  ScenarioConfig c;
  get_to_if(j, "n_bs", c.n_bs);
  get_to_if(j, "n_ue", c.n_ue);
  get_to_if(j, "mobile_fraction", c.mobile_fraction);
  get_to_if(j, "n_rb", c.n_rb);
  get_to_if(j, "rbg_size", c.rbg_size);
  get_to_if(j, "tti_ms", c.tti_ms);
  get_to_if(j, "max_load_per_ue_bps", c.max_load_per_ue_bps);
  get_to_if(j, "sim_ttis", c.sim_ttis);
  get_to_if(j, "seed", c.seed);
  get_to_if(j, "drop_factor", c.drop_factor);
  get_to_if(j, "pf_window_ttis", c.pf_window_ttis);
  get_to_if(j, "cqa_grouping_ms", c.cqa_grouping_ms);
  if (j.contains("scheduler"))
    c.scheduler = scheduler_kind_from_string(j.at("scheduler").get<std::string>());
  if (j.contains("traffic")) {
    const auto& t = j.at("traffic");
    get_to_if(t, "voice_packet_bits", c.traffic.voice_packet_bits);
    get_to_if(t, "ims_packet_bits", c.traffic.ims_packet_bits);
    get_to_if(t, "video_packet_bits", c.traffic.video_packet_bits);
    get_to_if(t, "v2x_packet_bits", c.traffic.v2x_packet_bits);
    get_to_if(t, "offered_load_fraction", c.traffic.offered_load_fraction);
    get_to_if(t, "arrival_cap_per_bs_tti", c.traffic.arrival_cap_per_bs_tti);
  }
  if (j.contains("channel")) {
    const auto& ch = j.at("channel");
    get_to_if(ch, "pl0_db", c.channel.pl0_db);
    get_to_if(ch, "ref_distance_m", c.channel.ref_distance_m);
    get_to_if(ch, "exponent", c.channel.exponent);
    get_to_if(ch, "tx_power_dbm", c.channel.tx_power_dbm);
    get_to_if(ch, "noise_density_dbm_hz", c.channel.noise_density_dbm_hz);
    get_to_if(ch, "bandwidth_per_rb_hz", c.channel.bandwidth_per_rb_hz);
    get_to_if(ch, "shadowing_sigma_db", c.channel.shadowing_sigma_db);
    get_to_if(ch, "bler_target", c.channel.bler_target);
    get_to_if(ch, "harq_rtt_ttis", c.channel.harq_rtt_ttis);
    get_to_if(ch, "max_harq_retx", c.channel.max_harq_retx);
    get_to_if(ch, "bs_spacing_m", c.channel.bs_spacing_m);
    get_to_if(ch, "vehicle_speed_mps", c.channel.vehicle_speed_mps);
    get_to_if(ch, "handover_check_period_ttis",
              c.channel.handover_check_period_ttis);
    get_to_if(ch, "cqi_table_file", c.channel.cqi_table_file);
  }
  // Reward weights default per scheduler preset unless given explicitly.
  c.a2c.tau = (c.scheduler == SchedulerKind::DA2C) ? 0.0 : 5.0;
  if (j.contains("a2c")) {
    const auto& a = j.at("a2c");
    get_to_if(a, "gamma", c.a2c.gamma);
    get_to_if(a, "lr_actor", c.a2c.lr_actor);
    get_to_if(a, "lr_critic", c.a2c.lr_critic);
    get_to_if(a, "tau", c.a2c.tau);
    get_to_if(a, "lambda", c.a2c.lambda);
    get_to_if(a, "candidate_set", c.a2c.candidate_set);
    get_to_if(a, "urllc_threshold_ms", c.a2c.urllc_threshold_ms);
    get_to_if(a, "hidden_layers", c.a2c.hidden_layers);
    get_to_if(a, "epsilon0", c.a2c.epsilon.epsilon0);
    get_to_if(a, "epsilon_min", c.a2c.epsilon.epsilon_min);
    get_to_if(a, "explore_ttis", c.a2c.epsilon.explore_ttis);
  }
  return validate_config(c);
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace rwsim
