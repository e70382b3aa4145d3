#include "rwsim/traffic.hpp"

#include <algorithm>

namespace rwsim {

double rate_for_load(long load_bps, long packet_bits, double tti_ms) {
  const double ttis_per_second = 1000.0 / tti_ms;
  return static_cast<double>(load_bps) /
         (static_cast<double>(packet_bits) * ttis_per_second);
}

namespace {

long packet_bits_for(ServiceLabel label, const TrafficConfig& t) {
  switch (label) {
    case ServiceLabel::Voice: return t.voice_packet_bits;
    case ServiceLabel::IMS: return t.ims_packet_bits;
    case ServiceLabel::Video: return t.video_packet_bits;
    case ServiceLabel::V2X: return t.v2x_packet_bits;
  }
  return 0;
}

int qci_for(ServiceLabel label) {
  for (const auto& fc : builtin_flow_classes())
    if (fc.label == label) return fc.qci;
  return 0;
}

}  // namespace

std::vector<std::vector<FlowSpec>> assign_flows(
    const std::vector<int>& ue_ids, const std::vector<int>& mobile_ids,
    const ScenarioConfig& cfg, std::mt19937_64& rng) {
  const ServiceLabel fixed_mix[3] = {ServiceLabel::Voice, ServiceLabel::Video,
                                     ServiceLabel::IMS};
  std::uniform_int_distribution<int> pick(0, 2);
  const double load_bps = static_cast<double>(cfg.max_load_per_ue_bps) *
                          cfg.traffic.offered_load_fraction;

  std::vector<std::vector<FlowSpec>> out(ue_ids.size());
  for (std::size_t i = 0; i < ue_ids.size(); ++i) {
    const bool mobile = std::find(mobile_ids.begin(), mobile_ids.end(),
                                  ue_ids[i]) != mobile_ids.end();
    const ServiceLabel label = fixed_mix[pick(rng)];
    // Mobile UEs carry a V2X stream on top of their base class; the load
    // cap applies to the UE as a whole, so the two flows split it evenly.
    const double share = mobile ? 0.5 : 1.0;
    const long bits = packet_bits_for(label, cfg.traffic);
    out[i].push_back({qci_for(label), bits,
                      rate_for_load(static_cast<long>(load_bps * share), bits,
                                    cfg.tti_ms)});
    if (mobile) {
      const long v2x_bits = cfg.traffic.v2x_packet_bits;
      out[i].push_back({qci_for(ServiceLabel::V2X), v2x_bits,
                        rate_for_load(static_cast<long>(load_bps * share),
                                      v2x_bits, cfg.tti_ms)});
    }
  }
  return out;
}

int sample_arrivals(const FlowSpec& spec, std::mt19937_64& rng) {
  if (spec.arrival_rate <= 0) return 0;
  std::poisson_distribution<int> dist(spec.arrival_rate);
  return dist(rng);
}

}  // namespace rwsim
