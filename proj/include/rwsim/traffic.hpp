#pragma once

#include <random>
#include <vector>

#include "rwsim/domain.hpp"

namespace rwsim {

/// One traffic stream attached to a UE.
struct FlowSpec {
  int qci = 0;
  long packet_size_bits = 0;
  double arrival_rate = 0;  // mean packets per TTI
};

/// Poisson arrival rate that fills `load_bps` with packets of `packet_bits`.
double rate_for_load(long load_bps, long packet_bits, double tti_ms);

/// Assign one of {Voice, Video, IMS} uniformly at random to every UE;
/// mobile UEs additionally carry a V2X flow. Rates honor the per-UE cap.
std::vector<std::vector<FlowSpec>> assign_flows(
    const std::vector<int>& ue_ids, const std::vector<int>& mobile_ids,
    const ScenarioConfig& cfg, std::mt19937_64& rng);

/// Number of packets arriving for this flow in one TTI.
int sample_arrivals(const FlowSpec& spec, std::mt19937_64& rng);

}  // namespace rwsim
