#pragma once

#include <array>
#include <random>
#include <string>
#include <vector>

#include "rwsim/domain.hpp"

namespace rwsim {

/// A transmitting site: position and downlink power.
struct BsSite {
  Vec2 position{0, 0};
  double tx_power_dbm = 46.0;
};

/// 15-entry link adaptation table: SINR threshold and spectral efficiency
/// per CQI index 1..15. CQI 0 means out of range.
struct CqiTable {
  std::array<double, 15> sinr_threshold_db{};
  std::array<double, 15> efficiency_bits_per_symbol{};

  static const CqiTable& lte_default();
  /// One row per line: "<cqi> <sinr_db> <efficiency>". '#' starts a comment.
  static CqiTable load(const std::string& path);
};

/// Log-distance path loss, clamped at the reference distance.
double path_loss_db(double distance_m, const ChannelConfig& params);

/// Wideband SINR of a UE against its serving site, in dB, with all other
/// sites transmitting at full power.
double sinr_db(const UeState& ue, const std::vector<BsSite>& sites,
               const ChannelConfig& params);

/// Map SINR through the table: highest CQI whose threshold is met, else 0.
int cqi_from_sinr(double sinr_db_value, const CqiTable& table);

int compute_cqi(const UeState& ue, const std::vector<BsSite>& sites,
                const ChannelConfig& params, const CqiTable& table);

/// Transport block size for one TTI: efficiency x 168 resource elements
/// per RB (12 subcarriers x 14 symbols) x RBs granted, floored.
long tb_bits(int cqi, int n_rbg_assigned, int rbg_size, const CqiTable& table);

enum class TxOutcome { Delivered, HarqRetx };

/// First-attempt result of a transport block: fails with probability
/// bler_target.
TxOutcome transmission_outcome(int cqi, std::mt19937_64& rng,
                               const ChannelConfig& params);

/// Constant-velocity motion with reflective boundaries on [0,extent]^2.
void advance_mobility(UeState& ue, double dt_ms, double extent_m);

/// Index of the strongest site at the UE position (no shadowing).
int strongest_site(const Vec2& position, const std::vector<BsSite>& sites,
                   const ChannelConfig& params);

}  // namespace rwsim
