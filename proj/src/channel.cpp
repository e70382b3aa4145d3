#include "rwsim/channel.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rwsim {

const CqiTable& CqiTable::lte_default() {
  static const CqiTable table{
      {-6.7, -4.7, -2.3, 0.2, 2.4, 4.3, 5.9, 8.1, 10.3, 11.7, 14.1, 16.3,
       18.7, 21.0, 22.7},
      {0.1523, 0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766, 1.9141, 2.4063,
       2.7305, 3.3223, 3.9023, 4.5234, 5.1152, 5.5547}};
  return table;
}

CqiTable CqiTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open CQI table: " + path);
  CqiTable table{};
  std::array<bool, 15> seen{};
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    int cqi;
    double sinr, eff;
    if (!(row >> cqi >> sinr >> eff)) continue;
    if (cqi < 1 || cqi > 15)
      throw std::invalid_argument("CQI table: index out of range");
    table.sinr_threshold_db[cqi - 1] = sinr;
    table.efficiency_bits_per_symbol[cqi - 1] = eff;
    seen[cqi - 1] = true;
  }
  for (int i = 0; i < 15; ++i)
    if (!seen[i]) throw std::invalid_argument("CQI table: missing row");
  for (int i = 1; i < 15; ++i) {
    if (table.sinr_threshold_db[i] <= table.sinr_threshold_db[i - 1] ||
        table.efficiency_bits_per_symbol[i] <=
            table.efficiency_bits_per_symbol[i - 1])
      throw std::invalid_argument("CQI table: rows must be increasing");
  }
  return table;
}

double path_loss_db(double distance_m, const ChannelConfig& params) {
  const double d = std::max(distance_m, params.ref_distance_m);
  return params.pl0_db +
         10.0 * params.exponent * std::log10(d / params.ref_distance_m);
}

namespace {

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

double rx_power_dbm(const Vec2& ue_pos, const BsSite& site,
                    const ChannelConfig& params) {
  return site.tx_power_dbm - path_loss_db((ue_pos - site.position).norm(),
                                          params);
}

}  // namespace

double sinr_db(const UeState& ue, const std::vector<BsSite>& sites,
               const ChannelConfig& params) {
  const auto& serving = sites.at(static_cast<std::size_t>(ue.serving_bs));
  const double signal_mw =
      dbm_to_mw(rx_power_dbm(ue.position, serving, params) + ue.shadowing_db);
  const double noise_mw = dbm_to_mw(params.noise_density_dbm_hz +
                                    10.0 * std::log10(params.bandwidth_per_rb_hz));
  double interference_mw = 0;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (static_cast<int>(i) == ue.serving_bs) continue;
    interference_mw += dbm_to_mw(rx_power_dbm(ue.position, sites[i], params));
  }
  return 10.0 * std::log10(signal_mw / (interference_mw + noise_mw));
}

int cqi_from_sinr(double sinr_db_value, const CqiTable& table) {
  int cqi = 0;
  for (int i = 0; i < 15; ++i) {
    if (sinr_db_value >= table.sinr_threshold_db[i]) cqi = i + 1;
  }
  return cqi;
}

int compute_cqi(const UeState& ue, const std::vector<BsSite>& sites,
                const ChannelConfig& params, const CqiTable& table) {
  return cqi_from_sinr(sinr_db(ue, sites, params), table);
}

long tb_bits(int cqi, int n_rbg_assigned, int rbg_size, const CqiTable& table) {
  if (cqi <= 0 || n_rbg_assigned <= 0) return 0;
  constexpr double kResourceElementsPerRb = 12.0 * 14.0;
  const double eff = table.efficiency_bits_per_symbol[cqi - 1];
  return static_cast<long>(
      eff * kResourceElementsPerRb * rbg_size * n_rbg_assigned);
}

TxOutcome transmission_outcome(int cqi, std::mt19937_64& rng,
                               const ChannelConfig& params) {
  (void)cqi;  // single wideband BLER target; link adaptation absorbs CQI
  if (params.bler_target <= 0) return TxOutcome::Delivered;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng) < params.bler_target ? TxOutcome::HarqRetx
                                     : TxOutcome::Delivered;
}

void advance_mobility(UeState& ue, double dt_ms, double extent_m) {
  if (!ue.mobile) return;
  Vec2 pos = ue.position + ue.velocity * (dt_ms / 1000.0);
  for (int axis = 0; axis < 2; ++axis) {
    if (pos[axis] < 0) {
      pos[axis] = -pos[axis];
      ue.velocity[axis] = -ue.velocity[axis];
    } else if (pos[axis] > extent_m) {
      pos[axis] = 2 * extent_m - pos[axis];
      ue.velocity[axis] = -ue.velocity[axis];
    }
  }
  ue.position = pos;
}

int strongest_site(const Vec2& position, const std::vector<BsSite>& sites,
                   const ChannelConfig& params) {
  int best = 0;
  double best_dbm = -1e300;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const double p = rx_power_dbm(position, sites[i], params);
    if (p > best_dbm) {
      best_dbm = p;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace rwsim
