#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>

#include "rwsim/channel.hpp"

using namespace rwsim;

namespace {

ChannelConfig no_shadow() {
  ChannelConfig p;
  p.shadowing_sigma_db = 0;
  return p;
}

UeState make_ue(double x, double y, int serving = 0) {
  UeState ue;
  ue.position = Vec2(x, y);
  ue.serving_bs = serving;
  return ue;
}

}  // namespace

TEST_CASE("path loss anchors at the reference distance") {
  const auto p = no_shadow();
  CHECK(path_loss_db(p.ref_distance_m, p) == doctest::Approx(p.pl0_db));
  // boundary clamp
  CHECK(path_loss_db(0.0, p) == doctest::Approx(p.pl0_db));
  // 10 * 3.5 * log10(2) = 10.536 dB per distance doubling
  CHECK(path_loss_db(2 * p.ref_distance_m, p) ==
        doctest::Approx(p.pl0_db + 10.536).epsilon(1e-4));
}

TEST_CASE("CQI saturates at the table edges") {
  const auto& table = CqiTable::lte_default();
  CHECK(cqi_from_sinr(-100.0, table) == 0);
  CHECK(cqi_from_sinr(100.0, table) == 15);
  // exactly at a threshold maps to that index; brute-force scan as oracle
  for (int idx = 1; idx <= 15; ++idx) {
    const double sinr = table.sinr_threshold_db[idx - 1];
    int oracle = 0;
    for (int i = 15; i >= 1; --i) {
      if (sinr >= table.sinr_threshold_db[i - 1]) {
        oracle = i;
        break;
      }
    }
    CHECK(cqi_from_sinr(sinr, table) == oracle);
    CHECK(cqi_from_sinr(sinr, table) == idx);
  }
}

TEST_CASE("CQI is monotone in SINR") {
  const auto& table = CqiTable::lte_default();
  int prev = 0;
  for (double sinr = -20; sinr <= 40; sinr += 0.1) {
    const int cqi = cqi_from_sinr(sinr, table);
    CHECK(cqi >= prev);
    prev = cqi;
  }
}

TEST_CASE("SINR decreases with distance from the serving site") {
  const auto p = no_shadow();
  std::vector<BsSite> sites{{Vec2(0, 0), p.tx_power_dbm},
                            {Vec2(2000, 0), p.tx_power_dbm}};
  double prev = 1e9;
  for (double d = 10; d <= 900; d += 50) {
    auto ue = make_ue(d, 0);
    const double s = sinr_db(ue, sites, p);
    CHECK(s < prev);
    prev = s;
  }
}

TEST_CASE("transport block sizing") {
  const auto& table = CqiTable::lte_default();
  CHECK(tb_bits(0, 4, 2, table) == 0);
  // cqi 15, one RBG of 2 RBs: 5.5547 * 168 * 2 floored
  CHECK(tb_bits(15, 1, 2, table) == 1866);
  for (int c = 1; c < 15; ++c)
    CHECK(tb_bits(c + 1, 3, 2, table) >= tb_bits(c, 3, 2, table));
}

TEST_CASE("transmission outcomes follow the BLER target") {
  std::mt19937_64 rng(5);
  auto p = no_shadow();

  p.bler_target = 0.0;
  for (int i = 0; i < 1000; ++i)
    CHECK(transmission_outcome(10, rng, p) == TxOutcome::Delivered);

  p.bler_target = 0.1;
  int failures = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i)
    if (transmission_outcome(10, rng, p) == TxOutcome::HarqRetx) ++failures;
  const double frac = static_cast<double>(failures) / n;
  CHECK(frac > 0.095);
  CHECK(frac < 0.105);
}

TEST_CASE("mobility is straight-line with reflection") {
  auto ue = make_ue(100, 100);
  ue.mobile = true;
  ue.velocity = Vec2(0, 0);
  advance_mobility(ue, 1.0, 1000.0);
  CHECK(ue.position == Vec2(100, 100));

  ue.velocity = Vec2(20, 0);
  for (int i = 0; i < 1000; ++i) advance_mobility(ue, 1.0, 1000.0);
  CHECK(ue.position.x() == doctest::Approx(120.0));

  // reflect off the far boundary
  ue = make_ue(995, 0);
  ue.mobile = true;
  ue.velocity = Vec2(10000, 0);
  advance_mobility(ue, 1000.0, 1000.0);
  CHECK(ue.position.x() <= 1000.0);
  CHECK(ue.velocity.x() < 0);
}

TEST_CASE("handover at the midpoint of two equal sites") {
  const auto p = no_shadow();
  std::vector<BsSite> sites{{Vec2(0, 0), p.tx_power_dbm},
                            {Vec2(1000, 0), p.tx_power_dbm}};
  CHECK(strongest_site(Vec2(499, 0), sites, p) == 0);
  CHECK(strongest_site(Vec2(501, 0), sites, p) == 1);
}

TEST_CASE("CQI table round-trips through the data file format") {
  const std::string path = "cqi_test_table.txt";
  {
    std::ofstream out(path);
    out << "# cqi sinr_db efficiency\n";
    const auto& t = CqiTable::lte_default();
    for (int i = 0; i < 15; ++i)
      out << (i + 1) << ' ' << t.sinr_threshold_db[i] << ' '
          << t.efficiency_bits_per_symbol[i] << '\n';
  }
  const auto loaded = CqiTable::load(path);
  const auto& t = CqiTable::lte_default();
  for (int i = 0; i < 15; ++i) {
    CHECK(loaded.sinr_threshold_db[i] == doctest::Approx(t.sinr_threshold_db[i]));
    CHECK(loaded.efficiency_bits_per_symbol[i] ==
          doctest::Approx(t.efficiency_bits_per_symbol[i]));
  }
  CHECK_THROWS(CqiTable::load("does_not_exist.txt"));
}
