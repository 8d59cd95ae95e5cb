#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "u2usim/channel.hpp"

using namespace u2usim;

TEST_CASE("distance_3d") {
  CHECK(distance_3d({0, 0, 0}, {0, 0, 0}) == 0.0);
  CHECK(distance_3d({0, 0, 0}, {3, 4, 0}) == doctest::Approx(5.0));
  CHECK(distance_3d({0, 0, 10}, {30, 40, 10}) == doctest::Approx(50.0));
}

TEST_CASE("LoS pathloss") {
  ChannelParams p;  // f_c = 2 GHz, eta = 0.1 dB

  SUBCASE("closed form at 1 km") {
    CHECK(pathloss_los_db(1000.0, p) == doctest::Approx(98.5683831).epsilon(1e-7));
  }
  SUBCASE("doubling distance adds 20 log10(2)") {
    const double d1 = pathloss_los_db(700.0, p);
    const double d2 = pathloss_los_db(1400.0, p);
    CHECK(d2 - d1 == doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-12));
  }
  SUBCASE("unit argument leaves only the LoS attenuation") {
    const double d = kSpeedOfLight / (4.0 * M_PI * p.carrier_hz);
    CHECK(pathloss_los_db(d, p) == doctest::Approx(p.eta_los_db).epsilon(1e-12));
  }
  SUBCASE("non-positive distance is a domain error") {
    CHECK_THROWS_AS(pathloss_los_db(0.0, p), std::domain_error);
    CHECK_THROWS_AS(pathloss_los_db(-5.0, p), std::domain_error);
  }
}

TEST_CASE("Rician fading sampler") {
  ChannelParams p;

  SUBCASE("kappa = 1 splits power evenly") {
    const auto [rho, sigma0] = rician_moments(1.0);
    CHECK(rho * rho == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(2.0 * sigma0 * sigma0 == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("huge kappa collapses to the LoS limit") {
    p.rice_kappa = 1e9;
    RandomStream rng(3);
    const auto draw = sample_rician_fading(p, rng);
    CHECK(draw.amplitude == 1.0);
    CHECK(draw.fading_db == 0.0);
  }
  SUBCASE("mean envelope power is one") {
    p.rice_kappa = 4.0;
    RandomStream rng(17);
    double sum = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
      const auto draw = sample_rician_fading(p, rng);
      sum += draw.amplitude * draw.amplitude;
    }
    CHECK(sum / n == doctest::Approx(1.0).epsilon(0.01));
  }
  SUBCASE("fading_db matches the amplitude") {
    p.rice_kappa = 2.0;
    RandomStream rng(4);
    const auto draw = sample_rician_fading(p, rng);
    CHECK(std::pow(10.0, -draw.fading_db / 10.0) ==
          doctest::Approx(draw.amplitude * draw.amplitude).epsilon(1e-12));
  }
}

TEST_CASE("fractional power control") {
  ChannelParams p;  // B = 3 MHz, rho_comp = 0.6

  SUBCASE("cap wins at realistic pathloss") {
    p.rho_comp = 0.4;
    CHECK(tx_power_fpc_dbm(23.0, 98.5684, p) == doctest::Approx(23.0));
  }
  SUBCASE("zero compensation leaves only the bandwidth term") {
    p.rho_comp = 0.0;
    p.bandwidth_hz = 100.0;  // 20 dBm term
    CHECK(tx_power_fpc_dbm(23.0, 98.5684, p) ==
          doctest::Approx(10.0 * std::log10(100.0)).epsilon(1e-12));
  }
  SUBCASE("min takes the smaller branch") {
    p.rho_comp = 0.0;
    p.bandwidth_hz = std::pow(10.0, 2.5);  // exactly 25 dBm
    CHECK(tx_power_fpc_dbm(30.0, 120.0, p) == doctest::Approx(25.0).epsilon(1e-12));
  }
}

TEST_CASE("received power") {
  ChannelParams p;

  SUBCASE("unit distance, no gain, no fading") {
    p.gain_db = 0.0;
    CHECK(mw_to_dbm(received_power_mw(17.0, 1.0, 0.0, p)) ==
          doctest::Approx(17.0).epsilon(1e-12));
  }
  SUBCASE("inverse square at alpha = 2") {
    const double near = received_power_mw(23.0, 100.0, 0.0, p);
    const double far = received_power_mw(23.0, 1000.0, 0.0, p);
    CHECK(near / far == doctest::Approx(100.0).epsilon(1e-9));
  }
  SUBCASE("table values") {
    CHECK(mw_to_dbm(received_power_mw(23.0, 1000.0, 0.0, p)) ==
          doctest::Approx(-68.5).epsilon(1e-9));
  }
  SUBCASE("domain error") {
    CHECK_THROWS_AS(received_power_mw(23.0, 0.0, 0.0, p), std::domain_error);
  }
}

TEST_CASE("SINR and rate") {
  ChannelParams p;

  SUBCASE("rate equals bandwidth when p_rx equals noise") {
    const double n_mw = dbm_to_mw(p.noise_dbm);
    const auto [sinr, rate] = sinr_and_rate(n_mw, {}, p);
    CHECK(sinr == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rate == doctest::Approx(p.bandwidth_hz).epsilon(1e-12));
  }
  SUBCASE("heavy interference kills the rate") {
    const std::vector<double> interferers = {1e12};
    const auto [sinr, rate] = sinr_and_rate(1e-9, interferers, p);
    CHECK(rate < 1e-6);
    CHECK(sinr > 0.0);
  }
  SUBCASE("sinr 3 gives two bits per hertz") {
    const double n_mw = dbm_to_mw(p.noise_dbm);
    const auto [sinr, rate] = sinr_and_rate(3.0 * n_mw, {}, p);
    CHECK(sinr == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(rate == doctest::Approx(6e6).epsilon(1e-12));
  }
}

TEST_CASE("dBm/mW round trip") {
  RandomStream rng(23);
  for (int i = 0; i < 1000; ++i) {
    const double dbm = rng.uniform(-150.0, 50.0);
    CHECK(mw_to_dbm(dbm_to_mw(dbm)) == doctest::Approx(dbm).epsilon(1e-12));
  }
}

TEST_CASE("rate is monotone in interference and received power") {
  ChannelParams p;
  RandomStream rng(31);
  for (int i = 0; i < 500; ++i) {
    const double p_rx = dbm_to_mw(rng.uniform(-120.0, -40.0));
    std::vector<double> interferers;
    const int n = static_cast<int>(rng.bounded(6));
    for (int k = 0; k < n; ++k) {
      interferers.push_back(dbm_to_mw(rng.uniform(-130.0, -60.0)));
    }
    const double rate0 = sinr_and_rate(p_rx, interferers, p).second;

    interferers.push_back(dbm_to_mw(rng.uniform(-130.0, -60.0)));
    const double rate_more_interference =
        sinr_and_rate(p_rx, interferers, p).second;
    CHECK(rate_more_interference < rate0);

    interferers.pop_back();
    const double rate_more_signal =
        sinr_and_rate(p_rx * 1.5, interferers, p).second;
    CHECK(rate_more_signal > rate0);
  }
}
