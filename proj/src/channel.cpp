#include "u2usim/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace u2usim {

void ChannelParams::validate() const {
  if (carrier_hz <= 0.0) throw ConfigError("channel.carrier_hz: must be > 0");
  if (bandwidth_hz <= 0.0) {
    throw ConfigError("channel.bandwidth_hz: must be > 0");
  }
  if (alpha < 2.0) throw ConfigError("channel.alpha: must be >= 2");
  if (rice_kappa < 0.0) throw ConfigError("channel.rice_kappa: must be >= 0");
  if (min_link_distance <= 0.0) {
    throw ConfigError("channel.min_link_distance: must be > 0");
  }
  static constexpr double kRhoSet[] = {0.0, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  bool found = false;
  for (double r : kRhoSet) {
    if (std::abs(rho_comp - r) < 1e-12) found = true;
  }
  if (!found) {
    throw ConfigError(
        "channel.rho_comp: must be one of {0, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1}");
  }
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

double distance_3d(const UavPose& a, const UavPose& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dh = a.h - b.h;
  return std::sqrt(dx * dx + dy * dy + dh * dh);
}

double pathloss_los_db(double d, const ChannelParams& p) {
  if (d <= 0.0) throw std::domain_error("pathloss_los_db: d must be > 0");
  return 20.0 * std::log10(4.0 * M_PI * p.carrier_hz * d / kSpeedOfLight) +
         p.eta_los_db;
}

std::pair<double, double> rician_moments(double kappa) {
  const double sigma0 = std::sqrt(1.0 / (2.0 * (kappa + 1.0)));
  const double rho = std::sqrt(kappa / (kappa + 1.0));
  return {rho, sigma0};
}

FadingDraw sample_rician_fading(const ChannelParams& p, RandomStream& rng) {
  if (p.rice_kappa >= 1e6) return {1.0, 0.0};  // pure LoS limit
  const auto [rho, sigma0] = rician_moments(p.rice_kappa);
  const double re = rho + sigma0 * rng.normal();
  const double im = sigma0 * rng.normal();
  const double amplitude = std::hypot(re, im);
  return {amplitude, -20.0 * std::log10(amplitude)};
}

double tx_power_fpc_dbm(double p_max_dbm, double pathloss_db,
                        const ChannelParams& p) {
  return std::min(p_max_dbm,
                  10.0 * std::log10(p.bandwidth_hz) + p.rho_comp * pathloss_db);
}

double received_power_mw(double p_tx_dbm, double d, double fading_db,
                         const ChannelParams& p) {
  if (d <= 0.0) throw std::domain_error("received_power_mw: d must be > 0");
  const double p_rx_dbm =
      p_tx_dbm + p.gain_db - 10.0 * p.alpha * std::log10(d) - fading_db;
  return dbm_to_mw(p_rx_dbm);
}

std::pair<double, double> sinr_and_rate(double p_rx_mw,
                                        std::span<const double> interferers_mw,
                                        const ChannelParams& p) {
  double denom = dbm_to_mw(p.noise_dbm);
  for (double i : interferers_mw) denom += i;
  const double sinr = p_rx_mw / denom;
  const double rate = p.bandwidth_hz * std::log2(1.0 + sinr);
  return {sinr, rate};
}

double rician_pdf(double x, double rho, double sigma0) {
  if (x < 0.0) return 0.0;
  const double s2 = sigma0 * sigma0;
  return x / s2 * std::exp(-(x * x + rho * rho) / (2.0 * s2)) *
         std::cyl_bessel_i(0.0, x * rho / s2);
}

}  // namespace u2usim
