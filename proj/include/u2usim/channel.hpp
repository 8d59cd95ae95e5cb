#ifndef U2USIM_CHANNEL_HPP
#define U2USIM_CHANNEL_HPP

#include <span>
#include <utility>
#include <vector>

#include "u2usim/rng.hpp"
#include "u2usim/scenario.hpp"

// Per-TTI uplink link budgets: LoS pathloss, Rician small-scale fading,
// fractional power control, received power, mutual interference, SINR
// and Shannon rate.

namespace u2usim {

inline constexpr double kSpeedOfLight = 2.99792458e8;  // m/s

struct ChannelParams {
  double carrier_hz = 2e9;     // f_c
  double eta_los_db = 0.1;     // extra LoS attenuation
  double alpha = 2.0;          // pathloss exponent in the received-power law
  double gain_db = -31.5;      // amplifier/antenna power gain factor G
  double bandwidth_hz = 3e6;   // B
  double noise_dbm = -96.0;    // noise power N over B
  double rice_kappa = 15.848931924611133;  // linear Rice factor (12 dB)
  double rho_comp = 0.6;       // fractional pathloss compensation rho_u
  double min_link_distance = 1.0;  // m; floor applied to d_3D so that a
                                   // BS sharing a grid point with a UE
                                   // does not blow up the d^-alpha law

  void validate() const;
};

struct LinkBudget {
  double d_3d = 0.0;            // m
  double pathloss_db = 0.0;     // free-space LoS pathloss, used by FPC
  double fading_db = 0.0;       // -10 log10(amplitude^2)
  double p_tx_dbm = 0.0;
  double p_rx_mw = 0.0;
  double interference_mw = 0.0;
  double sinr = 0.0;            // linear
  double rate_bps = 0.0;
};

double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);

double distance_3d(const UavPose& a, const UavPose& b);

// 20 log10(4 pi f_c d / c) + eta_LoS. d <= 0 throws std::domain_error.
double pathloss_los_db(double d, const ChannelParams& p);

struct FadingDraw {
  double amplitude = 1.0;  // linear envelope
  double fading_db = 0.0;  // -10 log10(amplitude^2)
};

// Rician envelope parameters derived from the linear Rice factor kappa,
// normalised to unit mean power: rho^2 = kappa/(kappa+1),
// sigma0^2 = 1/(2 (kappa+1)), so rho^2 = 2 kappa sigma0^2 and
// rho^2 + 2 sigma0^2 = 1.
std::pair<double, double> rician_moments(double kappa);  // (rho, sigma0)

// Envelope draw; kappa >= 1e6 is treated as the pure-LoS limit
// (amplitude 1, 0 dB).
FadingDraw sample_rician_fading(const ChannelParams& p, RandomStream& rng);

// Fractional power control: min(p_max, 10 log10(B) + rho_u * PL), in dBm.
double tx_power_fpc_dbm(double p_max_dbm, double pathloss_db,
                        const ChannelParams& p);

// Received power in mW: dBm sum p_tx + G - 10 alpha log10(d) - fading_db.
// d <= 0 throws std::domain_error.
double received_power_mw(double p_tx_dbm, double d, double fading_db,
                         const ChannelParams& p);

// sinr = p_rx / (N + sum of interferers); rate = B log2(1 + sinr).
// Callers pass only the received powers of currently active co-channel
// UEs.
std::pair<double, double> sinr_and_rate(double p_rx_mw,
                                        std::span<const double> interferers_mw,
                                        const ChannelParams& p);

// Exact Rician envelope density of Eq-form p(x) =
// x/sigma0^2 exp(-(x^2+rho^2)/(2 sigma0^2)) I0(x rho / sigma0^2).
// Used by statistical tests.
double rician_pdf(double x, double rho, double sigma0);

}  // namespace u2usim

#endif  // U2USIM_CHANNEL_HPP
