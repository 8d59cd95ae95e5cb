#ifndef U2USIM_VIDEO_QOE_HPP
#define U2USIM_VIDEO_QOE_HPP

#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

// Resolution ladder, per-frame transmission time, delay, log-rate video
// quality and the QoE reward scalar.

namespace u2usim {

struct LadderEntry {
  std::string label;
  int pixels_x = 0;
  int pixels_y = 0;
  double min_rate_bps = 0.0;
};

struct ResolutionLadder {
  std::vector<LadderEntry> entries;

  static ResolutionLadder defaults();
  void validate() const;
  int size() const { return static_cast<int>(entries.size()); }
  const LadderEntry& at(int idx) const { return entries.at(idx); }
};

struct QoeWeights {
  double kappa = 1.0;               // video-quality weight
  double omega = 0.5;               // delay weight, per second
  double frame_deadline_s = 1.0 / 30.0;  // T_l
  double bits_per_pixel = 12.0;     // b

  void validate() const;  // requires kappa > omega > 0
};

// Frame transmission time: pixels_x * pixels_y * b / rate.
// rate == 0 yields +inf (frame undeliverable); rate < 0 throws.
double frame_tx_time_s(const LadderEntry& res, double rate_bps,
                       const QoeWeights& w);

// max(0, max(times) - T_l); empty -> 0 (no active streams).
double slot_delay_s(std::span<const double> times_s, const QoeWeights& w);

// ln(rate / min_rate). Negative when the UE misses the ladder minimum;
// rate <= 0 yields -inf (dropped frame).
double quality(double rate_bps, const LadderEntry& res);

struct QualityPair {
  double q_now = 0.0;
  double q_prev = 0.0;
};

struct QoeResult {
  double reward = 0.0;
  double quality_term = 0.0;       // (kappa/IK) * sum q_now
  double smoothness_penalty = 0.0; // (kappa/IK) * sum |q_now - q_prev|
  double delay_penalty = 0.0;      // omega * delay
};

// reward = (kappa/(I*K)) * sum[q_now - |q_now - q_prev|] - omega * delay.
// `per_ue` covers the active UEs; I and K are the active area count and
// UEs per area. With no active UEs the quality terms vanish.
QoeResult qoe_reward(std::span<const QualityPair> per_ue, double delay_s,
                     const QoeWeights& w, int areas, int ues_per_area);

}  // namespace u2usim

#endif  // U2USIM_VIDEO_QOE_HPP
