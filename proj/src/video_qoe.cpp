#include "u2usim/video_qoe.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "u2usim/scenario.hpp"  // ConfigError

namespace u2usim {

ResolutionLadder ResolutionLadder::defaults() {
  return ResolutionLadder{{
      {"144p", 256, 144, 80e3},
      {"240p", 426, 240, 300e3},
      {"360p", 640, 360, 700e3},
      {"480p", 854, 480, 1000e3},
      {"720p", 1280, 720, 2000e3},
      {"1080p", 1920, 1080, 3000e3},
  }};
}

void ResolutionLadder::validate() const {
  if (entries.empty()) throw ConfigError("qoe.ladder: must not be empty");
  for (size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.pixels_x <= 0 || e.pixels_y <= 0) {
      throw ConfigError("qoe.ladder[" + std::to_string(i) +
                        "]: pixel counts must be > 0");
    }
    if (e.min_rate_bps <= 0.0) {
      throw ConfigError("qoe.ladder[" + std::to_string(i) +
                        "]: min_rate_bps must be > 0");
    }
    if (i > 0) {
      const auto& prev = entries[i - 1];
      if (e.min_rate_bps <= prev.min_rate_bps) {
        throw ConfigError("qoe.ladder[" + std::to_string(i) +
                          "]: min_rate_bps must be strictly increasing");
      }
      if (static_cast<long>(e.pixels_x) * e.pixels_y <=
          static_cast<long>(prev.pixels_x) * prev.pixels_y) {
        throw ConfigError("qoe.ladder[" + std::to_string(i) +
                          "]: pixel count must be strictly increasing");
      }
    }
  }
}

void QoeWeights::validate() const {
  if (!(kappa > omega && omega > 0.0)) {
    throw ConfigError("qoe.kappa/omega: kappa > omega > 0 required");
  }
  if (frame_deadline_s <= 0.0) {
    throw ConfigError("qoe.frame_deadline_s: must be > 0");
  }
  if (bits_per_pixel <= 0.0) {
    throw ConfigError("qoe.bits_per_pixel: must be > 0");
  }
}

double frame_tx_time_s(const LadderEntry& res, double rate_bps,
                       const QoeWeights& w) {
  if (rate_bps < 0.0) throw std::domain_error("frame_tx_time_s: rate < 0");
  const double bits =
      static_cast<double>(res.pixels_x) * res.pixels_y * w.bits_per_pixel;
  if (rate_bps == 0.0) return std::numeric_limits<double>::infinity();
  return bits / rate_bps;
}

double slot_delay_s(std::span<const double> times_s, const QoeWeights& w) {
  if (times_s.empty()) return 0.0;
  double worst = 0.0;
  for (double t : times_s) worst = std::max(worst, t);
  return std::max(0.0, worst - w.frame_deadline_s);
}

double quality(double rate_bps, const LadderEntry& res) {
  if (rate_bps <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(rate_bps / res.min_rate_bps);
}

QoeResult qoe_reward(std::span<const QualityPair> per_ue, double delay_s,
                     const QoeWeights& w, int areas, int ues_per_area) {
  QoeResult r;
  r.delay_penalty = w.omega * delay_s;
  const int total = areas * ues_per_area;
  if (total > 0 && !per_ue.empty()) {
    const double scale = w.kappa / static_cast<double>(total);
    for (const auto& q : per_ue) {
      r.quality_term += scale * q.q_now;
      r.smoothness_penalty += scale * std::abs(q.q_now - q.q_prev);
    }
  }
  r.reward = r.quality_term - r.smoothness_penalty - r.delay_penalty;
  return r;
}

}  // namespace u2usim
