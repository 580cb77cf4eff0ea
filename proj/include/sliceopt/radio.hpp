// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>

namespace sliceopt {

// Speed of light used by the link-budget model, m/s.
inline constexpr double kSpeedOfLight = 3.0e8;

inline double dbm_to_watts(double p_dbm) { return std::pow(10.0, (p_dbm - 30.0) / 10.0); }

inline double watts_to_dbm(double p_w) { return 10.0 * std::log10(p_w) + 30.0; }

// Free-space path loss gain (lambda / (4 pi d))^2, dimensionless.
// The d = 0 singularity is rejected; scenario generation keeps users at
// least 1 m away from their gNodeB.
inline double channel_gain_fspl(double distance_m, double freq_hz) {
  if (!(distance_m > 0.0)) throw std::domain_error("channel_gain_fspl: distance must be > 0 m");
  if (!(freq_hz > 0.0)) throw std::domain_error("channel_gain_fspl: frequency must be > 0 Hz");
  const double wavelength_m = kSpeedOfLight / freq_hz;
  const double ratio = wavelength_m / (4.0 * M_PI * distance_m);
  return ratio * ratio;
}

// Shannon rate of a single RB, bits/s. Zero power or zero gain is valid and
// yields 0.
inline double per_rb_rate(double bandwidth_hz, double tx_power_w, double gain, double noise_w) {
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("per_rb_rate: bandwidth must be > 0");
  if (!(noise_w > 0.0)) throw std::invalid_argument("per_rb_rate: noise power must be > 0");
  if (tx_power_w < 0.0 || gain < 0.0) throw std::invalid_argument("per_rb_rate: negative power or gain");
  return bandwidth_hz * std::log2(1.0 + tx_power_w * gain / noise_w);
}

}  // namespace sliceopt
