#pragma once

#include <complex>
#include <string>
#include <vector>

#include "aai/featio.hpp"

namespace aai {

struct FilterSpec {
  int order = 5;
  double cutoff_hz = 10.0;
  double sample_rate_hz = 0.0;

  /// Throws DataError unless order >= 1 and 0 < cutoff < Nyquist.
  void validate() const;
};

/// One second-order section, a0 normalized to 1. First-order sections use
/// b2 = a2 = 0.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

struct SosFilter {
  std::vector<Biquad> sections;
  int order = 0;

  /// Complex response at frequency f (Hz) for sample rate fs.
  std::complex<double> response(double freq_hz, double sample_rate_hz) const;
  double magnitude(double freq_hz, double sample_rate_hz) const {
    return std::abs(response(freq_hz, sample_rate_hz));
  }
};

/// Butterworth low-pass via bilinear transform with the cutoff pre-warped,
/// realised as a cascade of second-order sections with unit DC gain each.
SosFilter design_butterworth_lowpass(const FilterSpec& spec);

/// Edge padding used by filtfilt.
inline std::size_t filtfilt_padlen(const SosFilter& f) {
  return 3 * static_cast<std::size_t>(f.order + 1);
}

/// Forward-backward (zero phase) filtering of one channel, odd-reflection
/// padded, with steady-state initial conditions scaled by the edge sample.
std::vector<double> filtfilt(const SosFilter& filter, std::span<const double> x);

/// Per-channel filtfilt. Requires frames > filtfilt_padlen(filter).
FeatureTrajectory filtfilt(const SosFilter& filter, const FeatureTrajectory& traj);

struct SpeakerStats {
  std::string speaker;
  std::vector<double> mean;
  std::vector<double> std;
};

struct ZnormResult {
  TrajectoryMap trajectories;
  std::vector<SpeakerStats> stats;  // sorted by speaker
};

/// Per-speaker, per-channel standardization with population statistics
/// pooled over every frame of every sample of that speaker.
ZnormResult znorm_by_speaker(const Manifest& manifest, const TrajectoryMap& trajectories);

}  // namespace aai
