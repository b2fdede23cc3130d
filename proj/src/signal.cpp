#include "aai/signal.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "aai/error.hpp"

namespace aai {
namespace {

// Steady-state TDF-II state of one section for a unit constant input.
std::pair<double, double> section_zi(const Biquad& s) {
  const double gain = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
  const double z2 = s.b2 - s.a2 * gain;
  const double z1 = gain - s.b0;
  return {z1, z2};
}

void run_cascade(const SosFilter& f, std::vector<double>& x) {
  double scale = x.front();
  for (const Biquad& s : f.sections) {
    auto [z1, z2] = section_zi(s);
    z1 *= scale;
    z2 *= scale;
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
    scale *= (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
  }
}

}  // namespace

void FilterSpec::validate() const {
  if (order < 1) throw DataError("filter order must be >= 1");
  if (!(sample_rate_hz > 0.0)) throw DataError("filter sample rate must be positive");
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < sample_rate_hz / 2.0)) {
    throw DataError("cutoff " + std::to_string(cutoff_hz) + " Hz must lie in (0, " +
                    std::to_string(sample_rate_hz / 2.0) + ") Hz");
  }
}

std::complex<double> SosFilter::response(double freq_hz, double sample_rate_hz) const {
  const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate_hz;
  const std::complex<double> zi1 = std::polar(1.0, -w);
  const std::complex<double> zi2 = zi1 * zi1;
  std::complex<double> h = 1.0;
  for (const Biquad& s : sections) {
    h *= (s.b0 + s.b1 * zi1 + s.b2 * zi2) / (1.0 + s.a1 * zi1 + s.a2 * zi2);
  }
  return h;
}

SosFilter design_butterworth_lowpass(const FilterSpec& spec) {
  spec.validate();
  const int n = spec.order;
  const double fs2 = 2.0 * spec.sample_rate_hz;
  const double warped = fs2 * std::tan(std::numbers::pi * spec.cutoff_hz / spec.sample_rate_hz);

  SosFilter f;
  f.order = n;
  if (n % 2 == 1) {
    const double zp = (fs2 - warped) / (fs2 + warped);
    Biquad s;
    s.a1 = -zp;
    const double g = (1.0 + s.a1) / 2.0;
    s.b0 = g;
    s.b1 = g;
    f.sections.push_back(s);
  }
  // Left-half-plane poles come in conjugate pairs; take one of each pair.
  for (int k = 0; k < n / 2; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + n + 1) / (2.0 * n);
    const std::complex<double> p = warped * std::polar(1.0, theta);
    const std::complex<double> zp = (fs2 + p) / (fs2 - p);
    Biquad s;
    s.a1 = -2.0 * zp.real();
    s.a2 = std::norm(zp);
    const double g = (1.0 + s.a1 + s.a2) / 4.0;
    s.b0 = g;
    s.b1 = 2.0 * g;
    s.b2 = g;
    f.sections.push_back(s);
  }
  return f;
}

std::vector<double> filtfilt(const SosFilter& filter, std::span<const double> x) {
  const std::size_t pad = filtfilt_padlen(filter);
  const std::size_t n = x.size();
  if (n <= pad) {
    throw DataError("trajectory of " + std::to_string(n) + " frames is too short for filtfilt (needs more than " +
                    std::to_string(pad) + ")");
  }
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t k = pad; k >= 1; --k) ext.push_back(2.0 * x[0] - x[k]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t k = 1; k <= pad; ++k) ext.push_back(2.0 * x[n - 1] - x[n - 1 - k]);

  run_cascade(filter, ext);
  std::reverse(ext.begin(), ext.end());
  run_cascade(filter, ext);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

FeatureTrajectory filtfilt(const SosFilter& filter, const FeatureTrajectory& traj) {
  const Matrix& in = traj.data();
  Matrix out(in.rows(), in.cols());
  std::vector<double> column(in.rows());
  for (std::size_t c = 0; c < in.cols(); ++c) {
    for (std::size_t i = 0; i < in.rows(); ++i) column[i] = in(i, c);
    const auto y = filtfilt(filter, column);
    for (std::size_t i = 0; i < in.rows(); ++i) out(i, c) = y[i];
  }
  return FeatureTrajectory(std::move(out), traj.frame_rate_hz(), traj.channel_names());
}

ZnormResult znorm_by_speaker(const Manifest& manifest, const TrajectoryMap& trajectories) {
  std::map<std::string, std::vector<const SampleRecord*>> by_speaker;
  for (const auto& r : manifest.records) {
    if (!trajectories.contains(r.id)) {
      throw DataError("sample '" + r.id + "': trajectory missing");
    }
    by_speaker[r.speaker].push_back(&r);
  }

  ZnormResult result;
  for (const auto& [speaker, records] : by_speaker) {
    const std::size_t channels = trajectories.at(records.front()->id).channels();
    std::vector<double> sum(channels, 0.0);
    std::size_t count = 0;
    for (const auto* r : records) {
      const auto& t = trajectories.at(r->id);
      if (t.channels() != channels) {
        throw DataError("speaker '" + speaker + "': sample '" + r->id + "' has " +
                        std::to_string(t.channels()) + " channels, expected " +
                        std::to_string(channels));
      }
      for (std::size_t i = 0; i < t.frames(); ++i) {
        for (std::size_t c = 0; c < channels; ++c) sum[c] += t.data()(i, c);
      }
      count += t.frames();
    }
    SpeakerStats stats{speaker, std::vector<double>(channels), std::vector<double>(channels, 0.0)};
    for (std::size_t c = 0; c < channels; ++c) stats.mean[c] = sum[c] / static_cast<double>(count);
    for (const auto* r : records) {
      const auto& t = trajectories.at(r->id);
      for (std::size_t i = 0; i < t.frames(); ++i) {
        for (std::size_t c = 0; c < channels; ++c) {
          const double d = t.data()(i, c) - stats.mean[c];
          stats.std[c] += d * d;
        }
      }
    }
    for (std::size_t c = 0; c < channels; ++c) {
      stats.std[c] = std::sqrt(stats.std[c] / static_cast<double>(count));
      // Rounding leaves a tiny residual on constant channels.
      if (stats.std[c] <= 1e-12 * std::max(1.0, std::abs(stats.mean[c]))) {
        throw DataError("speaker '" + speaker + "': channel " + std::to_string(c) +
                        " has zero variance");
      }
    }
    for (const auto* r : records) {
      const auto& t = trajectories.at(r->id);
      Matrix m(t.frames(), channels);
      for (std::size_t i = 0; i < t.frames(); ++i) {
        for (std::size_t c = 0; c < channels; ++c) {
          m(i, c) = (t.data()(i, c) - stats.mean[c]) / stats.std[c];
        }
      }
      result.trajectories.emplace(r->id,
                                  FeatureTrajectory(std::move(m), t.frame_rate_hz(), t.channel_names()));
    }
    result.stats.push_back(std::move(stats));
  }
  return result;
}

}  // namespace aai
