#pragma once

// Trajectory interchange (AFT1 binary) and JSON-lines sample manifests.
//
// AFT1 layout, all little-endian:
//   0..3    "AFT1"
//   4..7    u32 frame count
//   8..11   u32 channel count
//   12..15  f32 frame rate (Hz)
//   16..    frames * channels f32 values, frame-major

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aai/matrix.hpp"

namespace aai {

inline constexpr char kAft1Magic[4] = {'A', 'F', 'T', '1'};
inline constexpr std::size_t kAft1HeaderBytes = 16;

class FeatureTrajectory {
 public:
  FeatureTrajectory() = default;
  /// Throws DataError when any invariant fails (empty shape, non-finite
  /// element, non-positive rate, channel name count mismatch).
  FeatureTrajectory(Matrix data, double frame_rate_hz,
                    std::vector<std::string> channel_names = {});

  const Matrix& data() const noexcept { return data_; }
  double frame_rate_hz() const noexcept { return frame_rate_hz_; }
  const std::vector<std::string>& channel_names() const noexcept {
    return channel_names_;
  }
  std::size_t frames() const noexcept { return data_.rows(); }
  std::size_t channels() const noexcept { return data_.cols(); }
  std::span<const double> frame(std::size_t i) const { return data_.row(i); }

  friend bool operator==(const FeatureTrajectory&, const FeatureTrajectory&) = default;

 private:
  Matrix data_;
  double frame_rate_hz_ = 0.0;
  std::vector<std::string> channel_names_;
};

enum class SampleRole { articulatory, feature };

std::string to_string(SampleRole role);
SampleRole parse_role(const std::string& text);

struct SampleRecord {
  std::string id;
  std::string speaker;
  std::string word;
  std::string label;
  std::string set_id;
  std::string path;
  SampleRole role = SampleRole::articulatory;
};

struct Manifest {
  std::vector<SampleRecord> records;
  /// Directory relative paths are resolved against; empty means the CWD.
  std::filesystem::path base_dir;

  const SampleRecord* find(const std::string& id) const;
};

using TrajectoryMap = std::map<std::string, FeatureTrajectory>;

void write_trajectory(const FeatureTrajectory& traj, std::ostream& out);
FeatureTrajectory read_trajectory(std::istream& in);

void write_trajectory_file(const FeatureTrajectory& traj,
                           const std::filesystem::path& path);
FeatureTrajectory read_trajectory_file(const std::filesystem::path& path);

/// Parses JSON-lines. Blank lines are skipped; errors carry the 1-based
/// line number. Records sharing a set_id must share a role.
Manifest load_manifest(std::istream& in);
Manifest load_manifest_file(const std::filesystem::path& path);

void write_manifest(const Manifest& manifest, std::ostream& out);

/// Reads every record's trajectory. Failures are reported as DataError
/// naming the sample id.
TrajectoryMap load_trajectories(const Manifest& manifest);

}  // namespace aai
