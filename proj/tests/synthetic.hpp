#pragma once

// Synthetic corpora with known targets, shared by unit and acceptance tests.

#include <filesystem>
#include <string>
#include <vector>

#include "aai/featio.hpp"
#include "aai/random.hpp"

namespace synth {

/// Gaussian white noise smoothed along time with a Gaussian kernel of the
/// given width (frames), rescaled to roughly unit variance per channel.
aai::Matrix smooth_noise(aai::Rng& rng, std::size_t frames, std::size_t channels, double width);

struct Corpus {
  aai::Manifest manifest;
  aai::TrajectoryMap trajectories;
};

struct ArticulatoryOptions {
  std::size_t speakers = 6;
  std::size_t classes = 5;
  std::size_t repetitions = 4;
  std::size_t frames = 100;
  std::size_t channels = 8;
  double frame_rate_hz = 100.0;
  double within_class_std = 0.3;  // per-sample spread of the target
  double class_scale = 3.0;       // std of class mean entries
  double center = 50.0;
  double jitter = 3.0;  // uniform +- frames
};

struct ArticulatoryCorpus : Corpus {
  std::vector<std::vector<double>> class_means;
  std::vector<double> centers;  // per manifest record
  double min_mean_separation = 0.0;
};

/// V-C-V style corpus: smooth noise with a class-specific target blended in
/// over frames center +- 10 (flat top over +- 4). One set, labels c0..cK-1.
ArticulatoryCorpus make_articulatory_corpus(std::uint64_t seed, const ArticulatoryOptions& opt = {});

struct VoicingOptions {
  std::size_t units = 6;
  std::vector<std::string> labels = {"b", "p", "f", "d", "g", "s"};
  std::size_t frames = 60;
  std::size_t dim = 1024;
  double frame_rate_hz = 50.0;
};

/// High-dimensional "encoder feature" corpus: every label has a random
/// pattern shared across units, perturbed per unit and blended over the
/// middle frames; labels carry no articulatory structure.
Corpus make_feature_corpus(std::uint64_t seed, const VoicingOptions& opt = {});

/// Writes one AFT1 file per record plus manifest.jsonl into `dir`.
std::filesystem::path write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

/// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& tag);

}  // namespace synth
