#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aai/align.hpp"
#include "aai/featio.hpp"
#include "aai/signal.hpp"

namespace aai {

// ---------------------------------------------------------------- targets

struct TargetRow {
  std::string id;
  std::string speaker;
  std::string label;
  std::string set_id;
  std::size_t frame = 0;
  std::vector<double> vector;
};

struct TargetTable {
  std::vector<TargetRow> rows;

  /// Throws DataError if vector dimensions differ.
  void validate() const;
};

void write_target_table(const TargetTable& table, std::ostream& out);
TargetTable read_target_table(std::istream& in);

struct Preprocess {
  bool znorm = true;
  /// Low-pass settings; the sample rate comes from the trajectories.
  std::optional<std::pair<int, double>> lowpass = std::pair{5, 10.0};
};

/// z-norm by speaker, then zero-phase low-pass, then for every sample the
/// DTW local-cost target against all other samples of the same speaker in
/// the same set (every label). Rows follow manifest order.
TargetTable build_targets(const Manifest& manifest, const TrajectoryMap& trajectories,
                          CostMetric metric, const Preprocess& preprocess,
                          unsigned threads = 1);

// ---------------------------------------------------------------- SVM

struct SvmOptions {
  double c = 1.0;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
};

/// One-vs-rest linear SVM. Features are standardized with statistics of the
/// training data; the bias is an extra constant feature.
struct LinearSVMModel {
  std::vector<std::string> classes;          // sorted
  std::vector<std::vector<double>> weights;  // per class, feature dim
  std::vector<double> bias;                  // per class
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;
  SvmOptions options;
  std::size_t iterations = 0;  // updates per class

  std::vector<double> decision(std::span<const double> x) const;
  /// Highest decision value; ties go to the earliest class.
  const std::string& predict(std::span<const double> x) const;
};

/// Pegasos-style primal subgradient descent on the L2-regularized hinge
/// loss with lambda = 1 / (C n), one shuffled pass per epoch.
LinearSVMModel train_linear_svm(const std::vector<std::vector<double>>& features,
                                const std::vector<std::string>& labels, const SvmOptions& options);

struct SetAccuracy {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy() const { return total ? static_cast<double>(correct) / total : 0.0; }
};

struct LooResult {
  std::map<std::string, SetAccuracy> per_set;
  double pooled = 0.0;  // correct / total over every sample
  double macro = 0.0;   // mean of per-set accuracies
};

/// Leave-one-out within each set_id: every held-out target is predicted by a
/// model trained on all remaining targets of that set, across speakers.
LooResult loo_classification_accuracy(const TargetTable& table, const SvmOptions& options,
                                      unsigned threads = 1);

// ---------------------------------------------------------------- voicing

struct VoicingSpec {
  std::vector<std::pair<std::string, std::string>> anchor_pairs;
  std::vector<std::string> contrast_labels;
  /// Unordered pairs scored against the anchor distance. Empty means every
  /// pair of distinct labels involving at least one contrast label.
  std::vector<std::pair<std::string, std::string>> contrast_pairs;

  void validate() const;
  std::vector<std::pair<std::string, std::string>> effective_contrast_pairs() const;
};

VoicingSpec parse_voicing_spec(std::istream& in);

struct VoicingResult {
  double score = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::map<std::string, double> per_unit;  // speaker -> score
};

/// Per speaker: d_max is the largest target distance among anchor pairs; a
/// contrast pair is correct unless its distance falls below d_max. Targets
/// with repeated labels are averaged first. Rows with other labels are
/// ignored.
VoicingResult voicing_score(const TargetTable& table, const VoicingSpec& spec);

// ---------------------------------------------------------------- projection

/// in_dim x out_dim Gaussian matrix with N(0, 1/in_dim) entries.
Matrix random_projection_matrix(std::size_t in_dim, std::size_t out_dim, std::uint64_t seed);

FeatureTrajectory project(const FeatureTrajectory& traj, const Matrix& projection);

TrajectoryMap random_projection_baseline(const TrajectoryMap& features, std::size_t out_dim,
                                         std::uint64_t seed);

// ---------------------------------------------------------------- metrics

struct TrajectoryMetrics {
  double mse = 0.0;
  std::vector<std::optional<double>> correlation;  // per channel, unset if constant
  std::optional<double> mean_correlation;           // over defined channels
};

/// Pairs by id over the reference map.
TrajectoryMetrics trajectory_metrics(const TrajectoryMap& predicted, const TrajectoryMap& reference);

}  // namespace aai
