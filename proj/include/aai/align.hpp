#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "aai/featio.hpp"

namespace aai {

enum class CostMetric { euclidean, cosine_distance };

std::string to_string(CostMetric metric);
CostMetric parse_metric(const std::string& text);

/// Local cost between two frames. Cosine distance is 1 - cosine similarity
/// and throws DataError on a zero-norm frame.
double local_cost(std::span<const double> a, std::span<const double> b, CostMetric metric);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct AlignmentResult {
  std::vector<std::pair<std::size_t, std::size_t>> path;
  std::vector<double> local_costs;  // one per path step
  double total_cost = 0.0;
  /// phi[i] is the last query frame aligned to reference frame i.
  std::vector<std::size_t> phi;
  /// Cosine similarity of frames (i, phi[i]); filled for the cosine metric.
  std::vector<double> weights;
};

/// Unconstrained DTW with steps (1,0), (0,1), (1,1) and unit weights.
/// Backtracking prefers the diagonal, then (i-1, j), then (i, j-1).
AlignmentResult dtw(const FeatureTrajectory& reference, const FeatureTrajectory& query,
                    CostMetric metric);

using SampleRefs = std::vector<const FeatureTrajectory*>;

/// For each reference frame, the mean local cost of the path cells on that
/// frame, averaged over alignments against every sample in `others`.
std::vector<double> avg_local_cost_profile(const FeatureTrajectory& reference,
                                           const SampleRefs& others, CostMetric metric);

struct TargetPoint {
  std::size_t frame = 0;
  std::vector<double> vector;
};

/// Earliest index of the maximum.
std::size_t argmax_earliest(std::span<const double> values);

TargetPoint extract_target(const FeatureTrajectory& reference, const SampleRefs& others,
                           CostMetric metric);

struct SpeakerSample {
  std::string speaker;
  const FeatureTrajectory* trajectory = nullptr;
};

struct SimilarityMatrix {
  std::vector<std::string> labels;  // sorted
  Matrix values;                    // labels x labels
};

/// Average cross-speaker DTW-aligned cosine similarity between label groups.
/// Each pair is aligned in both directions and the two path means averaged.
SimilarityMatrix similarity_matrix(const std::map<std::string, std::vector<SpeakerSample>>& groups,
                                   unsigned threads = 1);

}  // namespace aai
