#include "aai/align.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aai/error.hpp"
#include "aai/parallel.hpp"

namespace aai {

std::string to_string(CostMetric metric) {
  return metric == CostMetric::euclidean ? "euclidean" : "cosine";
}

CostMetric parse_metric(const std::string& text) {
  if (text == "euclidean") return CostMetric::euclidean;
  if (text == "cosine" || text == "cosine_distance") return CostMetric::cosine_distance;
  throw ParseError("unknown metric '" + text + "' (expected euclidean or cosine)");
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) throw DataError("cosine similarity of a zero-norm frame");
  return dot(a, b) / (na * nb);
}

double local_cost(std::span<const double> a, std::span<const double> b, CostMetric metric) {
  if (metric == CostMetric::euclidean) return euclidean_distance(a, b);
  return 1.0 - cosine_similarity(a, b);
}

AlignmentResult dtw(const FeatureTrajectory& reference, const FeatureTrajectory& query,
                    CostMetric metric) {
  const std::size_t rows = reference.frames();
  const std::size_t cols = query.frames();
  if (rows == 0 || cols == 0) throw DataError("dtw: empty input");
  if (reference.channels() != query.channels()) {
    throw DataError("dtw: channel mismatch (" + std::to_string(reference.channels()) + " vs " +
                    std::to_string(query.channels()) + ")");
  }

  Matrix cost(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      cost(i, j) = local_cost(reference.frame(i), query.frame(j), metric);
    }
  }

  constexpr double inf = std::numeric_limits<double>::infinity();
  Matrix acc(rows, cols, inf);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      double best;
      if (i == 0 && j == 0) {
        acc(i, j) = cost(i, j);
        continue;
      }
      best = inf;
      if (i > 0 && j > 0) best = acc(i - 1, j - 1);
      if (i > 0) best = std::min(best, acc(i - 1, j));
      if (j > 0) best = std::min(best, acc(i, j - 1));
      acc(i, j) = best + cost(i, j);
    }
  }

  AlignmentResult result;
  std::size_t i = rows - 1;
  std::size_t j = cols - 1;
  result.path.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const double diag = acc(i - 1, j - 1);
      const double up = acc(i - 1, j);
      const double left = acc(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    } else if (i > 0) {
      --i;
    } else {
      --j;
    }
    result.path.emplace_back(i, j);
  }
  std::reverse(result.path.begin(), result.path.end());

  result.local_costs.reserve(result.path.size());
  for (auto [pi, pj] : result.path) result.local_costs.push_back(cost(pi, pj));
  result.total_cost = acc(rows - 1, cols - 1);

  result.phi.assign(rows, 0);
  for (auto [pi, pj] : result.path) result.phi[pi] = pj;
  if (metric == CostMetric::cosine_distance) {
    result.weights.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) result.weights[r] = 1.0 - cost(r, result.phi[r]);
  }
  return result;
}

std::vector<double> avg_local_cost_profile(const FeatureTrajectory& reference,
                                           const SampleRefs& others, CostMetric metric) {
  if (others.empty()) throw DataError("local cost profile needs at least one other sample");
  const std::size_t frames = reference.frames();
  std::vector<double> profile(frames, 0.0);
  std::vector<double> sum(frames);
  std::vector<std::size_t> hits(frames);
  for (const FeatureTrajectory* other : others) {
    const AlignmentResult a = dtw(reference, *other, metric);
    std::fill(sum.begin(), sum.end(), 0.0);
    std::fill(hits.begin(), hits.end(), 0);
    for (std::size_t k = 0; k < a.path.size(); ++k) {
      sum[a.path[k].first] += a.local_costs[k];
      ++hits[a.path[k].first];
    }
    for (std::size_t f = 0; f < frames; ++f) profile[f] += sum[f] / static_cast<double>(hits[f]);
  }
  for (double& v : profile) v /= static_cast<double>(others.size());
  return profile;
}

std::size_t argmax_earliest(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] > values[best]) best = k;
  }
  return best;
}

TargetPoint extract_target(const FeatureTrajectory& reference, const SampleRefs& others,
                           CostMetric metric) {
  const auto profile = avg_local_cost_profile(reference, others, metric);
  TargetPoint t;
  t.frame = argmax_earliest(profile);
  const auto row = reference.frame(t.frame);
  t.vector.assign(row.begin(), row.end());
  return t;
}

namespace {

double mean_path_similarity(const FeatureTrajectory& a, const FeatureTrajectory& b) {
  const AlignmentResult r = dtw(a, b, CostMetric::cosine_distance);
  double s = 0.0;
  for (double c : r.local_costs) s += 1.0 - c;
  return s / static_cast<double>(r.local_costs.size());
}

}  // namespace

SimilarityMatrix similarity_matrix(const std::map<std::string, std::vector<SpeakerSample>>& groups,
                                   unsigned threads) {
  if (groups.size() < 2) throw DataError("similarity matrix needs at least two labels");
  SimilarityMatrix out;
  for (const auto& [label, samples] : groups) {
    if (samples.empty()) throw DataError("label '" + label + "' has no samples");
    out.labels.push_back(label);
  }
  const std::size_t n = out.labels.size();
  out.values = Matrix(n, n);

  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) cells.emplace_back(a, b);
  }
  std::vector<double> results(cells.size());
  parallel_for(cells.size(), threads, [&](std::size_t k) {
    const auto& ga = groups.at(out.labels[cells[k].first]);
    const auto& gb = groups.at(out.labels[cells[k].second]);
    double sum = 0.0;
    std::size_t pairs = 0;
    for (const auto& sa : ga) {
      for (const auto& sb : gb) {
        if (sa.speaker == sb.speaker) continue;
        sum += 0.5 * (mean_path_similarity(*sa.trajectory, *sb.trajectory) +
                      mean_path_similarity(*sb.trajectory, *sa.trajectory));
        ++pairs;
      }
    }
    if (pairs == 0) {
      throw DataError("labels '" + out.labels[cells[k].first] + "' and '" +
                      out.labels[cells[k].second] + "' have no cross-speaker pairs");
    }
    results[k] = sum / static_cast<double>(pairs);
  });
  for (std::size_t k = 0; k < cells.size(); ++k) {
    out.values(cells[k].first, cells[k].second) = results[k];
    out.values(cells[k].second, cells[k].first) = results[k];
  }
  return out;
}

}  // namespace aai
