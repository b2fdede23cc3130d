#include "aai/eval.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>

#include "json.hpp"

#include "aai/error.hpp"
#include "aai/parallel.hpp"
#include "aai/random.hpp"

namespace aai {

void TargetTable::validate() const {
  if (rows.empty()) return;
  const std::size_t dim = rows.front().vector.size();
  for (const auto& r : rows) {
    if (r.vector.size() != dim) {
      throw DataError("target '" + r.id + "' has dimension " + std::to_string(r.vector.size()) +
                      ", expected " + std::to_string(dim));
    }
  }
}

void write_target_table(const TargetTable& table, std::ostream& out) {
  for (const auto& r : table.rows) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["speaker"] = r.speaker;
    j["label"] = r.label;
    j["set_id"] = r.set_id;
    j["frame"] = r.frame;
    j["vector"] = r.vector;
    out << j.dump() << '\n';
  }
}

TargetTable read_target_table(std::istream& in) {
  TargetTable table;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(text);
      TargetRow r;
      r.id = j.at("id").get<std::string>();
      r.speaker = j.at("speaker").get<std::string>();
      r.label = j.at("label").get<std::string>();
      r.set_id = j.at("set_id").get<std::string>();
      r.frame = j.at("frame").get<std::size_t>();
      r.vector = j.at("vector").get<std::vector<double>>();
      table.rows.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("target table line " + std::to_string(line) + ": " + e.what());
    }
  }
  table.validate();
  return table;
}

TargetTable build_targets(const Manifest& manifest, const TrajectoryMap& trajectories,
                          CostMetric metric, const Preprocess& preprocess, unsigned threads) {
  // Shape and rate must agree within a set.
  std::map<std::string, const FeatureTrajectory*> set_first;
  for (const auto& r : manifest.records) {
    const auto it = trajectories.find(r.id);
    if (it == trajectories.end()) throw DataError("sample '" + r.id + "': trajectory missing");
    auto [first, inserted] = set_first.emplace(r.set_id, &it->second);
    if (!inserted) {
      if (first->second->channels() != it->second.channels()) {
        throw DataError("sample '" + r.id + "': channel count differs within set '" + r.set_id + "'");
      }
      if (first->second->frame_rate_hz() != it->second.frame_rate_hz()) {
        throw DataError("sample '" + r.id + "': frame rate differs within set '" + r.set_id + "'");
      }
    }
  }

  TrajectoryMap work;
  if (preprocess.znorm) {
    work = znorm_by_speaker(manifest, trajectories).trajectories;
  } else {
    for (const auto& r : manifest.records) work.emplace(r.id, trajectories.at(r.id));
  }
  if (preprocess.lowpass) {
    std::map<double, SosFilter> filters;
    for (auto& [id, traj] : work) {
      auto f = filters.find(traj.frame_rate_hz());
      if (f == filters.end()) {
        FilterSpec spec{preprocess.lowpass->first, preprocess.lowpass->second, traj.frame_rate_hz()};
        f = filters.emplace(traj.frame_rate_hz(), design_butterworth_lowpass(spec)).first;
      }
      try {
        traj = filtfilt(f->second, traj);
      } catch (const DataError& e) {
        throw DataError("sample '" + id + "': " + e.what());
      }
    }
  }

  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < manifest.records.size(); ++k) {
    const auto& r = manifest.records[k];
    groups[{r.speaker, r.set_id}].push_back(k);
  }

  TargetTable table;
  table.rows.resize(manifest.records.size());
  parallel_for(manifest.records.size(), threads, [&](std::size_t k) {
    const auto& r = manifest.records[k];
    const auto& group = groups.at({r.speaker, r.set_id});
    SampleRefs others;
    for (std::size_t m : group) {
      if (m != k) others.push_back(&work.at(manifest.records[m].id));
    }
    if (others.empty()) {
      throw DataError("sample '" + r.id + "': speaker '" + r.speaker +
                      "' has no other sample in set '" + r.set_id + "' to align against");
    }
    const TargetPoint t = extract_target(work.at(r.id), others, metric);
    table.rows[k] = TargetRow{r.id, r.speaker, r.label, r.set_id, t.frame, t.vector};
  });
  return table;
}

std::vector<double> LinearSVMModel::decision(std::span<const double> x) const {
  std::vector<double> out(classes.size());
  for (std::size_t k = 0; k < classes.size(); ++k) {
    double s = bias[k];
    for (std::size_t d = 0; d < x.size(); ++d) {
      s += weights[k][d] * (x[d] - feature_mean[d]) / feature_scale[d];
    }
    out[k] = s;
  }
  return out;
}

const std::string& LinearSVMModel::predict(std::span<const double> x) const {
  const auto scores = decision(x);
  return classes[argmax_earliest(scores)];
}

LinearSVMModel train_linear_svm(const std::vector<std::vector<double>>& features,
                                const std::vector<std::string>& labels, const SvmOptions& options) {
  if (features.size() != labels.size()) throw DataError("svm: feature/label count mismatch");
  if (features.empty()) throw DataError("svm: no training data");
  if (!(options.c > 0.0)) throw DataError("svm: C must be positive");
  const std::size_t n = features.size();
  const std::size_t dim = features.front().size();
  for (const auto& f : features) {
    if (f.size() != dim) throw DataError("svm: inconsistent feature dimension");
  }

  LinearSVMModel model;
  model.options = options;
  const std::set<std::string> distinct(labels.begin(), labels.end());
  model.classes.assign(distinct.begin(), distinct.end());
  if (model.classes.size() < 2) throw DataError("svm: need at least two classes");

  model.feature_mean.assign(dim, 0.0);
  model.feature_scale.assign(dim, 0.0);
  for (const auto& f : features) {
    for (std::size_t d = 0; d < dim; ++d) model.feature_mean[d] += f[d];
  }
  for (double& m : model.feature_mean) m /= static_cast<double>(n);
  for (const auto& f : features) {
    for (std::size_t d = 0; d < dim; ++d) {
      const double z = f[d] - model.feature_mean[d];
      model.feature_scale[d] += z * z;
    }
  }
  for (double& s : model.feature_scale) {
    s = std::sqrt(s / static_cast<double>(n));
    if (!(s > 1e-12)) s = 1.0;
  }

  // Standardized design with a trailing constant column for the bias.
  std::vector<std::vector<double>> x(n, std::vector<double>(dim + 1, 1.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dim; ++d) {
      x[i][d] = (features[i][d] - model.feature_mean[d]) / model.feature_scale[d];
    }
  }

  const double lambda = 1.0 / (options.c * static_cast<double>(n));
  const double radius = 1.0 / std::sqrt(lambda);
  std::vector<std::size_t> order(n);
  for (const auto& cls : model.classes) {
    std::vector<double> w(dim + 1, 0.0);
    Rng rng(options.seed);
    std::iota(order.begin(), order.end(), 0);
    std::size_t t = 0;
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
      rng.shuffle(order);
      for (std::size_t i : order) {
        ++t;
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        const double y = labels[i] == cls ? 1.0 : -1.0;
        const double margin = y * dot(w, x[i]);
        const double shrink = 1.0 - eta * lambda;
        for (double& v : w) v *= shrink;
        if (margin < 1.0) {
          for (std::size_t d = 0; d <= dim; ++d) w[d] += eta * y * x[i][d];
        }
        const double norm = std::sqrt(dot(w, w));
        if (norm > radius) {
          for (double& v : w) v *= radius / norm;
        }
      }
    }
    model.iterations = t;
    model.bias.push_back(w[dim]);
    w.pop_back();
    model.weights.push_back(std::move(w));
  }
  return model;
}

LooResult loo_classification_accuracy(const TargetTable& table, const SvmOptions& options,
                                      unsigned threads) {
  table.validate();
  std::map<std::string, std::vector<std::size_t>> sets;
  for (std::size_t k = 0; k < table.rows.size(); ++k) sets[table.rows[k].set_id].push_back(k);
  if (sets.empty()) throw DataError("loo: empty target table");

  LooResult result;
  std::size_t correct = 0;
  std::size_t total = 0;
  for (const auto& [set_id, members] : sets) {
    std::map<std::string, std::size_t> counts;
    for (std::size_t k : members) ++counts[table.rows[k].label];
    for (const auto& [label, count] : counts) {
      if (count < 2) {
        throw DataError("loo: label '" + label + "' in set '" + set_id + "' has only " +
                        std::to_string(count) + " sample");
      }
    }
    std::vector<char> hit(members.size(), 0);
    parallel_for(members.size(), threads, [&](std::size_t held) {
      std::vector<std::vector<double>> x;
      std::vector<std::string> y;
      for (std::size_t m = 0; m < members.size(); ++m) {
        if (m == held) continue;
        x.push_back(table.rows[members[m]].vector);
        y.push_back(table.rows[members[m]].label);
      }
      const auto model = train_linear_svm(x, y, options);
      const auto& row = table.rows[members[held]];
      hit[held] = model.predict(row.vector) == row.label;
    });
    SetAccuracy acc;
    acc.total = members.size();
    acc.correct = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
    correct += acc.correct;
    total += acc.total;
    result.per_set.emplace(set_id, acc);
  }
  result.pooled = static_cast<double>(correct) / static_cast<double>(total);
  double macro = 0.0;
  for (const auto& [id, acc] : result.per_set) macro += acc.accuracy();
  result.macro = macro / static_cast<double>(result.per_set.size());
  return result;
}

void VoicingSpec::validate() const {
  if (anchor_pairs.empty()) throw DataError("voicing spec needs at least one anchor pair");
  std::set<std::pair<std::string, std::string>> anchors;
  for (const auto& [a, b] : anchor_pairs) {
    if (a == b) throw DataError("voicing anchor pair repeats label '" + a + "'");
    anchors.emplace(std::min(a, b), std::max(a, b));
  }
  for (const auto& [a, b] : effective_contrast_pairs()) {
    if (a == b) throw DataError("voicing contrast pair repeats label '" + a + "'");
    if (anchors.contains({std::min(a, b), std::max(a, b)})) {
      throw DataError("pair (" + a + ", " + b + ") is both an anchor and a contrast");
    }
  }
  if (effective_contrast_pairs().empty()) throw DataError("voicing spec has no contrast pairs");
}

std::vector<std::pair<std::string, std::string>> VoicingSpec::effective_contrast_pairs() const {
  if (!contrast_pairs.empty()) return contrast_pairs;
  std::vector<std::string> pool;
  for (const auto& [a, b] : anchor_pairs) {
    pool.push_back(a);
    pool.push_back(b);
  }
  pool.insert(pool.end(), contrast_labels.begin(), contrast_labels.end());
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  const std::set<std::string> contrast(contrast_labels.begin(), contrast_labels.end());
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (std::size_t j = i + 1; j < pool.size(); ++j) {
      if (contrast.contains(pool[i]) || contrast.contains(pool[j])) out.emplace_back(pool[i], pool[j]);
    }
  }
  return out;
}

VoicingSpec parse_voicing_spec(std::istream& in) {
  VoicingSpec spec;
  try {
    const auto j = nlohmann::json::parse(in);
    for (const auto& p : j.at("anchor_pairs")) {
      spec.anchor_pairs.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
    }
    if (j.contains("contrast_labels")) {
      spec.contrast_labels = j.at("contrast_labels").get<std::vector<std::string>>();
    }
    if (j.contains("contrast_pairs")) {
      for (const auto& p : j.at("contrast_pairs")) {
        spec.contrast_pairs.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("voicing spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

VoicingResult voicing_score(const TargetTable& table, const VoicingSpec& spec) {
  spec.validate();
  table.validate();
  const auto contrasts = spec.effective_contrast_pairs();
  std::set<std::string> needed;
  for (const auto& [a, b] : spec.anchor_pairs) needed.insert({a, b});
  for (const auto& [a, b] : contrasts) needed.insert({a, b});

  // speaker -> label -> (sum vector, count)
  std::map<std::string, std::map<std::string, std::pair<std::vector<double>, std::size_t>>> units;
  for (const auto& r : table.rows) {
    if (!needed.contains(r.label)) continue;
    auto& slot = units[r.speaker][r.label];
    if (slot.first.empty()) slot.first.assign(r.vector.size(), 0.0);
    for (std::size_t d = 0; d < r.vector.size(); ++d) slot.first[d] += r.vector[d];
    ++slot.second;
  }
  if (units.empty()) throw DataError("voicing: no targets carry the spec's labels");

  VoicingResult result;
  for (auto& [speaker, labels] : units) {
    for (const auto& label : needed) {
      if (!labels.contains(label)) {
        throw DataError("voicing: speaker '" + speaker + "' has no target for label '" + label + "'");
      }
    }
    for (auto& [label, slot] : labels) {
      for (double& v : slot.first) v /= static_cast<double>(slot.second);
    }
    auto dist = [&](const std::string& a, const std::string& b) {
      return euclidean_distance(labels.at(a).first, labels.at(b).first);
    };
    double d_max = 0.0;
    for (const auto& [a, b] : spec.anchor_pairs) d_max = std::max(d_max, dist(a, b));
    std::size_t ok = 0;
    for (const auto& [a, b] : contrasts) ok += dist(a, b) < d_max ? 0 : 1;
    result.correct += ok;
    result.total += contrasts.size();
    result.per_unit[speaker] = static_cast<double>(ok) / static_cast<double>(contrasts.size());
  }
  result.score = static_cast<double>(result.correct) / static_cast<double>(result.total);
  return result;
}

Matrix random_projection_matrix(std::size_t in_dim, std::size_t out_dim, std::uint64_t seed) {
  if (in_dim == 0 || out_dim == 0) throw DataError("projection dimensions must be positive");
  Rng rng(seed);
  Matrix p(in_dim, out_dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(in_dim));
  for (double& v : p.data()) v = scale * rng.normal();
  return p;
}

FeatureTrajectory project(const FeatureTrajectory& traj, const Matrix& projection) {
  if (traj.channels() != projection.rows()) {
    throw DataError("projection expects " + std::to_string(projection.rows()) + " channels, got " +
                    std::to_string(traj.channels()));
  }
  Matrix out(traj.frames(), projection.cols());
  for (std::size_t i = 0; i < traj.frames(); ++i) {
    const auto row = traj.frame(i);
    for (std::size_t k = 0; k < row.size(); ++k) {
      const double v = row[k];
      for (std::size_t o = 0; o < projection.cols(); ++o) out(i, o) += v * projection(k, o);
    }
  }
  return FeatureTrajectory(std::move(out), traj.frame_rate_hz());
}

TrajectoryMap random_projection_baseline(const TrajectoryMap& features, std::size_t out_dim,
                                         std::uint64_t seed) {
  if (features.empty()) return {};
  const Matrix p = random_projection_matrix(features.begin()->second.channels(), out_dim, seed);
  TrajectoryMap out;
  for (const auto& [id, traj] : features) out.emplace(id, project(traj, p));
  return out;
}

TrajectoryMetrics trajectory_metrics(const TrajectoryMap& predicted, const TrajectoryMap& reference) {
  if (reference.empty()) throw DataError("metrics: no reference trajectories");
  const std::size_t channels = reference.begin()->second.channels();
  double sq = 0.0;
  std::size_t count = 0;
  std::vector<double> sx(channels), sy(channels), sxx(channels), syy(channels), sxy(channels);
  std::vector<char> varies_p(channels, 0), varies_r(channels, 0);
  std::vector<double> first_p(channels), first_r(channels);
  std::size_t frames = 0;
  // Two passes for the correlation: means first, then centred moments.
  for (const auto& [id, ref] : reference) {
    const auto it = predicted.find(id);
    if (it == predicted.end()) throw DataError("metrics: no prediction for '" + id + "'");
    const auto& pred = it->second;
    if (pred.frames() != ref.frames() || pred.channels() != ref.channels() ||
        ref.channels() != channels) {
      throw DataError("metrics: shape mismatch for '" + id + "'");
    }
    for (std::size_t i = 0; i < ref.frames(); ++i) {
      for (std::size_t c = 0; c < channels; ++c) {
        const double p = pred.data()(i, c);
        const double r = ref.data()(i, c);
        sq += (p - r) * (p - r);
        if (frames == 0 && i == 0) {
          first_p[c] = p;
          first_r[c] = r;
        }
        varies_p[c] |= p != first_p[c];
        varies_r[c] |= r != first_r[c];
        sx[c] += p;
        sy[c] += r;
      }
    }
    frames += ref.frames();
    count += ref.frames() * channels;
  }
  for (std::size_t c = 0; c < channels; ++c) {
    sx[c] /= static_cast<double>(frames);
    sy[c] /= static_cast<double>(frames);
  }
  for (const auto& [id, ref] : reference) {
    const auto& pred = predicted.at(id);
    for (std::size_t i = 0; i < ref.frames(); ++i) {
      for (std::size_t c = 0; c < channels; ++c) {
        const double p = pred.data()(i, c) - sx[c];
        const double r = ref.data()(i, c) - sy[c];
        sxx[c] += p * p;
        syy[c] += r * r;
        sxy[c] += p * r;
      }
    }
  }
  TrajectoryMetrics m;
  m.mse = sq / static_cast<double>(count);
  double sum = 0.0;
  std::size_t defined = 0;
  for (std::size_t c = 0; c < channels; ++c) {
    if (!varies_p[c] || !varies_r[c]) {
      m.correlation.push_back(std::nullopt);
      continue;
    }
    const double r = sxy[c] / std::sqrt(sxx[c] * syy[c]);
    m.correlation.push_back(r);
    sum += r;
    ++defined;
  }
  if (defined) m.mean_correlation = sum / static_cast<double>(defined);
  return m;
}

}  // namespace aai
