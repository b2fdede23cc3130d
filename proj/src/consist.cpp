#include "aai/consist.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "json.hpp"

#include "aai/align.hpp"
#include "aai/error.hpp"

namespace aai {
namespace {

void check_finite(const Matrix& m, const char* name) {
  for (double v : m.data()) {
    if (!std::isfinite(v)) throw DataError(std::string(name) + " contains a non-finite value");
  }
}

}  // namespace

void ConsistencyBatch::validate() const {
  const std::size_t n = y_hat.rows();
  const std::size_t m = y_hat_star.rows();
  if (n == 0 || m == 0 || y_hat.cols() == 0) throw DataError("consistency batch: empty predictions");
  if (y_frozen.rows() != n || y_frozen.cols() != y_hat.cols()) {
    throw DataError("consistency batch: y_frozen is " + std::to_string(y_frozen.rows()) + "x" +
                    std::to_string(y_frozen.cols()) + ", y_hat is " + std::to_string(n) + "x" +
                    std::to_string(y_hat.cols()));
  }
  if (y_hat_star.cols() != y_hat.cols()) {
    throw DataError("consistency batch: y_hat_star has " + std::to_string(y_hat_star.cols()) +
                    " channels, y_hat has " + std::to_string(y_hat.cols()));
  }
  if (phi.size() != n) {
    throw DataError("consistency batch: phi has " + std::to_string(phi.size()) + " entries for " +
                    std::to_string(n) + " frames");
  }
  if (c.size() != n) {
    throw DataError("consistency batch: c has " + std::to_string(c.size()) + " entries for " +
                    std::to_string(n) + " frames");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (phi[i] >= m) {
      throw DataError("consistency batch: phi[" + std::to_string(i) + "] = " + std::to_string(phi[i]) +
                      " is out of range for " + std::to_string(m) + " frames");
    }
    if (i > 0 && phi[i] < phi[i - 1]) {
      throw DataError("consistency batch: phi decreases at index " + std::to_string(i));
    }
    if (!std::isfinite(c[i])) throw DataError("consistency batch: c is not finite");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DataError("consistency batch: alpha must lie in [0, 1]");
  check_finite(y_hat, "y_hat");
  check_finite(y_frozen, "y_frozen");
  check_finite(y_hat_star, "y_hat_star");
}

double ConsistencyBatch::weight(std::size_t i) const {
  return clamp_negative_weights ? std::max(0.0, c[i]) : c[i];
}

double self_training_loss(const ConsistencyBatch& batch) {
  batch.validate();
  double sum = 0.0;
  for (std::size_t i = 0; i < batch.y_hat.rows(); ++i) {
    sum += squared_distance(batch.y_hat.row(i), batch.y_frozen.row(i));
  }
  return sum / static_cast<double>(batch.y_hat.rows());
}

double consistency_loss(const ConsistencyBatch& batch) {
  batch.validate();
  double sum = 0.0;
  for (std::size_t i = 0; i < batch.y_hat.rows(); ++i) {
    sum += batch.weight(i) * squared_distance(batch.y_hat.row(i), batch.y_hat_star.row(batch.phi[i]));
  }
  return sum / static_cast<double>(batch.y_hat.rows());
}

double total_loss(const ConsistencyBatch& batch) {
  return batch.alpha * self_training_loss(batch) + (1.0 - batch.alpha) * consistency_loss(batch);
}

ConsistencyGrad total_loss_grad(const ConsistencyBatch& batch) {
  batch.validate();
  const std::size_t n = batch.y_hat.rows();
  const std::size_t dim = batch.y_hat.cols();
  const double st = 2.0 * batch.alpha / static_cast<double>(n);
  const double cs = 2.0 * (1.0 - batch.alpha) / static_cast<double>(n);
  ConsistencyGrad g{Matrix(n, dim), Matrix(batch.y_hat_star.rows(), dim)};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = batch.phi[i];
    const double w = cs * batch.weight(i);
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = batch.y_hat(i, d) - batch.y_hat_star(j, d);
      g.y_hat(i, d) = st * (batch.y_hat(i, d) - batch.y_frozen(i, d)) + w * diff;
      g.y_hat_star(j, d) -= w * diff;
    }
  }
  return g;
}

ConsistencyBatch build_batch_from_features(const FeatureTrajectory& w, const FeatureTrajectory& w_star,
                                           Matrix y_hat, Matrix y_frozen, Matrix y_hat_star,
                                           double alpha) {
  if (w.frames() != y_hat.rows()) {
    throw DataError("reference features have " + std::to_string(w.frames()) +
                    " frames but predictions have " + std::to_string(y_hat.rows()));
  }
  if (w_star.frames() != y_hat_star.rows()) {
    throw DataError("paired features have " + std::to_string(w_star.frames()) +
                    " frames but predictions have " + std::to_string(y_hat_star.rows()));
  }
  const AlignmentResult a = dtw(w, w_star, CostMetric::cosine_distance);
  ConsistencyBatch batch{std::move(y_hat), std::move(y_frozen), std::move(y_hat_star), a.phi,
                         a.weights, alpha};
  batch.validate();
  return batch;
}

BatchSidecar read_sidecar(std::istream& in) {
  BatchSidecar s;
  try {
    const auto j = nlohmann::json::parse(in);
    s.phi = j.at("phi").get<std::vector<std::size_t>>();
    s.c = j.at("c").get<std::vector<double>>();
    if (j.contains("alpha")) s.alpha = j.at("alpha").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("batch sidecar: ") + e.what());
  }
  return s;
}

void write_sidecar(const BatchSidecar& sidecar, std::ostream& out) {
  nlohmann::ordered_json j;
  j["phi"] = sidecar.phi;
  j["c"] = sidecar.c;
  j["alpha"] = sidecar.alpha;
  out << j.dump() << '\n';
}

}  // namespace aai
