#pragma once

#include <iosfwd>
#include <vector>

#include "aai/featio.hpp"

namespace aai {

/// Inputs of the speaker-consistency objective. y_hat and y_frozen are the
/// trainable and frozen model outputs on the reference utterance (N x D);
/// y_hat_star is the trainable output on the paired utterance (M x D).
struct ConsistencyBatch {
  Matrix y_hat;
  Matrix y_frozen;
  Matrix y_hat_star;
  std::vector<std::size_t> phi;  // N entries, non-decreasing, < M
  std::vector<double> c;         // N alignment weights
  double alpha = 0.25;
  /// Clamp negative weights to zero before use.
  bool clamp_negative_weights = false;

  /// Throws DataError on any shape, range or finiteness violation.
  void validate() const;
  double weight(std::size_t i) const;
};

/// (1/N) sum_i |y_hat_i - y_frozen_i|^2
double self_training_loss(const ConsistencyBatch& batch);

/// (1/N) sum_i c_i |y_hat_i - y_hat_star_phi(i)|^2
double consistency_loss(const ConsistencyBatch& batch);

/// alpha * L_st + (1 - alpha) * L_c
double total_loss(const ConsistencyBatch& batch);

struct ConsistencyGrad {
  Matrix y_hat;       // N x D
  Matrix y_hat_star;  // M x D
};

/// Analytic gradient of total_loss. y_frozen is a constant.
ConsistencyGrad total_loss_grad(const ConsistencyBatch& batch);

/// Aligns the reference and paired encoder features with cosine DTW and
/// takes phi and the aligned cosine similarities as weights.
ConsistencyBatch build_batch_from_features(const FeatureTrajectory& w, const FeatureTrajectory& w_star,
                                           Matrix y_hat, Matrix y_frozen, Matrix y_hat_star,
                                           double alpha);

/// JSON sidecar: {"phi": [int...], "c": [float...], "alpha": float}.
struct BatchSidecar {
  std::vector<std::size_t> phi;
  std::vector<double> c;
  double alpha = 0.25;
};

BatchSidecar read_sidecar(std::istream& in);
void write_sidecar(const BatchSidecar& sidecar, std::ostream& out);

}  // namespace aai
