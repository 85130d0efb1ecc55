#pragma once

// Training schedule for the steered regressor:
//   fit_baseline  encoder + head on plain MSE
//   fit_gamma     encoder frozen; diagonal gamma and head on steered MSE
//   refit_head    encoder and gamma frozen; head only on steered features
//
// Losses are the mean squared error over both transformed targets. All
// phases use Adam with a seeded batch order, so a run is a pure function
// of (data, options).

#include <cstdint>
#include <vector>

#include "slackcast/model.hpp"

namespace slackcast::model {

struct Dataset {
  Mat x;  // kInputDim x N raw encoder inputs
  Mat y;  // 2 x N transformed targets

  std::size_t size() const { return static_cast<std::size_t>(x.cols()); }
};

/// Retrieved neighbors for every item of a Dataset: k encoder inputs and
/// softmax weights per item, drawn from the bank only.
struct NeighborTable {
  std::size_t k = 0;
  Mat x;  // kInputDim x (N * k), item n's neighbors in columns n*k .. n*k+k-1
  Mat w;  // k x N
};

struct TrainOptions {
  double lr = 1e-3;
  int batch = 32;
  int max_epochs = 500;
  int patience = 20;
  double holdout = 0.1;     // fraction held out for early stopping
  double tolerance = 1e-6;  // relative improvement counted as progress
  std::uint64_t seed = 1;
};

struct FitReport {
  double initial_loss = 0.0;  // full training set, before the phase
  double final_loss = 0.0;    // full training set, after the phase
  int epochs = 0;
  std::vector<double> history;  // per-epoch training loss
};

struct Gradients {
  Vec encoder;
  Vec head;
  Vec gamma;
};

/// Loss over the dataset and, when `grads` is non-null, its gradient with
/// respect to every parameter vector. Steering is applied when the model
/// is steered and `neighbors` is given; neighbor activations are treated as
/// constants, matching the frozen-encoder phases.
double loss_and_gradients(const Model& model, const Dataset& data, const NeighborTable* neighbors,
                          Gradients* grads);

double training_mse(const Model& model, const Dataset& data, const NeighborTable* neighbors);

/// Fits the input normalizer, then encoder and head jointly with early
/// stopping on a seeded holdout. Throws Divergence after restoring the
/// last finite parameters.
FitReport fit_baseline(Model& model, const Dataset& data, const TrainOptions& options);

/// Enables steering. Scalar mode sets gamma = gamma0 and trains nothing.
/// Diagonal mode starts from gamma = 0 and never ends with a training
/// loss above the starting one.
FitReport fit_gamma(Model& model, const Dataset& data, const NeighborTable& neighbors, const TrainOptions& options);

/// Refits the head on fixed steered features, warm-started from the
/// current head. The encoder and gamma are verified unchanged.
FitReport refit_head(Model& model, const Dataset& data, const NeighborTable* neighbors, const TrainOptions& options);

/// Steered (or plain) final representations for every item, d_h x N.
Mat features(const Model& model, const Dataset& data, const NeighborTable* neighbors);

}  // namespace slackcast::model
