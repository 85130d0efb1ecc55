#pragma once

// Inference flow: source -> approximate report -> fingerprint -> retrieve
// -> steer -> head -> inverse target transform.

#include <string_view>
#include <vector>

#include "slackcast/bank.hpp"
#include "slackcast/model.hpp"
#include "slackcast/training.hpp"

namespace slackcast::model {

/// One module under one timing setting.
struct Sample {
  stage1::Fingerprint fp;
  double clock_period = 1000.0;
  double corner_scale = 1.0;
};

struct Prediction {
  double wns_ps = 0.0;
  double tns_ps = 0.0;  // <= 0
};

/// kInputDim x N encoder inputs.
Mat sample_inputs(const std::vector<Sample>& samples);

/// Top-k neighbors of every sample. Neighbor inputs use the sample's own
/// clock and corner, so only the structure comes from the bank.
NeighborTable neighbor_table(const retrieval::Bank& bank, const std::vector<Sample>& samples, std::size_t k);

/// Training set in transformed-target space.
Dataset make_dataset(const std::vector<Sample>& samples, const std::vector<double>& wns,
                     const std::vector<double>& tns);

/// Batch prediction. Retrieval is skipped for an unsteered model; a
/// steered one needs the bank it was trained against (ChecksumMismatch
/// otherwise). Results do not depend on `jobs`.
std::vector<Prediction> predict_samples(const Model& model, const retrieval::Bank* bank,
                                        const std::vector<Sample>& samples, unsigned jobs = 1);

Prediction predict(const Model& model, const retrieval::Bank* bank, std::string_view source, double clock_period,
                   double corner_scale);

}  // namespace slackcast::model
