#pragma once

// Batched forward/backward passes shared by inference and training.

#include <vector>

#include "slackcast/model.hpp"

namespace slackcast::model::detail {

/// Neighbor activations for the columns of one batch.
struct SteerBatch {
  std::size_t k = 0;
  std::vector<Mat> h;  // per injection: d_h x (n * k) unsteered neighbor activations
  Mat w;               // k x n
};

struct Cache {
  Mat x;               // normalized input
  std::vector<Mat> h;  // h[0] .. h[B], post-injection
  std::vector<Mat> z;  // tanh activations per block
  std::vector<Mat> v;  // neighbor residual per injection
  Mat hz;              // head hidden activation
  Mat y;
};

Mat normalize(const Model& m, const Mat& x);

/// Block activations h^(1..B) without steering, input already normalized.
std::vector<Mat> encode_batch(const Model& m, const Mat& xn);

/// Final representation; steering applied when `s` is non-null.
Mat represent(const Model& m, const Mat& xn, const SteerBatch* s, Cache* cache);

Mat head_out(const Model& m, const Mat& h, Mat* hidden);

struct GradMask {
  bool encoder = true;
  bool head = true;
  bool gamma = false;
};

/// Accumulates gradients of 0.5 * sum(dy .* y) style losses: `dy` is
/// dLoss/dy for the batch. Requires a cache filled by represent() and
/// head_out().
void backward(const Model& m, const Cache& c, const Mat& dy, const SteerBatch* s, const GradMask& mask,
              Vec& g_encoder, Vec& g_head, Vec& g_gamma);

/// Head-only backward from fixed features.
void backward_head(const Model& m, const Mat& h, const Mat& hidden, const Mat& dy, Vec& g_head);

struct Offsets {
  std::size_t w_in, b_in;
  std::vector<std::size_t> w1, b1, w2, b2;
  std::size_t v1, c1, v2, c2;  // head
};
Offsets offsets(const Shape& s);

void check_finite(const Mat& m, const char* what);

}  // namespace slackcast::model::detail
