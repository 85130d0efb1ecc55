#pragma once

// Stage-2 regressor: residual encoder, retrieval steering, 2-output head.
//
// Parameters live in flat row-major vectors (encoder, head, gamma) so the
// optimizer, checksums and checkpoints treat them uniformly.
//
//   x~      = (x - mean) / scale                  input normalizer
//   h0      = W_in x~ + b_in
//   h_l     = h_{l-1} + W2_l tanh(W1_l h_{l-1} + b1_l) + b2_l      l = 1..B
//   h_l    += share * gamma (.) sum_i w_i (h_l^(i) - h_l)           steering, if injected at l
//   y       = V2 tanh(V1 h_B + c1) + c2                             head, transformed targets

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "slackcast/stage1.hpp"

namespace slackcast::model {

inline constexpr int kInputDim = static_cast<int>(stage1::kFeatureDim) + 2;
inline constexpr int kCheckpointVersion = 1;

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// log1p(phi) followed by clock_period / 1000 and the corner scale.
Vec encoder_input(std::span<const double> phi, double clock_period, double corner_scale);

/// Signed log transform applied to WNS/TNS in picoseconds.
double to_target(double y);
double from_target(double z);

struct Shape {
  int d_h = 64;
  int blocks = 8;
  int hidden = 32;

  std::size_t encoder_size() const;
  std::size_t head_size() const;
};

enum class GammaMode { Scalar, Diagonal };

struct Injection {
  int block = 8;  // 1-based
  double share = 1.0;
};

struct SteeringConfig {
  std::size_t k = 3;
  GammaMode mode = GammaMode::Diagonal;
  double gamma0 = 0.10;  // scalar mode
  std::vector<Injection> injections{{8, 1.0}};

  /// Throws BadConfig unless 1 <= block <= blocks, shares lie in [0, 1]
  /// and sum to 1 within 1e-9, and k >= 1.
  void validate(int blocks) const;
};

/// Read-only views of the flat parameter vectors.
struct EncoderView {
  Shape shape;
  const double* p = nullptr;

  Eigen::Map<const RowMat> w_in() const;
  Eigen::Map<const Vec> b_in() const;
  Eigen::Map<const RowMat> w1(int block) const;  // block is 0-based here
  Eigen::Map<const Vec> b1(int block) const;
  Eigen::Map<const RowMat> w2(int block) const;
  Eigen::Map<const Vec> b2(int block) const;
};

struct HeadView {
  Shape shape;
  const double* p = nullptr;

  Eigen::Map<const RowMat> w1() const;
  Eigen::Map<const Vec> b1() const;
  Eigen::Map<const RowMat> w2() const;
  Eigen::Map<const Vec> b2() const;
};

struct Model {
  Shape shape;
  Vec in_mean;   // kInputDim
  Vec in_scale;  // kInputDim
  Vec encoder;   // flat, row-major weights
  Vec head;
  Vec gamma;  // d_h; the effective per-channel gain
  SteeringConfig steering;
  bool steered = false;
  std::uint64_t bank_checksum = 0;

  EncoderView encoder_view() const { return {shape, encoder.data()}; }
  HeadView head_view() const { return {shape, head.data()}; }

  std::uint64_t encoder_checksum() const;  // includes the normalizer
  std::uint64_t head_checksum() const;
  std::uint64_t gamma_checksum() const;
};

/// Random initialization; the normalizer starts as identity and steering
/// defaults to a single injection after the last block.
Model init_model(const Shape& shape, std::uint64_t seed);

/// Block activations h^(1..B) for one input (unsteered).
/// Throws NonFiniteActivation.
std::vector<Vec> encode(const Model& model, const Vec& x);

/// Final representation with the model's steering applied, given the
/// neighbors' encoder inputs and weights. Throws BadConfig when the
/// neighbor count differs from the weight count.
Vec steer(const Model& model, const Vec& x, const std::vector<Vec>& neighbors, const std::vector<double>& weights);

/// Head output in transformed-target space.
Eigen::Vector2d head_forward(const Model& model, const Vec& h);

nlohmann::json to_json(const Model& model);
Model model_from_json(const nlohmann::json& j);
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace slackcast::model
