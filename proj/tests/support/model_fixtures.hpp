#pragma once

// Small random models, datasets and a central-difference gradient checker.

#include <algorithm>
#include <cmath>
#include <random>

#include "slackcast/training.hpp"

namespace slackcast::testing {

inline model::Dataset random_dataset(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  model::Dataset d;
  d.x = model::Mat(model::kInputDim, n);
  d.y = model::Mat(2, n);
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < model::kInputDim; ++r) d.x(r, c) = g(rng);
    d.y(0, c) = g(rng);
    d.y(1, c) = g(rng) - 2.0;
  }
  return d;
}

inline model::NeighborTable random_table(std::mt19937_64& rng, int n, std::size_t k) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.1, 1.0);
  model::NeighborTable t;
  t.k = k;
  t.x = model::Mat(model::kInputDim, n * static_cast<int>(k));
  for (int c = 0; c < t.x.cols(); ++c)
    for (int r = 0; r < model::kInputDim; ++r) t.x(r, c) = g(rng);
  t.w = model::Mat(static_cast<int>(k), n);
  for (int c = 0; c < n; ++c) {
    double total = 0;
    for (std::size_t i = 0; i < k; ++i) total += t.w(static_cast<int>(i), c) = u(rng);
    t.w.col(c) /= total;
  }
  return t;
}

/// Model with random weights everywhere, including a non-identity
/// normalizer and biases.
inline model::Model random_model(std::mt19937_64& rng, const model::Shape& shape) {
  auto m = model::init_model(shape, rng());
  std::normal_distribution<double> g(0.0, 0.3);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (int i = 0; i < model::kInputDim; ++i) {
    m.in_mean[i] = g(rng);
    m.in_scale[i] = u(rng);
  }
  for (auto* v : {&m.encoder, &m.head})
    for (int i = 0; i < v->size(); ++i) (*v)[i] += 0.1 * g(rng);
  for (int i = 0; i < m.gamma.size(); ++i) m.gamma[i] = g(rng);
  return m;
}

enum class Part { Encoder, Head, Gamma };

struct GradCheckResult {
  double worst = 0.0;  // worst relative error
  std::size_t checked = 0;
};

/// Compares analytic gradients with central differences, coordinate by
/// coordinate: |a - n| / max(|a|, |n|, floor).
inline GradCheckResult grad_check(const model::Model& base, const model::Dataset& data,
                                  const model::NeighborTable* nb, Part part, double step = 1e-5,
                                  double floor = 1e-5) {
  model::Gradients g;
  model::loss_and_gradients(base, data, nb, &g);
  const model::Vec& analytic = part == Part::Encoder ? g.encoder : part == Part::Head ? g.head : g.gamma;
  GradCheckResult out;
  for (int i = 0; i < analytic.size(); ++i) {
    auto plus = base, minus = base;
    auto& vp = part == Part::Encoder ? plus.encoder : part == Part::Head ? plus.head : plus.gamma;
    auto& vm = part == Part::Encoder ? minus.encoder : part == Part::Head ? minus.head : minus.gamma;
    vp[i] += step;
    vm[i] -= step;
    double numeric = (model::training_mse(plus, data, nb) - model::training_mse(minus, data, nb)) / (2 * step);
    double denom = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    out.worst = std::max(out.worst, std::abs(analytic[i] - numeric) / denom);
    ++out.checked;
  }
  return out;
}

}  // namespace slackcast::testing
