#include "slackcast/predict.hpp"

#include <algorithm>
#include <cmath>

#include "engine.hpp"
#include "slackcast/error.hpp"
#include "slackcast/parallel.hpp"

namespace slackcast::model {

namespace {

constexpr std::size_t kChunk = 64;

}  // namespace

Mat sample_inputs(const std::vector<Sample>& samples) {
  Mat x(kInputDim, static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i)
    x.col(static_cast<Eigen::Index>(i)) = encoder_input(samples[i].fp.phi, samples[i].clock_period, samples[i].corner_scale);
  return x;
}

NeighborTable neighbor_table(const retrieval::Bank& bank, const std::vector<Sample>& samples, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::BadConfig, "k must be at least 1");
  if (bank.size() == 0) throw Error(ErrorCode::EmptyBank, "retrieval bank is empty");
  const std::size_t kk = std::min(k, bank.size());
  NeighborTable t;
  t.k = kk;
  const auto n = static_cast<Eigen::Index>(samples.size());
  t.x = Mat(kInputDim, n * static_cast<Eigen::Index>(kk));
  t.w = Mat(static_cast<Eigen::Index>(kk), n);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto hits = bank.retrieve(samples[i].fp.s, kk);
    for (std::size_t j = 0; j < kk; ++j) {
      const auto& e = bank.entries()[hits[j].index];
      t.x.col(static_cast<Eigen::Index>(i * kk + j)) =
          encoder_input(e.phi, samples[i].clock_period, samples[i].corner_scale);
      t.w(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = hits[j].weight;
    }
  }
  return t;
}

Dataset make_dataset(const std::vector<Sample>& samples, const std::vector<double>& wns,
                     const std::vector<double>& tns) {
  if (wns.size() != samples.size() || tns.size() != samples.size())
    throw Error(ErrorCode::DimensionMismatch, "labels do not match samples");
  Dataset d;
  d.x = sample_inputs(samples);
  d.y = Mat(2, static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    d.y(0, static_cast<Eigen::Index>(i)) = to_target(wns[i]);
    d.y(1, static_cast<Eigen::Index>(i)) = to_target(tns[i]);
  }
  return d;
}

std::vector<Prediction> predict_samples(const Model& model, const retrieval::Bank* bank,
                                        const std::vector<Sample>& samples, unsigned jobs) {
  if (model.steered) {
    model.steering.validate(model.shape.blocks);
    if (!bank) throw Error(ErrorCode::BadConfig, "a steered model needs its retrieval bank");
    if (bank->checksum() != model.bank_checksum)
      throw Error(ErrorCode::ChecksumMismatch, "bank " + retrieval::hex64(bank->checksum()) +
                                                   " is not the one the model was trained against (" +
                                                   retrieval::hex64(model.bank_checksum) + ")");
  }
  std::vector<Prediction> out(samples.size());
  const std::size_t chunks = (samples.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, jobs, [&](std::size_t c) {
    std::vector<Sample> part(samples.begin() + static_cast<std::ptrdiff_t>(c * kChunk),
                             samples.begin() + static_cast<std::ptrdiff_t>(std::min(samples.size(), (c + 1) * kChunk)));
    Mat xn = detail::normalize(model, sample_inputs(part));
    Mat h;
    if (model.steered) {
      NeighborTable t = neighbor_table(*bank, part, model.steering.k);
      detail::SteerBatch s;
      s.k = t.k;
      s.w = t.w;
      auto acts = detail::encode_batch(model, detail::normalize(model, t.x));
      for (const auto& inj : model.steering.injections) s.h.push_back(acts[static_cast<std::size_t>(inj.block - 1)]);
      h = detail::represent(model, xn, &s, nullptr);
    } else {
      h = detail::represent(model, xn, nullptr, nullptr);
    }
    Mat y = detail::head_out(model, h, nullptr);
    detail::check_finite(y, "prediction");
    for (std::size_t i = 0; i < part.size(); ++i) {
      auto col = static_cast<Eigen::Index>(i);
      out[c * kChunk + i] = {from_target(y(0, col)), std::min(0.0, from_target(y(1, col)))};
    }
  });
  return out;
}

Prediction predict(const Model& model, const retrieval::Bank* bank, std::string_view source, double clock_period,
                   double corner_scale) {
  Sample s{stage1::fingerprint_source(source, clock_period), clock_period, corner_scale};
  return predict_samples(model, bank, {s}, 1).front();
}

}  // namespace slackcast::model
