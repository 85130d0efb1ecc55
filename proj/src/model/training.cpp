#include "slackcast/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

#include "engine.hpp"
#include "slackcast/error.hpp"

namespace slackcast::model {

using detail::Cache;
using detail::GradMask;
using detail::SteerBatch;

namespace {

using Index = std::vector<Eigen::Index>;

void check_data(const Dataset& data) {
  if (data.size() == 0) throw Error(ErrorCode::BadConfig, "training set is empty");
  if (data.x.rows() != kInputDim || data.y.rows() != 2 || data.y.cols() != data.x.cols())
    throw Error(ErrorCode::DimensionMismatch, "dataset shape mismatch");
  if (!data.x.allFinite() || !data.y.allFinite()) throw Error(ErrorCode::NonFiniteFeature, "dataset contains non-finite values");
}

void check_table(const NeighborTable& nb, std::size_t n) {
  auto k = static_cast<Eigen::Index>(nb.k);
  if (nb.k == 0 || nb.x.rows() != kInputDim || nb.x.cols() != k * static_cast<Eigen::Index>(n) || nb.w.rows() != k ||
      nb.w.cols() != static_cast<Eigen::Index>(n))
    throw Error(ErrorCode::DimensionMismatch, "neighbor table does not match the dataset");
}

Mat cols(const Mat& m, const Index& idx) {
  Mat out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = m.col(idx[i]);
  return out;
}

SteerBatch steer_all(const Model& m, const NeighborTable& nb) {
  SteerBatch s;
  s.k = nb.k;
  s.w = nb.w;
  auto acts = detail::encode_batch(m, detail::normalize(m, nb.x));
  for (const auto& inj : m.steering.injections) s.h.push_back(acts[static_cast<std::size_t>(inj.block - 1)]);
  return s;
}

SteerBatch take(const SteerBatch& s, const Index& idx) {
  SteerBatch out;
  out.k = s.k;
  out.w = cols(s.w, idx);
  auto k = static_cast<Eigen::Index>(s.k);
  for (const auto& h : s.h) {
    Mat part(h.rows(), static_cast<Eigen::Index>(idx.size()) * k);
    for (std::size_t i = 0; i < idx.size(); ++i)
      part.middleCols(static_cast<Eigen::Index>(i) * k, k) = h.middleCols(idx[i] * k, k);
    out.h.push_back(std::move(part));
  }
  return out;
}

// Mean of squared errors over both outputs; gradients when `mask` is given.
double batch_loss(const Model& m, const Mat& xn, const Mat& y, const SteerBatch* s, const GradMask* mask,
                  Gradients* g) {
  Cache c;
  Mat h = detail::represent(m, xn, s, mask ? &c : nullptr);
  Mat out = detail::head_out(m, h, mask ? &c.hz : nullptr);
  Mat e = out - y;
  const double n = static_cast<double>(y.cols());
  double loss = e.squaredNorm() / (2.0 * n);
  if (mask && g) detail::backward(m, c, e / n, s, *mask, g->encoder, g->head, g->gamma);
  return loss;
}

double head_loss(const Model& m, const Mat& h, const Mat& y, Vec* g_head) {
  Mat hidden;
  Mat out = detail::head_out(m, h, &hidden);
  Mat e = out - y;
  const double n = static_cast<double>(y.cols());
  if (g_head) detail::backward_head(m, h, hidden, e / n, *g_head);
  return e.squaredNorm() / (2.0 * n);
}

class Adam {
 public:
  Adam(std::vector<Vec*> params, double lr) : params_(std::move(params)), lr_(lr) {
    for (Vec* p : params_) {
      m_.push_back(Vec::Zero(p->size()));
      v_.push_back(Vec::Zero(p->size()));
    }
  }

  void step(const std::vector<const Vec*>& grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, t_), c2 = 1.0 - std::pow(kBeta2, t_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * *grads[i];
      v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grads[i]->cwiseProduct(*grads[i]);
      params_[i]->array() -= lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + kEps);
    }
  }

 private:
  static constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  std::vector<Vec*> params_;
  std::vector<Vec> m_, v_;
  double lr_;
  int t_ = 0;
};

struct Split {
  Index train, hold;
};

Split split(std::size_t n, double fraction, std::mt19937_64& rng) {
  Index all(n);
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  std::shuffle(all.begin(), all.end(), rng);
  auto hold = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  if (n - hold < 1 || hold < 1) hold = 0;
  Split s;
  s.hold.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(hold));
  s.train.assign(all.begin() + static_cast<std::ptrdiff_t>(hold), all.end());
  std::sort(s.hold.begin(), s.hold.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

std::vector<Index> batches(Index order, int size, std::mt19937_64& rng) {
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Index> out;
  auto b = static_cast<std::size_t>(std::max(size, 1));
  for (std::size_t at = 0; at < order.size(); at += b)
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(at),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), at + b)));
  return out;
}

void check_options(const TrainOptions& o) {
  if (!(o.lr > 0) || o.batch < 1 || o.max_epochs < 0 || o.patience < 1 || !(o.holdout >= 0 && o.holdout < 1) ||
      !(o.tolerance >= 0))
    throw Error(ErrorCode::BadConfig, "invalid training options");
}

struct Snapshot {
  Vec encoder, head, gamma;
  void save(const Model& m) {
    encoder = m.encoder;
    head = m.head;
    gamma = m.gamma;
  }
  void restore(Model& m) const {
    m.encoder = encoder;
    m.head = head;
    m.gamma = gamma;
  }
};

[[noreturn]] void diverged(Model& m, const Snapshot& good, int epoch) {
  good.restore(m);
  throw Error(ErrorCode::Divergence, "loss became non-finite at epoch " + std::to_string(epoch));
}

// Progress tracker for early stopping: `improved` when the monitored value
// beats the best by more than the relative tolerance.
struct Stopper {
  double best = std::numeric_limits<double>::infinity();
  int since = 0;
  bool improved(double value, double tolerance) {
    if (value < best - tolerance * std::abs(best) || !std::isfinite(best)) {
      since = 0;
      return true;
    }
    ++since;
    return false;
  }
};

constexpr int kRefitDecays = 8;
constexpr int kFitDecays = 4;

Gradients zero_grads(const Model& m) {
  return {Vec::Zero(m.encoder.size()), Vec::Zero(m.head.size()), Vec::Zero(m.gamma.size())};
}

}  // namespace

double loss_and_gradients(const Model& model, const Dataset& data, const NeighborTable* neighbors, Gradients* grads) {
  check_data(data);
  std::optional<SteerBatch> s;
  if (model.steered && neighbors) {
    check_table(*neighbors, data.size());
    s = steer_all(model, *neighbors);
  }
  Mat xn = detail::normalize(model, data.x);
  if (!grads) return batch_loss(model, xn, data.y, s ? &*s : nullptr, nullptr, nullptr);
  *grads = zero_grads(model);
  GradMask mask{true, true, s.has_value()};
  return batch_loss(model, xn, data.y, s ? &*s : nullptr, &mask, grads);
}

double training_mse(const Model& model, const Dataset& data, const NeighborTable* neighbors) {
  return loss_and_gradients(model, data, neighbors, nullptr);
}

Mat features(const Model& model, const Dataset& data, const NeighborTable* neighbors) {
  std::optional<SteerBatch> s;
  if (model.steered && neighbors) {
    check_table(*neighbors, data.size());
    s = steer_all(model, *neighbors);
  }
  return detail::represent(model, detail::normalize(model, data.x), s ? &*s : nullptr, nullptr);
}

FitReport fit_baseline(Model& model, const Dataset& data, const TrainOptions& options) {
  check_data(data);
  check_options(options);
  const auto n = static_cast<double>(data.size());
  model.in_mean = data.x.rowwise().mean();
  Vec var = (data.x.colwise() - model.in_mean).array().square().rowwise().sum() / n;
  model.in_scale = var.array().sqrt();
  for (Eigen::Index i = 0; i < model.in_scale.size(); ++i)
    if (!(model.in_scale[i] > 1e-12)) model.in_scale[i] = 1.0;
  model.steered = false;
  model.gamma.setZero();

  std::mt19937_64 rng(options.seed);
  Split parts = split(data.size(), options.holdout, rng);
  Mat xn = detail::normalize(model, data.x);
  Mat x_train = cols(xn, parts.train), y_train = cols(data.y, parts.train);
  Mat x_hold = cols(xn, parts.hold), y_hold = cols(data.y, parts.hold);
  auto o = detail::offsets(model.shape);
  model.head.segment(static_cast<Eigen::Index>(o.c2), 2) = y_train.rowwise().mean();

  FitReport report;
  report.initial_loss = batch_loss(model, xn, data.y, nullptr, nullptr, nullptr);
  Snapshot best, good;
  best.save(model);
  good.save(model);
  if (!std::isfinite(report.initial_loss)) diverged(model, good, 0);

  double best_monitor = std::numeric_limits<double>::infinity();
  double lr = options.lr;
  int decays = 0;
  Adam adam({&model.encoder, &model.head}, lr);
  Stopper stop;
  const GradMask mask{true, true, false};
  Index order(parts.train.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  for (int epoch = 1; epoch <= options.max_epochs; ++epoch) {
    try {
      for (const auto& b : batches(order, options.batch, rng)) {
        Gradients g = zero_grads(model);
        double l = batch_loss(model, cols(x_train, b), cols(y_train, b), nullptr, &mask, &g);
        if (!std::isfinite(l) || !g.encoder.allFinite() || !g.head.allFinite()) diverged(model, good, epoch);
        adam.step({&g.encoder, &g.head});
      }
      double train = batch_loss(model, xn, data.y, nullptr, nullptr, nullptr);
      double monitor = parts.hold.empty() ? train : batch_loss(model, x_hold, y_hold, nullptr, nullptr, nullptr);
      if (!std::isfinite(train) || !std::isfinite(monitor)) diverged(model, good, epoch);
      good.save(model);
      report.history.push_back(train);
      report.epochs = epoch;
      if (monitor < best_monitor) {
        best_monitor = monitor;
        best.save(model);
      }
      bool progress = stop.improved(monitor, options.tolerance);
      if (progress) stop.best = monitor;
      if (!progress && stop.since >= options.patience) {
        if (decays == kFitDecays) break;
        ++decays;
        lr *= 0.5;
        best.restore(model);
        adam = Adam({&model.encoder, &model.head}, lr);
        stop.since = 0;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFiniteActivation) throw;
      diverged(model, good, epoch);
    }
  }
  best.restore(model);
  report.final_loss = batch_loss(model, xn, data.y, nullptr, nullptr, nullptr);
  return report;
}

FitReport fit_gamma(Model& model, const Dataset& data, const NeighborTable& neighbors, const TrainOptions& options) {
  check_data(data);
  check_options(options);
  check_table(neighbors, data.size());
  model.steering.validate(model.shape.blocks);
  const std::uint64_t encoder_sum = model.encoder_checksum();
  FitReport report;
  Mat xn = detail::normalize(model, data.x);
  report.initial_loss = batch_loss(model, xn, data.y, nullptr, nullptr, nullptr);
  model.steered = true;
  if (model.steering.mode == GammaMode::Scalar) {
    model.gamma = Vec::Constant(model.shape.d_h, model.steering.gamma0);
    report.final_loss = training_mse(model, data, &neighbors);
    return report;
  }

  model.gamma.setZero();
  SteerBatch all = steer_all(model, neighbors);
  const double ceiling = report.initial_loss + 1e-9;
  std::mt19937_64 rng(options.seed);
  Split parts = split(data.size(), options.holdout, rng);
  Mat x_train = cols(xn, parts.train), y_train = cols(data.y, parts.train);
  Mat x_hold = cols(xn, parts.hold), y_hold = cols(data.y, parts.hold);
  SteerBatch s_train = take(all, parts.train), s_hold = take(all, parts.hold);

  Snapshot best, good;
  best.save(model);
  good.save(model);
  double best_monitor = parts.hold.empty() ? report.initial_loss
                                           : batch_loss(model, x_hold, y_hold, &s_hold, nullptr, nullptr);
  Adam adam({&model.gamma, &model.head}, options.lr);
  Stopper stop;
  stop.best = best_monitor;
  const GradMask mask{false, true, true};
  Index order(parts.train.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  for (int epoch = 1; epoch <= options.max_epochs; ++epoch) {
    try {
      for (const auto& b : batches(order, options.batch, rng)) {
        Gradients g = zero_grads(model);
        SteerBatch sb = take(s_train, b);
        double l = batch_loss(model, cols(x_train, b), cols(y_train, b), &sb, &mask, &g);
        if (!std::isfinite(l) || !g.gamma.allFinite() || !g.head.allFinite()) diverged(model, good, epoch);
        adam.step({&g.gamma, &g.head});
      }
      double train = batch_loss(model, xn, data.y, &all, nullptr, nullptr);
      double monitor = parts.hold.empty() ? train : batch_loss(model, x_hold, y_hold, &s_hold, nullptr, nullptr);
      if (!std::isfinite(train) || !std::isfinite(monitor)) diverged(model, good, epoch);
      good.save(model);
      report.history.push_back(train);
      report.epochs = epoch;
      if (train <= ceiling && monitor < best_monitor) {
        best_monitor = monitor;
        best.save(model);
      }
      bool progress = stop.improved(monitor, options.tolerance);
      if (progress) stop.best = monitor;
      if (!progress && stop.since >= options.patience) break;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFiniteActivation) throw;
      diverged(model, good, epoch);
    }
  }
  best.restore(model);
  if (model.encoder_checksum() != encoder_sum) throw Error(ErrorCode::ChecksumMismatch, "encoder changed while fitting gamma");
  report.final_loss = batch_loss(model, xn, data.y, &all, nullptr, nullptr);
  return report;
}

FitReport refit_head(Model& model, const Dataset& data, const NeighborTable* neighbors, const TrainOptions& options) {
  check_data(data);
  check_options(options);
  const std::uint64_t encoder_sum = model.encoder_checksum(), gamma_sum = model.gamma_checksum();
  Mat h = features(model, data, neighbors);

  FitReport report;
  report.initial_loss = head_loss(model, h, data.y, nullptr);
  Snapshot good;
  good.save(model);
  if (!std::isfinite(report.initial_loss)) diverged(model, good, 0);
  Vec best_head = model.head;
  double best = report.initial_loss;
  std::mt19937_64 rng(options.seed);
  double lr = options.lr;
  int decays = 0;
  Adam adam({&model.head}, lr);
  Stopper stop;
  stop.best = best;
  Index order(data.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  for (int epoch = 1; epoch <= options.max_epochs; ++epoch) {
    for (const auto& b : batches(order, options.batch, rng)) {
      Vec g = Vec::Zero(model.head.size());
      double l = head_loss(model, cols(h, b), cols(data.y, b), &g);
      if (!std::isfinite(l) || !g.allFinite()) diverged(model, good, epoch);
      adam.step({&g});
    }
    double train = head_loss(model, h, data.y, nullptr);
    if (!std::isfinite(train)) diverged(model, good, epoch);
    good.save(model);
    report.history.push_back(train);
    report.epochs = epoch;
    if (train < best) {
      best = train;
      best_head = model.head;
    }
    bool progress = stop.improved(train, options.tolerance);
    if (progress) stop.best = train;
    if (!progress && stop.since >= options.patience) {
      // Plateau: restart from the best head with half the step size.
      if (decays == kRefitDecays) break;
      ++decays;
      lr *= 0.5;
      model.head = best_head;
      adam = Adam({&model.head}, lr);
      stop.since = 0;
    }
  }
  model.head = best_head;
  if (model.encoder_checksum() != encoder_sum || model.gamma_checksum() != gamma_sum)
    throw Error(ErrorCode::ChecksumMismatch, "encoder or gamma changed during head refit");
  report.final_loss = best;
  return report;
}

}  // namespace slackcast::model
