#include <cmath>
#include <random>

#include "engine.hpp"
#include "slackcast/error.hpp"
#include "slackcast/hash.hpp"

namespace slackcast::model {

using detail::Offsets;

Vec encoder_input(std::span<const double> phi, double clock_period, double corner_scale) {
  if (phi.size() != stage1::kFeatureDim)
    throw Error(ErrorCode::DimensionMismatch, "feature vector must have " + std::to_string(stage1::kFeatureDim) + " entries");
  Vec x(kInputDim);
  for (std::size_t i = 0; i < phi.size(); ++i) x[static_cast<Eigen::Index>(i)] = std::log1p(std::max(phi[i], 0.0));
  x[kInputDim - 2] = clock_period / 1000.0;
  x[kInputDim - 1] = corner_scale;
  return x;
}

double to_target(double y) { return std::copysign(std::log1p(std::abs(y)), y); }
double from_target(double z) { return std::copysign(std::expm1(std::abs(z)), z); }

std::size_t Shape::encoder_size() const {
  auto d = static_cast<std::size_t>(d_h);
  return d * kInputDim + d + static_cast<std::size_t>(blocks) * (2 * d * d + 2 * d);
}

std::size_t Shape::head_size() const {
  auto d = static_cast<std::size_t>(d_h), h = static_cast<std::size_t>(hidden);
  return h * d + h + 2 * h + 2;
}

void SteeringConfig::validate(int blocks) const {
  if (k < 1) throw Error(ErrorCode::BadConfig, "steering k must be at least 1");
  if (injections.empty()) throw Error(ErrorCode::BadConfig, "steering needs at least one injection");
  double total = 0.0;
  for (const auto& inj : injections) {
    if (inj.block < 1 || inj.block > blocks)
      throw Error(ErrorCode::BadConfig, "injection block " + std::to_string(inj.block) + " outside 1.." +
                                            std::to_string(blocks));
    if (!(inj.share >= 0.0 && inj.share <= 1.0))
      throw Error(ErrorCode::BadConfig, "injection share must lie in [0, 1]");
    total += inj.share;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::BadConfig, "injection shares must sum to 1");
  if (mode == GammaMode::Scalar && !std::isfinite(gamma0)) throw Error(ErrorCode::BadConfig, "gamma0 must be finite");
}

namespace detail {

Offsets offsets(const Shape& s) {
  Offsets o;
  auto d = static_cast<std::size_t>(s.d_h);
  std::size_t at = 0;
  o.w_in = at;
  at += d * kInputDim;
  o.b_in = at;
  at += d;
  for (int b = 0; b < s.blocks; ++b) {
    o.w1.push_back(at);
    at += d * d;
    o.b1.push_back(at);
    at += d;
    o.w2.push_back(at);
    at += d * d;
    o.b2.push_back(at);
    at += d;
  }
  auto h = static_cast<std::size_t>(s.hidden);
  at = 0;
  o.v1 = at;
  at += h * d;
  o.c1 = at;
  at += h;
  o.v2 = at;
  at += 2 * h;
  o.c2 = at;
  return o;
}

}  // namespace detail

namespace {

Eigen::Map<const RowMat> mat(const double* p, std::size_t off, int rows, int cols) {
  return Eigen::Map<const RowMat>(p + off, rows, cols);
}
Eigen::Map<const Vec> vec(const double* p, std::size_t off, int n) { return Eigen::Map<const Vec>(p + off, n); }

}  // namespace

Eigen::Map<const RowMat> EncoderView::w_in() const { return mat(p, detail::offsets(shape).w_in, shape.d_h, kInputDim); }
Eigen::Map<const Vec> EncoderView::b_in() const { return vec(p, detail::offsets(shape).b_in, shape.d_h); }
Eigen::Map<const RowMat> EncoderView::w1(int b) const {
  return mat(p, detail::offsets(shape).w1[static_cast<std::size_t>(b)], shape.d_h, shape.d_h);
}
Eigen::Map<const Vec> EncoderView::b1(int b) const {
  return vec(p, detail::offsets(shape).b1[static_cast<std::size_t>(b)], shape.d_h);
}
Eigen::Map<const RowMat> EncoderView::w2(int b) const {
  return mat(p, detail::offsets(shape).w2[static_cast<std::size_t>(b)], shape.d_h, shape.d_h);
}
Eigen::Map<const Vec> EncoderView::b2(int b) const {
  return vec(p, detail::offsets(shape).b2[static_cast<std::size_t>(b)], shape.d_h);
}
Eigen::Map<const RowMat> HeadView::w1() const { return mat(p, detail::offsets(shape).v1, shape.hidden, shape.d_h); }
Eigen::Map<const Vec> HeadView::b1() const { return vec(p, detail::offsets(shape).c1, shape.hidden); }
Eigen::Map<const RowMat> HeadView::w2() const { return mat(p, detail::offsets(shape).v2, 2, shape.hidden); }
Eigen::Map<const Vec> HeadView::b2() const { return vec(p, detail::offsets(shape).c2, 2); }

namespace {

std::uint64_t checksum_of(std::initializer_list<const Vec*> parts) {
  Fnv1a h;
  for (const Vec* v : parts) {
    h.add_u64(static_cast<std::uint64_t>(v->size()));
    h.add(std::span<const double>(v->data(), static_cast<std::size_t>(v->size())));
  }
  return h.value();
}

}  // namespace

std::uint64_t Model::encoder_checksum() const { return checksum_of({&in_mean, &in_scale, &encoder}); }
std::uint64_t Model::head_checksum() const { return checksum_of({&head}); }
std::uint64_t Model::gamma_checksum() const { return checksum_of({&gamma}); }

Model init_model(const Shape& shape, std::uint64_t seed) {
  if (shape.d_h < 1 || shape.blocks < 1 || shape.hidden < 1) throw Error(ErrorCode::BadConfig, "model dimensions must be positive");
  Model m;
  m.shape = shape;
  m.in_mean = Vec::Zero(kInputDim);
  m.in_scale = Vec::Ones(kInputDim);
  m.encoder = Vec::Zero(static_cast<Eigen::Index>(shape.encoder_size()));
  m.head = Vec::Zero(static_cast<Eigen::Index>(shape.head_size()));
  m.gamma = Vec::Zero(shape.d_h);
  m.steering.injections = {{shape.blocks, 1.0}};

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto fill = [&](Vec& p, std::size_t off, std::size_t n, double stddev) {
    for (std::size_t i = 0; i < n; ++i) p[static_cast<Eigen::Index>(off + i)] = stddev * gauss(rng);
  };
  auto o = detail::offsets(shape);
  auto d = static_cast<std::size_t>(shape.d_h);
  auto hid = static_cast<std::size_t>(shape.hidden);
  fill(m.encoder, o.w_in, d * kInputDim, 1.0 / std::sqrt(double(kInputDim)));
  for (int b = 0; b < shape.blocks; ++b) {
    fill(m.encoder, o.w1[static_cast<std::size_t>(b)], d * d, 1.0 / std::sqrt(double(d)));
    fill(m.encoder, o.w2[static_cast<std::size_t>(b)], d * d, 1.0 / std::sqrt(double(d) * shape.blocks));
  }
  fill(m.head, o.v1, hid * d, 1.0 / std::sqrt(double(d)));
  fill(m.head, o.v2, 2 * hid, 1.0 / std::sqrt(double(hid)));
  return m;
}

namespace detail {

void check_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) throw Error(ErrorCode::NonFiniteActivation, std::string("non-finite ") + what);
}

Mat normalize(const Model& m, const Mat& x) {
  return (x.colwise() - m.in_mean).array().colwise() / m.in_scale.array();
}

std::vector<Mat> encode_batch(const Model& m, const Mat& xn) {
  auto e = m.encoder_view();
  std::vector<Mat> out;
  Mat h = (e.w_in() * xn).colwise() + e.b_in();
  for (int b = 0; b < m.shape.blocks; ++b) {
    Mat z = ((e.w1(b) * h).colwise() + e.b1(b)).array().tanh();
    h = h + ((e.w2(b) * z).colwise() + e.b2(b));
    out.push_back(h);
  }
  check_finite(out.back(), "encoder activation");
  return out;
}

Mat represent(const Model& m, const Mat& xn, const SteerBatch* s, Cache* cache) {
  auto e = m.encoder_view();
  const auto& injections = m.steering.injections;
  const Eigen::Index n = xn.cols();
  Mat h = (e.w_in() * xn).colwise() + e.b_in();
  if (cache) {
    cache->x = xn;
    cache->h.assign(1, h);
    cache->z.clear();
    cache->v.assign(s ? injections.size() : 0, Mat());
  }
  for (int b = 0; b < m.shape.blocks; ++b) {
    Mat z = ((e.w1(b) * h).colwise() + e.b1(b)).array().tanh();
    h = h + ((e.w2(b) * z).colwise() + e.b2(b));
    if (s) {
      for (std::size_t j = 0; j < injections.size(); ++j) {
        if (injections[j].block != b + 1) continue;
        Mat v = Mat::Zero(h.rows(), n);
        for (Eigen::Index c = 0; c < n; ++c) {
          for (std::size_t i = 0; i < s->k; ++i) {
            auto col = static_cast<Eigen::Index>(static_cast<std::size_t>(c) * s->k + i);
            v.col(c) += s->w(static_cast<Eigen::Index>(i), c) * (s->h[j].col(col) - h.col(c));
          }
        }
        h = h + (injections[j].share * (v.array().colwise() * m.gamma.array())).matrix();
        if (cache) cache->v[j] = std::move(v);
      }
    }
    if (cache) {
      cache->z.push_back(std::move(z));
      cache->h.push_back(h);
    }
  }
  check_finite(h, "encoder activation");
  return h;
}

Mat head_out(const Model& m, const Mat& h, Mat* hidden) {
  auto hv = m.head_view();
  Mat a = ((hv.w1() * h).colwise() + hv.b1()).array().tanh();
  Mat y = (hv.w2() * a).colwise() + hv.b2();
  if (hidden) *hidden = std::move(a);
  return y;
}

namespace {

Eigen::Map<RowMat> gmat(Vec& g, std::size_t off, int rows, int cols) {
  return Eigen::Map<RowMat>(g.data() + off, rows, cols);
}
Eigen::Map<Vec> gvec(Vec& g, std::size_t off, int n) { return Eigen::Map<Vec>(g.data() + off, n); }

// Returns dLoss/dh for the head input.
Mat head_backward(const Model& m, const Mat& h, const Mat& hidden, const Mat& dy, Vec* g_head) {
  auto hv = m.head_view();
  auto o = offsets(m.shape);
  Mat da = (hv.w2().transpose() * dy).array() * (1.0 - hidden.array().square());
  if (g_head) {
    gmat(*g_head, o.v2, 2, m.shape.hidden) += dy * hidden.transpose();
    gvec(*g_head, o.c2, 2) += dy.rowwise().sum();
    gmat(*g_head, o.v1, m.shape.hidden, m.shape.d_h) += da * h.transpose();
    gvec(*g_head, o.c1, m.shape.hidden) += da.rowwise().sum();
  }
  return hv.w1().transpose() * da;
}

}  // namespace

void backward_head(const Model& m, const Mat& h, const Mat& hidden, const Mat& dy, Vec& g_head) {
  head_backward(m, h, hidden, dy, &g_head);
}

void backward(const Model& m, const Cache& c, const Mat& dy, const SteerBatch* s, const GradMask& mask,
              Vec& g_encoder, Vec& g_head, Vec& g_gamma) {
  auto e = m.encoder_view();
  auto o = offsets(m.shape);
  const int d = m.shape.d_h;
  const auto& injections = m.steering.injections;
  Mat g = head_backward(m, c.h.back(), c.hz, dy, mask.head ? &g_head : nullptr);
  for (int b = m.shape.blocks - 1; b >= 0; --b) {
    if (s) {
      for (std::size_t jj = injections.size(); jj-- > 0;) {
        if (injections[jj].block != b + 1) continue;
        const double share = injections[jj].share;
        if (mask.gamma) g_gamma += share * (g.array() * c.v[jj].array()).rowwise().sum().matrix();
        // d(h + share * gamma (.) sum_i w_i (h_i - h)) / dh = 1 - share * gamma * sum_i w_i
        Eigen::RowVectorXd wsum = s->w.colwise().sum();
        Mat scale = 1.0 - share * (m.gamma * wsum).array();
        g = g.array() * scale.array();
      }
    }
    if (!mask.encoder) {
      bool below = false;
      if (s && mask.gamma)
        for (const auto& inj : injections) below = below || inj.block <= b;
      if (!below) break;
    }
    const Mat& z = c.z[static_cast<std::size_t>(b)];
    const Mat& h_prev = c.h[static_cast<std::size_t>(b)];
    Mat da = (e.w2(b).transpose() * g).array() * (1.0 - z.array().square());
    if (mask.encoder) {
      auto bi = static_cast<std::size_t>(b);
      gmat(g_encoder, o.w2[bi], d, d) += g * z.transpose();
      gvec(g_encoder, o.b2[bi], d) += g.rowwise().sum();
      gmat(g_encoder, o.w1[bi], d, d) += da * h_prev.transpose();
      gvec(g_encoder, o.b1[bi], d) += da.rowwise().sum();
    }
    g = g + e.w1(b).transpose() * da;
  }
  if (mask.encoder) {
    gmat(g_encoder, o.w_in, d, kInputDim) += g * c.x.transpose();
    gvec(g_encoder, o.b_in, d) += g.rowwise().sum();
  }
}

}  // namespace detail

std::vector<Vec> encode(const Model& model, const Vec& x) {
  if (x.size() != kInputDim) throw Error(ErrorCode::DimensionMismatch, "encoder input must have 36 entries");
  Mat xn = detail::normalize(model, x);
  std::vector<Vec> out;
  for (auto& h : detail::encode_batch(model, xn)) out.push_back(h.col(0));
  return out;
}

Vec steer(const Model& model, const Vec& x, const std::vector<Vec>& neighbors, const std::vector<double>& weights) {
  model.steering.validate(model.shape.blocks);
  if (neighbors.size() != weights.size() || neighbors.empty())
    throw Error(ErrorCode::BadConfig, "neighbor inputs and weights must be nonempty and of equal count");
  detail::SteerBatch s;
  s.k = neighbors.size();
  s.w = Mat(static_cast<Eigen::Index>(s.k), 1);
  for (const auto& inj : model.steering.injections) s.h.emplace_back(model.shape.d_h, static_cast<Eigen::Index>(s.k));
  // One column at a time, exactly as the query is encoded.
  for (std::size_t i = 0; i < s.k; ++i) {
    s.w(static_cast<Eigen::Index>(i), 0) = weights[i];
    auto acts = detail::encode_batch(model, detail::normalize(model, neighbors[i]));
    for (std::size_t j = 0; j < model.steering.injections.size(); ++j)
      s.h[j].col(static_cast<Eigen::Index>(i)) = acts[static_cast<std::size_t>(model.steering.injections[j].block - 1)];
  }
  Mat h = detail::represent(model, detail::normalize(model, x), &s, nullptr);
  return h.col(0);
}

Eigen::Vector2d head_forward(const Model& model, const Vec& h) {
  Mat y = detail::head_out(model, h, nullptr);
  return y.col(0);
}

}  // namespace slackcast::model
