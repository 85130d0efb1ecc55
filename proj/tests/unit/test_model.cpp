#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "../support/check.hpp"
#include "../support/model_fixtures.hpp"
#include "../support/random_gen.hpp"
#include "slackcast/predict.hpp"

using namespace slackcast;
using namespace slackcast::model;
using slackcast::testing::Part;

namespace {

Shape mini() { return {8, 3, 4}; }

std::vector<Vec> random_inputs(std::mt19937_64& rng, int count) {
  std::normal_distribution<double> g;
  std::vector<Vec> out;
  for (int i = 0; i < count; ++i) {
    Vec x(kInputDim);
    for (int r = 0; r < kInputDim; ++r) x[r] = g(rng);
    out.push_back(x);
  }
  return out;
}

double spectral(const RowMat& m) { return Eigen::JacobiSVD<Mat>(m).singularValues()(0); }

TrainOptions quick(int epochs = 200) {
  TrainOptions o;
  o.max_epochs = epochs;
  o.lr = 3e-3;
  return o;
}

}  // namespace

TEST_CASE("target transform") {
  CHECK(to_target(0.0) == 0.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-5e4, 5e4);
  double prev = -1e300;
  for (double y = -1e5; y <= 1e5; y += 997.0) {
    CHECK(to_target(y) > prev);
    prev = to_target(y);
  }
  for (int i = 0; i < 500; ++i) {
    double y = u(rng);
    CHECK(to_target(-y) == -to_target(y));
    CHECK(std::abs(from_target(to_target(y)) - y) <= 1e-9 * std::max(1.0, std::abs(y)));
  }
}

TEST_CASE("encoder input layout") {
  stage1::FeatureVector phi{};
  phi[0] = std::exp(1.0) - 1.0;
  Vec x = encoder_input(phi, 1500.0, 1.35);
  CHECK(x.size() == 36);
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[34] == 1.5);
  CHECK(x[35] == 1.35);
  CHECK_ERROR_CODE(encoder_input(std::vector<double>(5, 0.0), 1000, 1), ErrorCode::DimensionMismatch);
}

TEST_CASE("encode: zero weights, determinism, Lipschitz bound") {
  auto zero = init_model(mini(), 1);
  zero.encoder.setZero();
  std::mt19937_64 rng(2);
  for (const auto& h : encode(zero, random_inputs(rng, 1)[0])) CHECK(h.isZero(0.0));

  auto m = testing::random_model(rng, Shape{16, 4, 8});
  auto x = random_inputs(rng, 1)[0];
  CHECK(encode(m, x).back() == encode(m, x).back());
  CHECK(encode(m, x).size() == 4);

  // |dh/dx| <= |W_in| / min(scale) * prod_l (1 + |W2_l| |W1_l|)
  auto e = m.encoder_view();
  double bound = spectral(e.w_in()) / m.in_scale.minCoeff();
  for (int b = 0; b < m.shape.blocks; ++b) bound *= 1.0 + spectral(e.w2(b)) * spectral(e.w1(b));
  const double eps = 1e-6;
  for (const auto& p : random_inputs(rng, 5)) {
    for (int c = 0; c < kInputDim; ++c) {
      Vec q = p;
      q[c] += eps;
      double change = (encode(m, q).back() - encode(m, p).back()).norm();
      CHECK(change <= bound * eps * (1 + 1e-6));
    }
  }
}

TEST_CASE("steering config validation") {
  SteeringConfig c;
  CHECK_NOTHROW(c.validate(8));
  c.injections = {{9, 1.0}};
  CHECK_ERROR_CODE(c.validate(8), ErrorCode::BadConfig);
  c.injections = {{0, 1.0}};
  CHECK_ERROR_CODE(c.validate(8), ErrorCode::BadConfig);
  c.injections = {{4, 0.5}, {8, 0.4}};
  CHECK_ERROR_CODE(c.validate(8), ErrorCode::BadConfig);
  c.injections = {{4, 0.5}, {8, 0.5 + 5e-10}};
  CHECK_NOTHROW(c.validate(8));
  c.injections = {{4, 1.2}, {8, -0.2}};
  CHECK_ERROR_CODE(c.validate(8), ErrorCode::BadConfig);
  c = {};
  c.k = 0;
  CHECK_ERROR_CODE(c.validate(8), ErrorCode::BadConfig);
}

TEST_CASE("steering algebra") {
  std::mt19937_64 rng(3);
  for (int draw = 0; draw < 30; ++draw) {
    auto m = testing::random_model(rng, Shape{16, 8, 8});
    auto xs = random_inputs(rng, 4);
    std::vector<Vec> nbrs(xs.begin() + 1, xs.end());
    std::vector<double> w{0.5, 0.3, 0.2};
    m.steering.injections = {{testing::uniform(rng, 1, 8), 1.0}};

    auto unsteered = encode(m, xs[0]).back();
    auto zero = m;
    zero.gamma.setZero();
    CHECK(steer(zero, xs[0], nbrs, w) == unsteered);
    zero.steering.mode = GammaMode::Scalar;
    CHECK(steer(zero, xs[0], nbrs, w) == unsteered);

    std::vector<Vec> same(3, xs[0]);
    CHECK(steer(m, xs[0], same, w) == unsteered);

    auto full = m;
    full.steering.mode = GammaMode::Scalar;
    full.gamma = Vec::Ones(16);
    full.steering.injections = {{8, 1.0}};
    Vec replaced = steer(full, xs[0], {xs[1]}, {1.0});
    Vec target = encode(m, xs[1]).back();
    double scale = std::max({1.0, unsteered.cwiseAbs().maxCoeff(), target.cwiseAbs().maxCoeff()});
    CHECK((replaced - target).cwiseAbs().maxCoeff() <= 1e-12 * scale);

    auto split = m;
    int l = m.steering.injections[0].block;
    int other = l == 8 ? 1 : 8;
    split.steering.injections = {{l, 1.0}, {other, 0.0}};
    CHECK(steer(split, xs[0], nbrs, w) == steer(m, xs[0], nbrs, w));
  }
  auto m = init_model(mini(), 4);
  CHECK_ERROR_CODE(steer(m, Vec::Zero(kInputDim), {Vec::Zero(kInputDim)}, {0.5, 0.5}), ErrorCode::BadConfig);
}

TEST_CASE("analytic gradients match central differences") {
  std::mt19937_64 rng(5);
  for (int point = 0; point < 5; ++point) {
    auto m = testing::random_model(rng, mini());
    auto data = testing::random_dataset(rng, 6);
    auto plain = testing::grad_check(m, data, nullptr, Part::Encoder);
    CHECK(plain.worst <= 1e-4);
    CHECK(testing::grad_check(m, data, nullptr, Part::Head).worst <= 1e-4);

    m.steered = true;
    m.steering.injections = {{2, 0.6}, {3, 0.4}};
    auto table = testing::random_table(rng, 6, 2);
    CHECK(testing::grad_check(m, data, &table, Part::Gamma).worst <= 1e-4);
    CHECK(testing::grad_check(m, data, &table, Part::Head).worst <= 1e-4);
    CHECK(plain.checked == m.encoder.size());
  }
}

TEST_CASE("fit_baseline: constant and linear labels") {
  std::mt19937_64 rng(6);
  auto data = testing::random_dataset(rng, 128);
  data.y.row(0).setConstant(-3.0);
  data.y.row(1).setConstant(-7.0);
  auto m = init_model(Shape{16, 2, 8}, 1);
  auto r = fit_baseline(m, data, quick(100));
  CHECK(r.final_loss <= 1e-3);

  auto lin = testing::random_dataset(rng, 256);
  Mat a = Mat::Random(2, kInputDim) * 0.15;
  lin.y = a * lin.x;
  auto m2 = init_model(Shape{16, 2, 16}, 2);
  auto r2 = fit_baseline(m2, lin, quick(200));
  CHECK(r2.final_loss < 1e-2);
  CHECK(r2.final_loss < r2.initial_loss);
  CHECK(r2.epochs <= 200);
}

TEST_CASE("fit_baseline is deterministic and reports divergence") {
  std::mt19937_64 rng(7);
  auto data = testing::random_dataset(rng, 96);
  auto a = init_model(Shape{16, 2, 8}, 9), b = init_model(Shape{16, 2, 8}, 9);
  fit_baseline(a, data, quick(20));
  fit_baseline(b, data, quick(20));
  CHECK(to_json(a).dump() == to_json(b).dump());

  auto bad = data;
  bad.y(0, 0) = 1e200;
  auto c = init_model(Shape{16, 2, 8}, 9);
  CHECK_ERROR_CODE(fit_baseline(c, bad, quick(5)), ErrorCode::Divergence);
  CHECK(c.head.allFinite());
  bad.y(0, 0) = std::nan("");
  CHECK_ERROR_CODE(fit_baseline(c, bad, quick(5)), ErrorCode::NonFiniteFeature);
}

TEST_CASE("fit_gamma and refit_head") {
  std::mt19937_64 rng(8);
  const int n = 160;
  auto data = testing::random_dataset(rng, n);
  Mat a = Mat::Random(2, kInputDim) * 0.2;
  data.y = (a * data.x).array().tanh();
  auto table = testing::random_table(rng, n, 3);
  auto m = init_model(Shape{16, 4, 8}, 3);
  fit_baseline(m, data, quick(60));
  const double baseline = training_mse(m, data, nullptr);
  const auto enc = m.encoder_checksum();

  auto zero = m;
  zero.steered = true;
  CHECK(training_mse(zero, data, &table) == baseline);

  auto diag = m;
  auto r = fit_gamma(diag, data, table, quick(60));
  CHECK(r.initial_loss == baseline);
  CHECK(r.final_loss <= baseline + 1e-9);
  CHECK(training_mse(diag, data, &table) <= baseline + 1e-9);
  CHECK(diag.encoder_checksum() == enc);
  CHECK(diag.steered);

  auto scalar = m;
  scalar.steering.mode = GammaMode::Scalar;
  scalar.steering.gamma0 = 0.3;
  fit_gamma(scalar, data, table, quick());
  CHECK(scalar.gamma == Vec::Constant(16, 0.3));
  CHECK(scalar.head_checksum() == m.head_checksum());

  const double stale = training_mse(scalar, data, &table);
  const auto gam = scalar.gamma_checksum();
  auto rr = refit_head(scalar, data, &table, quick());
  CHECK(rr.initial_loss == doctest::Approx(stale).epsilon(1e-12));
  CHECK(training_mse(scalar, data, &table) <= stale);
  CHECK(scalar.encoder_checksum() == enc);
  CHECK(scalar.gamma_checksum() == gam);

  // Labels the current head reproduces exactly: the head is already optimal.
  Dataset realizable = data;
  Mat h = features(scalar, data, &table);
  for (int c = 0; c < n; ++c) realizable.y.col(c) = head_forward(scalar, h.col(c));
  auto fixed = refit_head(scalar, realizable, &table, quick());
  CHECK(fixed.initial_loss <= 1e-20);
  CHECK(std::abs(fixed.final_loss - fixed.initial_loss) <= 1e-6);
}

TEST_CASE("checkpoint round trip") {
  std::mt19937_64 rng(10);
  auto m = testing::random_model(rng, Shape{8, 3, 4});
  m.steered = true;
  m.steering.injections = {{1, 0.25}, {3, 0.75}};
  m.steering.mode = GammaMode::Scalar;
  m.steering.k = 2;
  m.bank_checksum = 0xfeedbeefcafe1234ull;
  auto path = (std::filesystem::temp_directory_path() / "slackcast_model_test.json").string();
  save_model(m, path);
  auto back = load_model(path);
  CHECK(back.encoder == m.encoder);
  CHECK(back.head == m.head);
  CHECK(back.gamma == m.gamma);
  CHECK(back.in_mean == m.in_mean);
  CHECK(back.in_scale == m.in_scale);
  CHECK(back.bank_checksum == m.bank_checksum);
  CHECK(back.steering.injections.size() == 2);
  CHECK(back.steering.injections[1].share == 0.75);
  CHECK(back.steering.k == 2);
  CHECK(back.steering.mode == GammaMode::Scalar);
  CHECK(to_json(back).dump() == to_json(m).dump());
  std::filesystem::remove(path);

  auto j = to_json(m);
  j["head"][0] = j["head"][0].get<double>() + 1.0;
  CHECK_ERROR_CODE(model_from_json(j), ErrorCode::ChecksumMismatch);
  j = to_json(m);
  j["version"] = 99;
  CHECK_ERROR_CODE(model_from_json(j), ErrorCode::FormatError);
  j = to_json(m);
  j["encoder"].erase(0);
  CHECK_ERROR_CODE(model_from_json(j), ErrorCode::FormatError);
  CHECK_ERROR_CODE(load_model("/nonexistent/model.json"), ErrorCode::IoError);
}

namespace {

std::vector<Sample> random_samples(std::mt19937_64& rng, int n, const std::string& prefix,
                                   std::vector<retrieval::BankEntry>* entries) {
  std::uniform_real_distribution<double> u(0.0, 20.0);
  std::vector<Sample> out;
  for (int i = 0; i < n; ++i) {
    stage1::FeatureVector phi;
    for (auto& v : phi) v = std::floor(u(rng));
    auto fp = stage1::fingerprint(phi);
    out.push_back({fp, 800.0 + 10 * i, 1.0});
    if (entries) entries->push_back(retrieval::make_entry(prefix + std::to_string(i), 1000 + i, fp));
  }
  return out;
}

}  // namespace

TEST_CASE("predict: gamma zero equals baseline, tns clamp, bank checks") {
  std::mt19937_64 rng(11);
  std::vector<retrieval::BankEntry> entries;
  random_samples(rng, 30, "rag", &entries);
  auto bank = retrieval::build_bank(entries, {});
  auto queries = random_samples(rng, 150, "q", nullptr);

  auto m = testing::random_model(rng, Shape{8, 3, 4});
  m.head[m.head.size() - 1] = 3.0;  // pushes transformed tns positive
  auto plain = predict_samples(m, nullptr, queries);
  auto steered = m;
  steered.steered = true;
  steered.gamma.setZero();
  steered.bank_checksum = bank.checksum();
  auto zero = predict_samples(steered, &bank, queries);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    CHECK(zero[i].wns_ps == plain[i].wns_ps);
    CHECK(zero[i].tns_ps == plain[i].tns_ps);
    CHECK(plain[i].tns_ps <= 0.0);
    CHECK(std::isfinite(plain[i].wns_ps));
  }

  steered.gamma.setConstant(0.5);
  auto one = predict_samples(steered, &bank, queries, 1);
  auto many = predict_samples(steered, &bank, queries, 4);
  for (std::size_t i = 0; i < queries.size(); ++i) CHECK(one[i].wns_ps == many[i].wns_ps);

  CHECK_ERROR_CODE(predict_samples(steered, nullptr, queries), ErrorCode::BadConfig);
  steered.bank_checksum ^= 1;
  CHECK_ERROR_CODE(predict_samples(steered, &bank, queries), ErrorCode::ChecksumMismatch);
  CHECK_ERROR_CODE(neighbor_table(retrieval::build_bank({}, {}), queries, 3), ErrorCode::EmptyBank);

  auto table = neighbor_table(bank, queries, 3);
  CHECK(table.k == 3);
  CHECK(table.x.cols() == 450);
  for (int c = 0; c < table.w.cols(); ++c) CHECK(std::abs(table.w.col(c).sum() - 1.0) <= 1e-12);
  CHECK(table.x(34, 3) == queries[1].clock_period / 1000.0);

  auto p = predict(m, nullptr, "module m(input a, input b, output y); assign y = a & b; endmodule", 1000, 1.0);
  CHECK(std::isfinite(p.wns_ps));
  CHECK(p.tns_ps <= 0.0);
}
