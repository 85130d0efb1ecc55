#include <algorithm>
#include <cmath>
#include <fstream>

#include "slackcast/error.hpp"
#include "slackcast/eval.hpp"

namespace slackcast::eval {

double pearson_r(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size())
    throw Error(ErrorCode::DimensionMismatch,
                "pearson_r on " + std::to_string(y.size()) + " labels and " + std::to_string(yhat.size()) + " predictions");
  const std::size_t n = y.size();
  if (n < 2) throw Error(ErrorCode::BadConfig, "pearson_r needs at least two samples");
  double my = 0, mp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    my += y[i];
    mp += yhat[i];
  }
  my /= static_cast<double>(n);
  mp /= static_cast<double>(n);
  double syy = 0, spp = 0, syp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double a = y[i] - my, b = yhat[i] - mp;
    syy += a * a;
    spp += b * b;
    syp += a * b;
  }
  if (syy == 0 || spp == 0) throw Error(ErrorCode::DegenerateVariance, syy == 0 ? "labels are constant" : "predictions are constant");
  return std::clamp(syp / std::sqrt(syy * spp), -1.0, 1.0);
}

Mape mape(std::span<const double> y, std::span<const double> yhat, double epsilon) {
  if (y.size() != yhat.size())
    throw Error(ErrorCode::DimensionMismatch,
                "mape on " + std::to_string(y.size()) + " labels and " + std::to_string(yhat.size()) + " predictions");
  if (y.empty()) throw Error(ErrorCode::BadConfig, "mape needs at least one sample");
  Mape m;
  double sum = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (std::abs(y[i]) < epsilon) {
      ++m.n_excluded;
      continue;
    }
    sum += std::abs(y[i] - yhat[i]) / std::abs(y[i]);
    ++m.n_used;
  }
  if (m.n_used == 0)
    throw Error(ErrorCode::AllExcluded, "every label is within " + std::to_string(epsilon) + " ps of zero");
  m.percent = 100.0 * sum / static_cast<double>(m.n_used);
  return m;
}

namespace {

TargetScore score_target(const std::vector<double>& y, const std::vector<double>& yhat, std::size_t failed,
                         double epsilon) {
  TargetScore s;
  s.n_excluded = failed;
  try {
    s.r = pearson_r(y, yhat);
  } catch (const Error& e) {
    s.error = std::string(to_string(e.code()));
  }
  try {
    auto m = mape(y, yhat, epsilon);
    s.mape = m.percent;
    s.n_used = m.n_used;
    s.n_excluded += m.n_excluded;
  } catch (const Error& e) {
    s.n_excluded += y.size();
    if (s.error.empty()) s.error = std::string(to_string(e.code()));
  }
  return s;
}

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

nlohmann::json to_json(const TargetScore& s) {
  nlohmann::json j = {{"r", opt(s.r)}, {"mape", opt(s.mape)}, {"n_used", s.n_used}, {"n_excluded", s.n_excluded}};
  if (!s.error.empty()) j["error"] = s.error;
  return j;
}

}  // namespace

EvalResult score(std::vector<PredictionRow> rows, double epsilon) {
  EvalResult r;
  std::vector<double> yw, pw, yt, pt;
  for (const auto& row : rows) {
    if (!row.error.empty()) {
      ++r.n_failed;
      continue;
    }
    yw.push_back(row.y_wns);
    pw.push_back(row.yhat_wns);
    yt.push_back(row.y_tns);
    pt.push_back(row.yhat_tns);
  }
  r.wns = score_target(yw, pw, r.n_failed, epsilon);
  r.tns = score_target(yt, pt, r.n_failed, epsilon);
  r.rows = std::move(rows);
  return r;
}

nlohmann::json to_json(const EvalResult& result) {
  return {{"wns", to_json(result.wns)},
          {"tns", to_json(result.tns)},
          {"n", result.rows.size()},
          {"n_failed", result.n_failed}};
}

void write_predictions_csv(const EvalResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out.precision(17);
  out << "id,y_wns,yhat_wns,y_tns,yhat_tns,error\n";
  for (const auto& r : result.rows) {
    out << r.id << ',' << r.y_wns << ',';
    if (r.error.empty()) out << r.yhat_wns;
    out << ',' << r.y_tns << ',';
    if (r.error.empty()) out << r.yhat_tns;
    out << ',' << r.error << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

}  // namespace slackcast::eval
