#include <algorithm>
#include <cmath>
#include <set>

#include "slackcast/error.hpp"
#include "slackcast/stage1.hpp"

namespace slackcast::stage1 {
namespace {

int depth_bin(int depth) {
  if (depth <= 3) return depth;
  if (depth <= 5) return 4;
  if (depth <= 8) return 5;
  if (depth <= 16) return 6;
  return 7;
}

int total_bits(const std::vector<const verilog::NetDecl*>& decls) {
  int n = 0;
  for (const auto* d : decls) n += d->width();
  return n;
}

}  // namespace

FeatureVector extract_phi(const verilog::Ast& ast, const ApproxReport& report) {
  FeatureVector phi{};
  for (std::size_t i = 0; i < report.census.size(); ++i) phi[i] = report.census[i];
  phi[9] = total_bits(ast.regs());
  phi[10] = total_bits(ast.inputs());
  phi[11] = total_bits(ast.outputs());

  std::vector<double> arrivals;
  int max_depth = 0;
  for (const auto& p : report.paths) {
    max_depth = std::max(max_depth, p.depth);
    arrivals.push_back(p.arrival_ps);
    phi[19 + static_cast<std::size_t>(depth_bin(p.depth))] += 1;
    phi[p.end_kind == PointKind::Register ? 27 : 28] += 1;
    bool from_reg = p.start_kind == PointKind::Register;
    bool to_reg = p.end_kind == PointKind::Register;
    std::size_t slot = to_reg ? (from_reg ? 30 : 29) : (from_reg ? 31 : 32);
    phi[slot] += 1;
  }
  phi[12] = max_depth;
  std::sort(arrivals.begin(), arrivals.end(), std::greater<>());
  for (std::size_t i = 0; i < 5 && i < arrivals.size(); ++i) phi[13 + i] = arrivals[i];
  phi[18] = report.violating;
  phi[33] = verilog::operator_count(ast);
  return phi;
}

Fingerprint fingerprint(const FeatureVector& phi) {
  double sq = 0.0;
  for (double v : phi) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteFeature, "feature vector has a non-finite entry");
    sq += v * v;
  }
  Fingerprint fp;
  fp.phi = phi;
  if (sq == 0.0) {
    fp.s[kFeatureDim - 1] = 1.0;
    return fp;
  }
  double norm = std::sqrt(sq);
  for (std::size_t i = 0; i < kFeatureDim; ++i) fp.s[i] = phi[i] / norm;
  return fp;
}

Fingerprint fingerprint_source(std::string_view source, double clock_period) {
  auto ast = verilog::parse(source);
  return fingerprint(extract_phi(ast, approx_report(ast, clock_period)));
}

FeatureVector token_statistics(std::string_view source) {
  static const std::vector<std::string> symbols = {"~", "&", "|", "^", "+", "-",  "==", "<",
                                                   "?", ":", "=", "<=", "[", "{", ";", "("};
  static const std::vector<std::string> keywords = {"assign", "always", "if", "else", "case",
                                                    "reg",    "wire",   "input", "output"};
  FeatureVector stats{};
  std::set<std::string> names;
  int lines = 0;
  for (const auto& tok : verilog::lex(source)) {
    if (tok.kind == verilog::TokenKind::End) break;
    stats[0] += 1;
    lines = std::max(lines, tok.loc.line);
    switch (tok.kind) {
      case verilog::TokenKind::Identifier:
        stats[1] += 1;
        names.insert(tok.text);
        break;
      case verilog::TokenKind::Keyword: {
        stats[2] += 1;
        auto it = std::find(keywords.begin(), keywords.end(), tok.text);
        if (it != keywords.end()) stats[20 + static_cast<std::size_t>(it - keywords.begin())] += 1;
        break;
      }
      case verilog::TokenKind::Number:
        stats[3] += 1;
        stats[29] += tok.width;
        stats[30] = std::max(stats[30], static_cast<double>(tok.width));
        break;
      case verilog::TokenKind::Symbol: {
        auto it = std::find(symbols.begin(), symbols.end(), tok.text);
        if (it != symbols.end()) stats[4 + static_cast<std::size_t>(it - symbols.begin())] += 1;
        break;
      }
      default: break;
    }
  }
  stats[31] = static_cast<double>(names.size());
  stats[32] = lines;
  stats[33] = static_cast<double>(source.size());
  return stats;
}

nlohmann::json to_json(const Fingerprint& fp) {
  return {{"layout_version", kLayoutVersion},
          {"s", std::vector<double>(fp.s.begin(), fp.s.end())},
          {"phi", std::vector<double>(fp.phi.begin(), fp.phi.end())}};
}

}  // namespace slackcast::stage1
