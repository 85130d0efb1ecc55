#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "../support/check.hpp"
#include "../support/random_gen.hpp"
#include "slackcast/elaborate.hpp"
#include "slackcast/stage1.hpp"

using namespace slackcast;
using namespace slackcast::stage1;

namespace {

ApproxReport report_of(const std::string& src, double clock = 1000) {
  return approx_report(verilog::parse(src), clock);
}

FeatureVector phi_of(const std::string& src, double clock = 1000) {
  auto ast = verilog::parse(src);
  return extract_phi(ast, approx_report(ast, clock));
}

}  // namespace

TEST_CASE("approx_report: inverter") {
  auto r = report_of("module m(input a, output y); assign y = ~a; endmodule");
  REQUIRE(r.paths.size() == 1);
  CHECK(r.paths[0].depth == 1);
  CHECK(r.paths[0].arrival_ps == 30);
  CHECK(r.paths[0].slack_ps == 970);
  CHECK(r.wns == 970);
  CHECK(r.tns == 0);
}

TEST_CASE("approx_report: adder into a register tracks the elaborated depth") {
  std::string src =
      "module m(input clk, input [3:0] a, input [3:0] b, output reg [3:0] q);\n"
      "always @(posedge clk) q <= a + b; endmodule";
  auto r = report_of(src);
  int worst = 0;
  for (const auto& p : r.paths)
    if (p.end_kind == PointKind::Register) worst = std::max(worst, p.depth);
  int netlist_depth = unit_depth(elaborate(verilog::parse(src)));
  CHECK(std::abs(worst - netlist_depth) <= 1);
  CHECK(worst >= 4);
}

TEST_CASE("approx_report: register fed straight from an input") {
  auto r = report_of("module m(input clk, input d, output y); reg q; assign y = q; always @(posedge clk) q <= d; endmodule");
  int reg_paths = 0;
  for (const auto& p : r.paths) {
    if (p.end_kind != PointKind::Register) continue;
    ++reg_paths;
    CHECK(p.depth == 0);
    CHECK(p.start_kind == PointKind::Input);
  }
  CHECK(reg_paths == 1);
}

TEST_CASE("approx_report: violations at a tight clock") {
  auto r = report_of("module m(input [7:0] a, input [7:0] b, output [7:0] s); assign s = a + b; endmodule", 100);
  CHECK(r.violating > 0);
  CHECK(r.wns < 0);
  CHECK(r.tns <= r.wns);
  for (std::size_t i = 1; i < r.paths.size(); ++i) CHECK(r.paths[i - 1].slack_ps <= r.paths[i].slack_ps);
}

TEST_CASE("extract_phi: AND gate") {
  auto phi = phi_of("module m(input a, input b, output y); assign y = a & b; endmodule");
  CHECK(phi[static_cast<std::size_t>(GateType::AND2)] == 1);
  CHECK(phi[9] == 0);
  CHECK(phi[10] == 2);
  CHECK(phi[11] == 1);
  CHECK(phi[12] == 1);
  CHECK(phi[13] == 30);
  CHECK(phi[20] == 1);  // depth bin 1
  CHECK(phi[32] == 1);  // in->out
  CHECK(phi[33] == 1);
}

TEST_CASE("extract_phi: passthrough") {
  auto phi = phi_of("module m(input a, output y); assign y = a; endmodule");
  for (std::size_t i = 0; i < 9; ++i) CHECK(phi[i] == 0);
  CHECK(phi[12] == 0);
  CHECK(phi[19] == 1);  // one endpoint, depth 0
  CHECK(phi[27] + phi[28] == 1);
  auto fp = fingerprint(phi);
  double norm = 0;
  for (double v : fp.s) norm += v * v;
  CHECK(std::abs(std::sqrt(norm) - 1.0) < 1e-12);
}

TEST_CASE("extract_phi: 8-bit counter") {
  auto phi = phi_of(
      "module c(input clk, output reg [7:0] q);\n"
      "always @(posedge clk) q <= q + 8'd1; endmodule");
  CHECK(phi[9] == 8);
  CHECK(phi[30] == 8);  // reg->reg
  CHECK(phi[31] == 8);  // reg->out
  CHECK(phi[27] == 8);
  CHECK(phi[28] == 8);
}

TEST_CASE("fingerprint: normalization") {
  FeatureVector phi{};
  phi[0] = 3;
  phi[1] = 4;
  auto fp = fingerprint(phi);
  CHECK(fp.s[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(fp.s[1] == doctest::Approx(0.8).epsilon(1e-15));
  for (std::size_t i = 2; i < kFeatureDim; ++i) CHECK(fp.s[i] == 0);

  FeatureVector zero{};
  auto z = fingerprint(zero);
  CHECK(z.s[33] == 1);

  phi[5] = std::numeric_limits<double>::quiet_NaN();
  CHECK_ERROR_CODE(fingerprint(phi), ErrorCode::NonFiniteFeature);
}

TEST_CASE("fingerprint: unit norm and scale invariance") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0, 500);
  for (int t = 0; t < 200; ++t) {
    FeatureVector phi{};
    for (auto& v : phi) v = u(rng);
    auto a = fingerprint(phi);
    double n = 0;
    for (double v : a.s) n += v * v;
    CHECK(std::abs(std::sqrt(n) - 1.0) <= 1e-12);
    FeatureVector twice = phi;
    for (auto& v : twice) v *= 2;
    auto b = fingerprint(twice);
    for (std::size_t i = 0; i < kFeatureDim; ++i) CHECK(a.s[i] == doctest::Approx(b.s[i]).epsilon(1e-14));
  }
}

TEST_CASE("stage1 depth tracks elaborated depth on random modules") {
  std::mt19937_64 rng(77);
  int within = 0, total = 0;
  for (int i = 0; i < 200; ++i) {
    testing::ModuleGen gen(rng, 10);
    auto ast = verilog::parse(gen.make());
    auto r = approx_report(ast, 1000);
    int approx = 0;
    for (const auto& p : r.paths) approx = std::max(approx, p.depth);
    within += std::abs(approx - unit_depth(elaborate(ast))) <= 1;
    ++total;
  }
  CHECK(within >= total * 95 / 100);
}

TEST_CASE("token statistics are lexical counts") {
  auto t = token_statistics("module m(input a, input b, output y); assign y = a & b; endmodule");
  CHECK(t[0] > 0);
  CHECK(t[5] == 1);  // one '&'
  CHECK(t[20] == 1);  // one 'assign'
}

TEST_CASE("fingerprint json carries the layout version") {
  auto j = to_json(fingerprint_source("module m(input a, output y); assign y = ~a; endmodule", 1000));
  CHECK(j["layout_version"] == kLayoutVersion);
  CHECK(j["s"].size() == kFeatureDim);
  auto r = to_json(report_of("module m(input a, output y); assign y = ~a; endmodule"));
  CHECK(r["approx"] == true);
}

TEST_CASE("architecture: stage1 never depends on the synthesis oracle") {
  namespace fs = std::filesystem;
  fs::path root = SLACKCAST_SOURCE_DIR;
  std::vector<fs::path> files = {root / "include/slackcast/stage1.hpp"};
  for (const auto& e : fs::directory_iterator(root / "src/stage1")) files.push_back(e.path());
  for (const auto& f : files) {
    std::ifstream in(f);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    CHECK_MESSAGE(text.find("liberty.hpp") == std::string::npos, f);
    CHECK_MESSAGE(text.find("sta.hpp") == std::string::npos, f);
    CHECK_MESSAGE(text.find("elaborate.hpp") == std::string::npos, f);
  }
  std::ifstream cmake(root / "src/CMakeLists.txt");
  std::string line;
  while (std::getline(cmake, line)) {
    if (line.find("target_link_libraries(slackcast_stage1") != std::string::npos) {
      CHECK(line.find("oracle") == std::string::npos);
    }
  }
}
