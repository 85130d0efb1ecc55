#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "../support/check.hpp"
#include "../support/path_enum.hpp"
#include "../support/random_gen.hpp"
#include "slackcast/elaborate.hpp"
#include "slackcast/liberty.hpp"
#include "slackcast/sta.hpp"

using namespace slackcast;

namespace {

CellLibrary unit_inv_lib() {
  auto lib = CellLibrary::default_library();
  lib.delay[static_cast<std::size_t>(GateType::INV)] = 10;
  return lib;
}

Netlist inv_chain() {
  Netlist n;
  NetId a = n.add_net("a");
  n.inputs.push_back({"a", a});
  NetId m = n.add_net("m");
  NetId y = n.add_net("y");
  n.gates.push_back({0, GateType::INV, {a, 0, 0}, m});
  n.gates.push_back({1, GateType::INV, {m, 0, 0}, y});
  n.outputs.push_back({"y", y});
  return n;
}

}  // namespace

TEST_CASE("sta: inverter chain") {
  auto r = run_sta(inv_chain(), unit_inv_lib(), "typ", {1000});
  REQUIRE(r.paths.size() == 1);
  CHECK(r.paths[0].slack == 980);
  CHECK(r.paths[0].arrival == 20);
  CHECK(r.paths[0].gates == std::vector<std::uint32_t>{0, 1});
  CHECK(r.paths[0].startpoint == "a");
  CHECK(r.wns == 980);
  CHECK(r.tns == 0);
}

TEST_CASE("sta: wns/tns from endpoint slacks") {
  // Three outputs behind chains of distinct length under a custom library.
  Netlist n;
  NetId a = n.add_net("a");
  n.inputs.push_back({"a", a});
  auto chain = [&](int len, const std::string& name) {
    NetId at = a;
    for (int i = 0; i < len; ++i) {
      NetId out = n.add_net(name + std::to_string(i));
      n.gates.push_back({static_cast<std::uint32_t>(n.gates.size()), GateType::BUF, {at, 0, 0}, out});
      at = out;
    }
    n.outputs.push_back({name, at});
  };
  chain(19, "p");  // 190 ps
  chain(8, "q");   // 80 ps
  chain(1, "r");   // 10 ps
  auto lib = CellLibrary::default_library();
  lib.delay[static_cast<std::size_t>(GateType::BUF)] = 10;
  auto r = run_sta(n, lib, "typ", {60});
  REQUIRE(r.paths.size() == 3);
  CHECK(r.paths[0].slack == -130);
  CHECK(r.paths[1].slack == -20);
  CHECK(r.paths[2].slack == 50);
  CHECK(r.wns == -130);
  CHECK(r.tns == -150);
}

TEST_CASE("sta: unknown corner and empty netlist") {
  CHECK_ERROR_CODE(run_sta(inv_chain(), unit_inv_lib(), "ff", {1000}), ErrorCode::UnknownCorner);
  Netlist empty;
  auto r = run_sta(empty, unit_inv_lib(), "typ", {1000});
  CHECK(r.paths.empty());
  CHECK(r.wns == 1000);
  CHECK(r.tns == 0);
}

TEST_CASE("label: DFF module") {
  auto lib = CellLibrary::default_library();
  auto m = verilog::make_source_module(
      "dff", "module dff(input clk, input d, output reg q); always @(posedge clk) q <= d; endmodule");
  auto l = label(m, lib, "typ", {1000});
  // Endpoints: q/D fed by the PI (1000 - 20), and output q fed by the flop (1000 - 30).
  CHECK(l.wns == 970);
  CHECK(l.tns == 0);

  auto loop = verilog::make_source_module(
      "loop", "module t(input clk, output reg q); wire w; assign w = q; always @(posedge clk) q <= w; endmodule");
  auto r = run_sta(elaborate(verilog::parse(loop.source_text)), lib, "typ", {1000});
  bool found = false;
  for (const auto& p : r.paths) {
    if (p.endpoint == "q/D") {
      CHECK(p.slack == 950);
      CHECK(p.startpoint == "q/Q");
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("sta: corner scales every arrival") {
  auto lib = CellLibrary::default_library();
  auto n = elaborate(verilog::parse(
      "module m(input clk, input [3:0] a, output reg [3:0] q, output [3:0] s);\n"
      "assign s = a + q; always @(posedge clk) q <= s ^ a; endmodule"));
  auto typ = run_sta(n, lib, "typ", {1000});
  auto slow = run_sta(n, lib, "slow", {1000});
  REQUIRE(typ.paths.size() == slow.paths.size());
  std::map<std::string, double> t;
  for (const auto& p : typ.paths) t[p.endpoint] = p.arrival;
  for (const auto& p : slow.paths) CHECK(p.arrival == doctest::Approx(t[p.endpoint] * 1.35).epsilon(1e-12));
}

TEST_CASE("sta: matches exhaustive path enumeration on random netlists") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 300; ++i) {
    auto n = testing::random_netlist(rng, 12);
    auto lib = testing::random_library(rng);
    double clock = testing::uniform(rng, 20, 800);
    for (const char* corner : {"typ", "slow"}) {
      auto r = run_sta(n, lib, corner, {clock});
      auto e = testing::enumerate_paths(n, lib, corner, clock);
      CHECK(r.wns == e.wns);
      CHECK(r.tns == e.tns);
      REQUIRE(r.paths.size() == e.endpoint_slack.size());
      for (const auto& p : r.paths) {
        CHECK(p.slack == e.endpoint_slack.at(p.endpoint));
        CHECK(p.slack == p.required - p.arrival);
      }
    }
  }
}

TEST_CASE("sta: path record arrival equals delay sum along its gates") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    auto n = testing::random_netlist(rng, 12);
    auto lib = testing::random_library(rng);
    auto r = run_sta(n, lib, "slow", {500});
    double s = lib.corners.at("slow");
    for (const auto& p : r.paths) {
      double a = p.start_kind == PointKind::Register ? lib.clk_to_q * s : 0.0;
      for (auto g : p.gates) a += lib.gate_delay(n.gates[g].type) * s;
      CHECK(a == doctest::Approx(p.arrival).epsilon(1e-12));
    }
  }
}

TEST_CASE("sta: monotonicity and invariants") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    auto n = testing::random_netlist(rng, 12);
    auto lib = testing::random_library(rng);
    auto a = run_sta(n, lib, "typ", {300});
    auto b = run_sta(n, lib, "typ", {364});
    auto slow = run_sta(n, lib, "slow", {300});
    std::map<std::string, double> base;
    for (const auto& p : a.paths) base[p.endpoint] = p.slack;
    for (const auto& p : b.paths) CHECK(p.slack - base[p.endpoint] == doctest::Approx(64));
    for (const auto& p : slow.paths) CHECK(p.slack <= base[p.endpoint]);
    for (const auto& r : {a, b, slow}) {
      CHECK(r.tns <= 0);
      CHECK(r.tns <= std::min(r.wns, 0.0));
      CHECK((r.tns == 0) == (r.wns >= 0));
    }
  }
}

TEST_CASE("critical_paths ordering") {
  TimingReport r;
  r.paths = {{"a", PointKind::Input, "z", PointKind::Output, {}, 0, 0, 3},
             {"b", PointKind::Input, "y", PointKind::Output, {}, 0, 0, -5},
             {"c", PointKind::Input, "x", PointKind::Output, {}, 0, 0, -1}};
  auto top = critical_paths(r, 2);
  REQUIRE(top.size() == 2);
  CHECK(top[0].slack == -5);
  CHECK(top[1].slack == -1);
  CHECK(critical_paths(r, 10).size() == 3);
  r.paths = {{"a", PointKind::Input, "k", PointKind::Output, {}, 0, 0, -2},
             {"a", PointKind::Input, "j", PointKind::Output, {}, 0, 0, -2}};
  CHECK(critical_paths(r, 1)[0].endpoint == "j");
}

TEST_CASE("library: json round trip and validation") {
  auto lib = CellLibrary::default_library();
  CHECK_NOTHROW(lib.validate());
  auto back = library_from_json(to_json(lib));
  CHECK(back.delay == lib.delay);
  CHECK(back.corners == lib.corners);
  CHECK(back.clk_to_q == 30);
  CHECK(back.setup == 20);
  auto bad = lib;
  bad.delay[0] = 0;
  CHECK_ERROR_CODE(bad.validate(), ErrorCode::InvalidLibrary);
  bad = lib;
  bad.corners.erase("typ");
  CHECK_ERROR_CODE(bad.validate(), ErrorCode::InvalidLibrary);
  auto path = std::filesystem::temp_directory_path() / "slackcast_lib_test.json";
  save_library(lib, path.string());
  CHECK(load_library(path.string()).delay == lib.delay);
  std::filesystem::remove(path);
}

TEST_CASE("report json uses integer picoseconds") {
  auto j = to_json(run_sta(inv_chain(), unit_inv_lib(), "typ", {1000}));
  CHECK(j["wns_ps"].get<long long>() == 980);
  CHECK(j["paths"][0]["slack_ps"].is_number_integer());
}
