#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <set>

#include "../support/check.hpp"
#include "slackcast/corpus.hpp"
#include "slackcast/elaborate.hpp"
#include "slackcast/sta.hpp"

using namespace slackcast;
using namespace slackcast::corpus;

namespace {

const char* kCounter = R"(module cnt(input clk, input en, output reg [7:0] q);
  always @(posedge clk) begin
    if (en) q <= q + 8'd1;
  end
endmodule
)";

const char* kAndTree = R"(module tree(input [7:0] a, output y);
  assign y = ((a[0] & a[1]) & (a[2] & a[3])) & ((a[4] & a[5]) & (a[6] & a[7]));
endmodule
)";

const char* kMux = R"(module mx(input s, input [3:0] a, input [3:0] b, output [3:0] y);
  wire [3:0] t;
  assign t = a ^ b;
  assign y = s ? t : a;
endmodule
)";

const char* kMuxRenamed = R"(module other(input sel, input [3:0] left, input [3:0] right, output [3:0] out);
  wire [3:0] mid;
  assign mid = left ^ right;
  assign out = sel ? mid : left;
endmodule
)";

std::array<double, 5> tier_shares(const std::vector<GeneratedModule>& g) {
  std::array<double, 5> s{};
  for (const auto& m : g) s[static_cast<std::size_t>(m.tier)] += 100.0 / static_cast<double>(g.size());
  return s;
}

std::array<double, 5> bin_shares(const std::vector<GeneratedModule>& g) {
  std::array<double, 5> s{};
  for (const auto& m : g) s[static_cast<std::size_t>(gate_bin(m.gates))] += 100.0 / static_cast<double>(g.size());
  return s;
}

std::vector<PoolItem> uniform_pool(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<PoolItem> pool;
  for (std::size_t i = 0; i < n; ++i) {
    PoolItem p;
    char buf[16];
    std::snprintf(buf, sizeof buf, "m%05zu", i);
    p.id = buf;
    p.cluster = static_cast<int>(rng() % 4);
    p.axes.size_bin = static_cast<int>(rng() % kSizeBins);
    p.axes.violates = rng() % 2 == 0;
    p.axes.domain = "logic";
    pool.push_back(p);
  }
  return pool;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const char* name) : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("gen: bins and feasibility") {
  CHECK(gate_bin(0) == -1);
  CHECK(gate_bin(1) == 0);
  CHECK(gate_bin(10) == 0);
  CHECK(gate_bin(11) == 1);
  CHECK(gate_bin(200) == 3);
  CHECK(gate_bin(201) == 4);
  CHECK_FALSE(feasible(Tier::TinyComb, 4));
  CHECK(feasible(Tier::TinyComb, 0));
  CHECK_FALSE(feasible(Tier::FsmComposite, 0));
  CHECK(tier_from_string(to_string(Tier::CounterShift)) == Tier::CounterShift);
  CHECK_ERROR_CODE(tier_from_string("huge"), ErrorCode::FormatError);
}

TEST_CASE("gen: spec validation and infeasible plans") {
  GenSpec s;
  s.tier_mix = {50, 50, 0, 0, 1};
  CHECK_ERROR_CODE(s.validate(), ErrorCode::BadConfig);
  GenSpec tiny;
  tiny.tier_mix = {100, 0, 0, 0, 0};
  tiny.bin_mix = {0, 0, 0, 0, 100};
  tiny.count = 100;
  CHECK_ERROR_CODE(plan_quotas(tiny), ErrorCode::InfeasibleSpec);
}

TEST_CASE("gen: quotas match both mixes") {
  GenSpec s;
  s.count = 1000;
  auto q = plan_quotas(s);
  std::size_t total = 0;
  for (std::size_t t = 0; t < 5; ++t) {
    std::size_t row = 0;
    for (int b = 0; b < kGateBins; ++b) {
      if (!feasible(kAllTiers[t], b)) CHECK(q[t][static_cast<std::size_t>(b)] == 0);
      row += q[t][static_cast<std::size_t>(b)];
    }
    CHECK(std::abs(static_cast<double>(row) / 10.0 - s.tier_mix[t]) <= 1.0);
    total += row;
  }
  CHECK(total == 1000);
}

TEST_CASE("gen: seeded determinism") {
  GenSpec s;
  s.count = 300;
  s.seed = 7;
  auto a = generate(s, 1);
  auto b = generate(s, 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].module.id == b[i].module.id);
    CHECK(a[i].module.source_text == b[i].module.source_text);
  }
  s.seed = 8;
  auto c = generate(s, 1);
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i].module.source_text == c[i].module.source_text;
  CHECK(same < a.size() / 2);
}

TEST_CASE("gen: realized mixes within 3 points") {
  GenSpec s;
  s.count = 1000;
  s.seed = 3;
  auto g = generate(s, 2);
  auto tiers = tier_shares(g), bins = bin_shares(g);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(std::abs(tiers[i] - s.tier_mix[i]) <= 3.0);
    CHECK(std::abs(bins[i] - s.bin_mix[i]) <= 3.0);
  }
  for (const auto& m : g) {
    Netlist n = elaborate(verilog::parse(m.module.source_text));
    CHECK(static_cast<int>(n.gates.size()) == m.gates);
  }
}

TEST_CASE("gen: fsm tier has state and a case") {
  GenSpec s;
  s.count = 120;
  s.tier_mix = {0, 0, 0, 0, 100};
  s.bin_mix = {0, 40, 20, 20, 20};
  auto g = generate(s, 1);
  REQUIRE(g.size() == 120);
  for (const auto& m : g) {
    CHECK(m.tier == Tier::FsmComposite);
    Netlist n = elaborate(verilog::parse(m.module.source_text));
    CHECK(!n.flops.empty());
    auto toks = verilog::canonical_tokens(m.module.source_text);
    CHECK(std::find(toks.begin(), toks.end(), "case") != toks.end());
  }
}

TEST_CASE("dedup: overlap metric") {
  CHECK(token_overlap({"a", "b", "c"}, {"a", "b", "c"}) == 1.0);
  CHECK(token_overlap({"a", "a", "b"}, {"a", "b", "b", "c"}) == doctest::Approx(0.5));
  CHECK(token_overlap({"x"}, {"y"}) == 0.0);
}

TEST_CASE("dedup: exact and renamed copies dropped, distinct kept") {
  std::vector<verilog::SourceModule> mods = {
      verilog::make_source_module("a0", kMux),     verilog::make_source_module("a1", kCounter),
      verilog::make_source_module("a2", kMux),     verilog::make_source_module("a3", kMuxRenamed),
      verilog::make_source_module("a4", kAndTree),
  };
  auto kept = dedup(mods, 0.95);
  std::set<std::string> ids;
  for (auto i : kept) ids.insert(mods[i].id);
  CHECK(ids == std::set<std::string>{"a0", "a1", "a4"});
  CHECK(token_overlap(mods[1].token_stream, mods[4].token_stream) < 0.95);
}

TEST_CASE("dedup: input order does not matter") {
  std::vector<verilog::SourceModule> mods = {
      verilog::make_source_module("b2", kMuxRenamed),
      verilog::make_source_module("b1", kMux),
  };
  auto kept = dedup(mods, 0.95);
  REQUIRE(kept.size() == 1);
  CHECK(mods[kept[0]].id == "b1");
}

TEST_CASE("dedup: generated corpus keeps most modules") {
  GenSpec s;
  s.count = 600;
  auto g = generate(s, 1);
  std::vector<verilog::SourceModule> mods;
  for (const auto& m : g) mods.push_back(m.module);
  auto kept = dedup(mods, 0.95);
  CHECK(kept.size() > 420);
  auto copy = mods;
  for (std::size_t i = 0; i < 50; ++i) {
    auto m = mods[i];
    m.id = "z" + m.id;
    copy.push_back(m);
  }
  CHECK(dedup(copy, 0.95).size() == kept.size());
}

TEST_CASE("annotate: AND gate") {
  auto lib = CellLibrary::default_library();
  auto a = annotate(verilog::make_source_module("and", "module m(input a, input b, output y);\n  assign y = a & b;\nendmodule\n"),
                    Tier::TinyComb, "logic", lib, "typ", 1000);
  CHECK(a.gates == 1);
  CHECK(a.flops == 0);
  CHECK(a.depth == 1);
  CHECK(a.paths == 1);
  CHECK(a.wns == 1000 - 32);
  CHECK(a.tns == 0);
  CHECK_FALSE(strat_axes(a).violates);
  CHECK(strat_axes(a).state == Statefulness::Comb);
}

TEST_CASE("annotate: 64-bit ripple adder violates at 500 ps") {
  auto lib = CellLibrary::default_library();
  auto m = verilog::make_source_module(
      "add", "module add(input [63:0] a, input [63:0] b, output [63:0] s);\n  assign s = a + b;\nendmodule\n");
  auto a = annotate(m, Tier::StructuredComb, "arith", lib, "typ", 500);
  auto label = slackcast::label(m, lib, "typ", TimingConstraint{500});
  CHECK(a.wns == label.wns);
  CHECK(a.tns == label.tns);
  CHECK(a.wns < 0);
  CHECK(strat_axes(a).violates);
  CHECK(a.depth > 63);
}

TEST_CASE("annotate: json round trip") {
  Annotation a{"g000001", 12, 3, 5, 4, -12.5, -40, Tier::ElementalSeq, "storage"};
  auto b = annotation_from_json(to_json(a));
  CHECK(b.id == a.id);
  CHECK(b.wns == a.wns);
  CHECK(b.tns == a.tns);
  CHECK(b.tier == a.tier);
  CHECK(to_json(a)["tns_ps"].is_number_integer());
  CHECK_ERROR_CODE(annotation_from_json(nlohmann::json{{"id", "x"}}), ErrorCode::FormatError);
}

TEST_CASE("strat: axes thresholds") {
  Annotation a;
  a.gates = 200;
  a.flops = 16;
  CHECK(strat_axes(a).size_bin == 0);
  CHECK(strat_axes(a).state == Statefulness::SeqLight);
  a.gates = 201;
  a.flops = 17;
  CHECK(strat_axes(a).size_bin == 1);
  CHECK(strat_axes(a).state == Statefulness::SeqHeavy);
  a.gates = 1001;
  CHECK(strat_axes(a).size_bin == 3);
}

TEST_CASE("kmeans: one cluster") {
  std::vector<std::vector<double>> pts = {{1, 0}, {0, 1}, {0.7, 0.7}};
  auto r = kmeans_cluster(pts, 1, 3);
  CHECK(r.assignment == std::vector<int>{0, 0, 0});
}

TEST_CASE("kmeans: separated blobs") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.02);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 40; ++i) {
    std::vector<double> p(4, 0.0);
    p[static_cast<std::size_t>(i % 2)] = 1.0;
    for (auto& v : p) v += noise(rng);
    pts.push_back(p);
  }
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto r = kmeans_cluster(pts, 2, seed);
    CHECK(r.assignment[0] != r.assignment[1]);
    for (std::size_t i = 2; i < pts.size(); ++i) CHECK(r.assignment[i] == r.assignment[i % 2]);
  }
}

TEST_CASE("kmeans: K = count") {
  std::vector<std::vector<double>> pts = {{1, 0}, {0, 1}, {0.6, 0.8}, {0.8, 0.6}};
  auto r = kmeans_cluster(pts, 4, 9);
  CHECK(r.inertia == 0.0);
  std::set<int> distinct(r.assignment.begin(), r.assignment.end());
  CHECK(distinct.size() == 4);
  CHECK_ERROR_CODE(kmeans_cluster(pts, 5, 1), ErrorCode::DegenerateK);
  CHECK_ERROR_CODE(kmeans_cluster(pts, 0, 1), ErrorCode::DegenerateK);
}

TEST_CASE("kmeans: deterministic per seed") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u;
  std::vector<std::vector<double>> pts(100, std::vector<double>(6));
  for (auto& p : pts)
    for (auto& v : p) v = u(rng);
  auto a = kmeans_cluster(pts, 5, 11), b = kmeans_cluster(pts, 5, 11);
  CHECK(a.assignment == b.assignment);
  CHECK(a.inertia == b.inertia);
  CHECK(a.iterations <= 100);
}

TEST_CASE("sample: uniform pool keeps shares") {
  auto pool = uniform_pool(4000, 1);
  std::map<std::tuple<int, int, bool>, double> pool_share;
  for (const auto& p : pool) pool_share[{p.cluster, p.axes.size_bin, p.axes.violates}] += 100.0 / 4000;
  std::map<std::string, const PoolItem*> by_id;
  for (const auto& p : pool) by_id[p.id] = &p;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    SampleOptions o;
    o.seed = seed;
    auto ids = stratified_sample(pool, 1000, o);
    REQUIRE(ids.size() == 1000);
    CHECK(std::is_sorted(ids.begin(), ids.end()));
    std::map<std::tuple<int, int, bool>, double> got;
    for (const auto& id : ids) {
      const auto* p = by_id.at(id);
      got[{p->cluster, p->axes.size_bin, p->axes.violates}] += 100.0 / 1000;
    }
    for (const auto& [cell, share] : pool_share) CHECK(std::abs(got[cell] - share) <= 2.0);
  }
}

TEST_CASE("sample: rare tag doubled") {
  auto pool = uniform_pool(4000, 2);
  for (std::size_t i = 0; i < pool.size(); i += 20) pool[i].axes.domain = "crc";  // 5%
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    SampleOptions o;
    o.seed = seed;
    auto ids = stratified_sample(pool, 1000, o);
    std::set<std::string> chosen(ids.begin(), ids.end());
    double rare = 0;
    for (const auto& p : pool)
      if (p.axes.domain == "crc" && chosen.count(p.id)) rare += 100.0 / 1000;
    CHECK(std::abs(rare - 10.0) <= 2.0);
  }
}

TEST_CASE("sample: full target is identity, errors") {
  auto pool = uniform_pool(300, 3);
  auto ids = stratified_sample(pool, 300, SampleOptions{});
  std::vector<std::string> all;
  for (const auto& p : pool) all.push_back(p.id);
  std::sort(all.begin(), all.end());
  CHECK(ids == all);
  CHECK_ERROR_CODE(stratified_sample({}, 0, SampleOptions{}), ErrorCode::EmptyPool);
  CHECK_ERROR_CODE(stratified_sample(pool, 301, SampleOptions{}), ErrorCode::BadConfig);
  auto a = stratified_sample(pool, 100, SampleOptions{});
  auto b = stratified_sample(pool, 100, SampleOptions{});
  CHECK(a == b);
}

TEST_CASE("split: sizes, disjointness, determinism") {
  std::vector<std::string> ids;
  std::vector<std::uint64_t> hashes;
  for (int i = 0; i < 1000; ++i) {
    ids.push_back("m" + std::to_string(1000 + i));
    hashes.push_back(static_cast<std::uint64_t>(i) * 7919);
  }
  auto m = split(ids, hashes, {0.5, 0.25, 0.25}, 4);
  CHECK(m.train.size() == 500);
  CHECK(m.rag.size() == 250);
  CHECK(m.test.size() == 250);
  std::set<std::string> seen;
  for (const auto* v : {&m.train, &m.rag, &m.test})
    for (const auto& id : *v) CHECK(seen.insert(id).second);
  CHECK(seen.size() == 1000);
  auto again = split(ids, hashes, {0.5, 0.25, 0.25}, 4);
  CHECK(again.train == m.train);
  CHECK(again.test == m.test);
  CHECK_ERROR_CODE(split(ids, hashes, {0.5, 0.25, 0.3}, 4), ErrorCode::BadConfig);
}

TEST_CASE("split: token hash collision across splits") {
  std::vector<std::string> ids;
  std::vector<std::uint64_t> hashes;
  for (int i = 0; i < 100; ++i) {
    ids.push_back("m" + std::to_string(i));
    hashes.push_back(42);
  }
  CHECK_ERROR_CODE(split(ids, hashes, {0.5, 0.25, 0.25}, 1), ErrorCode::CollisionAfterDedup);
  auto m = split(ids, hashes, {1.0, 0.0, 0.0}, 1);
  CHECK(m.train.size() == 100);
}

TEST_CASE("curate: stage order and artifacts") {
  TempDir dir("slackcast_curate_test");
  const auto d = dir.path.string();
  CurateOptions o;
  o.sample = 70;
  o.clusters = 4;
  CHECK_ERROR_CODE(stage_dedup(d, o), ErrorCode::BadConfig);
  CHECK_ERROR_CODE(stage_filter(d, o), ErrorCode::BadConfig);

  GenSpec s;
  s.count = 100;
  write_generated(d, generate(s, 1));
  CHECK_ERROR_CODE(stage_annotate(d, o), ErrorCode::BadConfig);
  stage_filter(d, o);
  CHECK_ERROR_CODE(stage_cluster(d, o), ErrorCode::BadConfig);
  stage_dedup(d, o);
  stage_annotate(d, o);
  CHECK_ERROR_CODE(stage_sample(d, o), ErrorCode::BadConfig);
  stage_stratify(d, o);
  stage_cluster(d, o);
  stage_sample(d, o);
  stage_split(d, o);

  auto c = load_corpus(d);
  CHECK(c.manifest.train.size() + c.manifest.rag.size() + c.manifest.test.size() == 70);
  CHECK(c.manifest.rag.size() == 20);
  CHECK(c.manifest.test.size() == 10);
  auto lib = CellLibrary::default_library();
  for (const auto& id : c.manifest.test) {
    auto l = slackcast::label(c.module(id), lib, "typ", TimingConstraint{o.clock_period});
    CHECK(c.annotation(id).wns == l.wns);
    CHECK(c.annotation(id).tns == l.tns);
  }
  auto slow = relabel(c, c.manifest.test, lib, "slow", o.clock_period);
  for (std::size_t i = 0; i < slow.size(); ++i) CHECK(slow[i].wns <= c.annotation(c.manifest.test[i]).wns);
  CHECK_ERROR_CODE(relabel(c, c.manifest.test, lib, "hot", 1000), ErrorCode::UnknownCorner);

  TempDir again("slackcast_curate_test2");
  write_generated(again.path.string(), generate(s, 2));
  curate(again.path.string(), o);
  auto c2 = load_corpus(again.path.string());
  CHECK(c2.manifest.train == c.manifest.train);
  CHECK(c2.manifest.test == c.manifest.test);
}
