#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "../support/check.hpp"
#include "slackcast/bank.hpp"

using namespace slackcast;
using namespace slackcast::retrieval;

namespace {

std::vector<double> unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<double> v(stage1::kFeatureDim);
  double n = 0;
  for (auto& x : v) n += (x = g(rng)) * x;
  for (auto& x : v) x /= std::sqrt(n);
  return v;
}

BankEntry entry(const std::string& id, std::vector<double> s, std::uint64_t hash = 0) {
  return {id, hash ? hash : std::hash<std::string>{}(id), s, std::vector<double>(stage1::kFeatureDim, 1.0)};
}

std::vector<double> basis(std::size_t i) {
  std::vector<double> v(stage1::kFeatureDim, 0.0);
  v[i] = 1.0;
  return v;
}

}  // namespace

TEST_CASE("bank: empty and single entry") {
  auto empty = build_bank({}, {});
  CHECK(empty.size() == 0);
  CHECK_ERROR_CODE(empty.retrieve(basis(0), 1), ErrorCode::EmptyBank);

  auto one = build_bank({entry("A", basis(3))}, {});
  for (std::size_t k : {1, 2, 5}) {
    auto n = one.retrieve(basis(0), k);
    REQUIRE(n.size() == 1);
    CHECK(n[0].id == "A");
    CHECK(n[0].weight == 1.0);
  }
}

TEST_CASE("bank: validation errors") {
  CHECK_ERROR_CODE(build_bank({entry("A", basis(0)), entry("A", basis(1))}, {}), ErrorCode::DuplicateId);
  CHECK_ERROR_CODE(build_bank({entry("A", std::vector<double>(5, 0.0))}, {}), ErrorCode::DimensionMismatch);
  auto v = basis(0);
  v[0] = 1.01;
  CHECK_ERROR_CODE(build_bank({entry("A", v)}, {}), ErrorCode::NonUnitNorm);
  v[0] = 1.0 + 5e-7;
  CHECK_NOTHROW(build_bank({entry("A", v)}, {}));
}

TEST_CASE("bank: insertion order does not matter") {
  std::mt19937_64 rng(1);
  std::vector<BankEntry> es;
  for (int i = 0; i < 40; ++i) es.push_back(entry("m" + std::to_string(i), unit(rng)));
  auto rev = es;
  std::reverse(rev.begin(), rev.end());
  auto a = build_bank(es, {});
  auto b = build_bank(rev, {});
  CHECK(a.checksum() == b.checksum());
  for (int t = 0; t < 20; ++t) {
    auto q = unit(rng);
    auto x = a.retrieve(q, 5), y = b.retrieve(q, 5);
    REQUIRE(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(x[i].id == y[i].id);
      CHECK(x[i].weight == y[i].weight);
    }
  }
}

TEST_CASE("retrieve: self hit, ties and softmax arithmetic") {
  std::mt19937_64 rng(2);
  std::vector<BankEntry> es;
  for (int i = 0; i < 20; ++i) es.push_back(entry("m" + std::to_string(i), unit(rng)));
  auto bank = build_bank(es, {});
  auto hit = bank.retrieve(es[7].s, 3);
  CHECK(hit[0].id == "m7");
  CHECK(std::abs(hit[0].sim - 1.0) <= 1e-9);

  auto tied = build_bank({entry("c", basis(1)), entry("a", basis(2)), entry("b", basis(3))}, {});
  auto n = tied.retrieve(basis(0), 3);
  REQUIRE(n.size() == 3);
  CHECK(n[0].id == "a");
  CHECK(n[1].id == "b");
  CHECK(n[2].id == "c");
  for (const auto& x : n) CHECK(x.weight == doctest::Approx(1.0 / 3).epsilon(1e-15));

  auto w = softmax(std::vector<double>{0.3 + std::log(2.0), 0.3});
  CHECK(w[0] == doctest::Approx(2.0 / 3).epsilon(1e-14));
  CHECK(w[1] == doctest::Approx(1.0 / 3).epsilon(1e-14));
}

TEST_CASE("retrieve equals a brute-force scan") {
  std::mt19937_64 rng(3);
  std::vector<BankEntry> es;
  for (int i = 0; i < 200; ++i) es.push_back(entry("e" + std::to_string(1000 + i), unit(rng)));
  // Duplicated fingerprints exercise the id tie-break.
  es.push_back(entry("e0000", es[10].s));
  es.push_back(entry("e9999", es[10].s));
  auto bank = build_bank(es, {});
  for (int t = 0; t < 50; ++t) {
    auto q = t % 5 == 0 ? es[10].s : unit(rng);
    std::vector<std::pair<double, std::string>> all;
    for (const auto& e : es) {
      double s = 0;
      for (std::size_t j = 0; j < q.size(); ++j) s += q[j] * e.s[j];
      all.push_back({-s, e.id});
    }
    std::sort(all.begin(), all.end());
    for (std::size_t k : {1, 2, 3, 5}) {
      auto got = bank.retrieve(q, k);
      REQUIRE(got.size() == k);
      double total = 0;
      for (std::size_t i = 0; i < k; ++i) {
        CHECK(got[i].id == all[i].second);
        CHECK(got[i].sim >= -1.0 - 1e-12);
        CHECK(got[i].sim <= 1.0 + 1e-12);
        CHECK(got[i].weight >= 0);
        total += got[i].weight;
        if (i) CHECK(got[i - 1].sim >= got[i].sim);
      }
      CHECK(std::abs(total - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("self_exclusion") {
  auto single = build_bank({entry("A", basis(0))}, {});
  CHECK_ERROR_CODE(single.self_exclusion("A", basis(0), 1), ErrorCode::EmptyBank);
  auto two = build_bank({entry("A", basis(0)), entry("B", basis(1))}, {});
  auto n = two.self_exclusion("A", basis(0), 1);
  REQUIRE(n.size() == 1);
  CHECK(n[0].id == "B");
  auto x = two.self_exclusion("Z", basis(0), 2);
  auto y = two.retrieve(basis(0), 2);
  REQUIRE(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i].id == y[i].id);
}

TEST_CASE("disjointness with the training split") {
  TrainSplit train{{"t1", "t2"}, {111, 222}};
  CHECK_NOTHROW(build_bank({entry("r1", basis(0), 333)}, train));
  CHECK_ERROR_CODE(build_bank({entry("t2", basis(0), 333)}, train), ErrorCode::DisjointnessViolation);
  CHECK_ERROR_CODE(build_bank({entry("r1", basis(0), 222)}, train), ErrorCode::DisjointnessViolation);
  auto bank = build_bank({entry("r1", basis(0), 333)}, train);
  TrainSplit other{{"t1", "t3"}, {111, 444}};
  CHECK_ERROR_CODE(verify_disjoint(bank, other), ErrorCode::ChecksumMismatch);
}

TEST_CASE("bank file round trip carries no labels") {
  std::mt19937_64 rng(4);
  std::vector<BankEntry> es;
  for (int i = 0; i < 10; ++i) es.push_back(entry("m" + std::to_string(i), unit(rng)));
  TrainSplit train{{"x"}, {1}};
  auto bank = build_bank(es, train);
  auto path = (std::filesystem::temp_directory_path() / "slackcast_bank_test.jsonl").string();
  save_bank(bank, path);
  auto back = load_bank(path);
  CHECK(back.checksum() == bank.checksum());
  CHECK(back.train_checksum() == bank.train_checksum());
  CHECK_NOTHROW(verify_disjoint(back, train));
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text.find("wns") == std::string::npos);
  CHECK(text.find("tns") == std::string::npos);
  auto q = unit(rng);
  CHECK(back.retrieve(q, 3)[0].id == bank.retrieve(q, 3)[0].id);

  std::vector<std::string> lines;
  std::ifstream again(path);
  for (std::string l; std::getline(again, l);) lines.push_back(l);
  lines[1].replace(lines[1].find("\"id\""), 4, "\"wns\":-5,\"id\"");
  CHECK_ERROR_CODE(bank_from_lines(lines), ErrorCode::FormatError);
  std::filesystem::remove(path);
}
