#include "slackcast/bank.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_set>

#include "slackcast/error.hpp"
#include "slackcast/hash.hpp"

namespace slackcast::retrieval {

namespace {

constexpr double kNormTolerance = 1e-6;

bool before(const Neighbor& a, const Neighbor& b) {
  if (a.sim != b.sim) return a.sim > b.sim;
  return a.id < b.id;
}

}  // namespace

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
  if (s.size() != 16) throw Error(ErrorCode::FormatError, "expected 16 hex digits, got '" + s + "'");
  std::uint64_t v = 0;
  for (char c : s) {
    int d = (c >= '0' && c <= '9') ? c - '0' : (c >= 'a' && c <= 'f') ? c - 'a' + 10 : -1;
    if (d < 0) throw Error(ErrorCode::FormatError, "bad hex digit in '" + s + "'");
    v = (v << 4) | static_cast<std::uint64_t>(d);
  }
  return v;
}

BankEntry make_entry(const std::string& id, std::uint64_t token_hash, const stage1::Fingerprint& fp) {
  return {id, token_hash, std::vector<double>(fp.s.begin(), fp.s.end()),
          std::vector<double>(fp.phi.begin(), fp.phi.end())};
}

std::uint64_t train_checksum(const TrainSplit& train) {
  std::vector<std::string> ids = train.ids;
  std::sort(ids.begin(), ids.end());
  Fnv1a h;
  for (const auto& id : ids) {
    h.add(id);
    h.add(std::string_view("\n", 1));
  }
  return h.value();
}

std::vector<double> softmax(std::span<const double> sims) {
  std::vector<double> w(sims.size());
  if (sims.empty()) return w;
  double top = *std::max_element(sims.begin(), sims.end());
  double total = 0.0;
  for (std::size_t i = 0; i < sims.size(); ++i) total += w[i] = std::exp(sims[i] - top);
  for (double& x : w) x /= total;
  return w;
}

void Bank::finish() {
  std::sort(entries_.begin(), entries_.end(), [](const BankEntry& a, const BankEntry& b) { return a.id < b.id; });
  std::set<std::string> seen;
  Fnv1a h;
  for (const auto& e : entries_) {
    if (!seen.insert(e.id).second) throw Error(ErrorCode::DuplicateId, "duplicate bank id '" + e.id + "'");
    if (e.s.size() != stage1::kFeatureDim || e.phi.size() != stage1::kFeatureDim)
      throw Error(ErrorCode::DimensionMismatch, "bank entry '" + e.id + "' is not " +
                                                    std::to_string(stage1::kFeatureDim) + "-dimensional");
    double sq = 0.0;
    for (double v : e.s) sq += v * v;
    if (!(std::abs(std::sqrt(sq) - 1.0) <= kNormTolerance))
      throw Error(ErrorCode::NonUnitNorm, "bank entry '" + e.id + "' fingerprint is not unit norm");
    h.add(e.id).add(std::string_view("\n", 1)).add_u64(e.token_hash).add(e.s).add(e.phi);
  }
  checksum_ = h.value();
}

Bank build_bank(std::vector<BankEntry> entries, const TrainSplit& train) {
  Bank bank;
  bank.entries_ = std::move(entries);
  bank.finish();
  bank.train_checksum_ = train_checksum(train);
  verify_disjoint(bank, train);
  return bank;
}

void verify_disjoint(const Bank& bank, const TrainSplit& train) {
  if (train_checksum(train) != bank.train_checksum())
    throw Error(ErrorCode::ChecksumMismatch, "bank was built against a different training split");
  std::unordered_set<std::string> ids(train.ids.begin(), train.ids.end());
  std::unordered_set<std::uint64_t> hashes(train.token_hashes.begin(), train.token_hashes.end());
  for (const auto& e : bank.entries()) {
    if (ids.count(e.id))
      throw Error(ErrorCode::DisjointnessViolation, "bank entry '" + e.id + "' is also a training id");
    if (hashes.count(e.token_hash))
      throw Error(ErrorCode::DisjointnessViolation,
                  "bank entry '" + e.id + "' shares its token hash with a training module");
  }
}

NeighborSet Bank::search(std::span<const double> query, std::size_t k, const std::string* skip) const {
  if (k == 0) throw Error(ErrorCode::BadConfig, "k must be at least 1");
  if (query.size() != stage1::kFeatureDim)
    throw Error(ErrorCode::DimensionMismatch, "query fingerprint has dimension " + std::to_string(query.size()));
  NeighborSet all;
  all.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (skip && e.id == *skip) continue;
    double sim = 0.0;
    for (std::size_t j = 0; j < query.size(); ++j) sim += query[j] * e.s[j];
    all.push_back({i, e.id, sim, 0.0});
  }
  if (all.empty()) throw Error(ErrorCode::EmptyBank, "retrieval bank has no candidate entries");
  std::size_t take = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(), before);
  all.resize(take);
  std::vector<double> sims;
  for (const auto& n : all) sims.push_back(n.sim);
  auto w = softmax(sims);
  for (std::size_t i = 0; i < take; ++i) all[i].weight = w[i];
  return all;
}

NeighborSet Bank::retrieve(std::span<const double> query, std::size_t k) const {
  return search(query, k, nullptr);
}

NeighborSet Bank::self_exclusion(const std::string& query_id, std::span<const double> query, std::size_t k) const {
  return search(query, k, &query_id);
}

void save_bank(const Bank& bank, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write bank file " + path);
  nlohmann::json header = {{"layout_version", stage1::kLayoutVersion},
                           {"dim", stage1::kFeatureDim},
                           {"count", bank.size()},
                           {"train_checksum", hex64(bank.train_checksum())},
                           {"checksum", hex64(bank.checksum())}};
  out << header.dump() << '\n';
  for (const auto& e : bank.entries()) {
    nlohmann::json line = {{"id", e.id}, {"token_hash", hex64(e.token_hash)}, {"s", e.s}, {"phi", e.phi}};
    out << line.dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing bank file " + path);
}

Bank bank_from_lines(const std::vector<std::string>& lines) {
  if (lines.empty()) throw Error(ErrorCode::FormatError, "bank file has no header");
  Bank bank;
  try {
    auto header = nlohmann::json::parse(lines[0]);
    if (header.at("layout_version").get<int>() != stage1::kLayoutVersion)
      throw Error(ErrorCode::FormatError, "bank layout version mismatch");
    if (header.at("dim").get<std::size_t>() != stage1::kFeatureDim)
      throw Error(ErrorCode::DimensionMismatch, "bank dimension mismatch");
    auto count = header.at("count").get<std::size_t>();
    if (lines.size() - 1 != count) throw Error(ErrorCode::FormatError, "bank entry count does not match header");
    for (std::size_t i = 1; i < lines.size(); ++i) {
      auto j = nlohmann::json::parse(lines[i]);
      if (j.contains("wns") || j.contains("tns") || j.contains("wns_ps") || j.contains("tns_ps"))
        throw Error(ErrorCode::FormatError, "bank entries must not carry timing labels");
      BankEntry e;
      e.id = j.at("id").get<std::string>();
      e.token_hash = parse_hex64(j.at("token_hash").get<std::string>());
      e.s = j.at("s").get<std::vector<double>>();
      e.phi = j.at("phi").get<std::vector<double>>();
      bank.entries_.push_back(std::move(e));
    }
    bank.finish();
    bank.train_checksum_ = parse_hex64(header.at("train_checksum").get<std::string>());
    if (parse_hex64(header.at("checksum").get<std::string>()) != bank.checksum())
      throw Error(ErrorCode::ChecksumMismatch, "bank content does not match its checksum");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("malformed bank file: ") + e.what());
  }
  return bank;
}

Bank load_bank(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read bank file " + path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) lines.push_back(line);
  return bank_from_lines(lines);
}

}  // namespace slackcast::retrieval
