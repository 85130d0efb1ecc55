#pragma once

// Retrieval bank: an immutable fingerprint index over the rag split with
// exact inner-product top-k search and softmax neighbor weights.
//
// Entries carry no timing labels, so nothing that reads the bank can see
// WNS/TNS of a rag module.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "slackcast/stage1.hpp"

namespace slackcast::retrieval {

struct BankEntry {
  std::string id;
  std::uint64_t token_hash = 0;
  std::vector<double> s;    // unit-norm fingerprint
  std::vector<double> phi;  // raw features (encoder input)
};

BankEntry make_entry(const std::string& id, std::uint64_t token_hash, const stage1::Fingerprint& fp);

struct Neighbor {
  std::size_t index = 0;  // into Bank::entries()
  std::string id;
  double sim = 0.0;
  double weight = 0.0;
};

/// Sorted by descending similarity, ties by ascending id; weights sum to 1.
using NeighborSet = std::vector<Neighbor>;

/// Identity of the training split a bank must stay disjoint from.
struct TrainSplit {
  std::vector<std::string> ids;
  std::vector<std::uint64_t> token_hashes;
};

/// Order-independent checksum of a training split's id set.
std::uint64_t train_checksum(const TrainSplit& train);

class Bank {
 public:
  Bank() = default;

  const std::vector<BankEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::uint64_t train_checksum() const { return train_checksum_; }

  /// Checksum over every entry's id, hash, fingerprint and features.
  std::uint64_t checksum() const { return checksum_; }

  /// Exact top-k by s(query) . s(entry). Throws EmptyBank, BadConfig (k = 0),
  /// DimensionMismatch. Returns min(k, size) neighbors.
  NeighborSet retrieve(std::span<const double> query, std::size_t k) const;

  /// As retrieve, skipping the entry whose id equals query_id.
  NeighborSet self_exclusion(const std::string& query_id, std::span<const double> query, std::size_t k) const;

  friend Bank build_bank(std::vector<BankEntry> entries, const TrainSplit& train);
  friend Bank bank_from_lines(const std::vector<std::string>& lines);

 private:
  NeighborSet search(std::span<const double> query, std::size_t k, const std::string* skip) const;
  void finish();

  std::vector<BankEntry> entries_;  // sorted by id
  std::uint64_t train_checksum_ = 0;
  std::uint64_t checksum_ = 0;
};

/// Validates entries (DuplicateId, DimensionMismatch, NonUnitNorm with
/// tolerance 1e-6) and disjointness from `train` by id and token hash
/// (DisjointnessViolation). Query results do not depend on input order.
Bank build_bank(std::vector<BankEntry> entries, const TrainSplit& train);

/// Raises DisjointnessViolation when the bank shares an id or token hash
/// with `train`, and ChecksumMismatch when `train` is not the split the
/// bank was built against.
void verify_disjoint(const Bank& bank, const TrainSplit& train);

/// Header line {layout_version, dim, count, train_checksum, checksum}
/// followed by one JSON line per entry.
void save_bank(const Bank& bank, const std::string& path);
Bank load_bank(const std::string& path);
Bank bank_from_lines(const std::vector<std::string>& lines);

/// Softmax over similarities with the max subtracted first.
std::vector<double> softmax(std::span<const double> sims);

std::string hex64(std::uint64_t v);
std::uint64_t parse_hex64(const std::string& s);

}  // namespace slackcast::retrieval
