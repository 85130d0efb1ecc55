#pragma once

// Procedural Verilog corpus and the curation pipeline:
//   generate -> filter -> dedup -> annotate -> stratify -> cluster -> sample -> split

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "slackcast/liberty.hpp"
#include "slackcast/verilog.hpp"

namespace slackcast::corpus {

enum class Tier { TinyComb, StructuredComb, ElementalSeq, CounterShift, FsmComposite };

inline constexpr std::array<Tier, 5> kAllTiers = {Tier::TinyComb, Tier::StructuredComb, Tier::ElementalSeq,
                                                  Tier::CounterShift, Tier::FsmComposite};

std::string_view to_string(Tier tier);
Tier tier_from_string(std::string_view name);  // FormatError

/// Gate-count bins 1-10, 11-50, 51-100, 101-200, 201+. Returns -1 for an
/// empty netlist.
inline constexpr int kGateBins = 5;
int gate_bin(int gates);
std::string_view gate_bin_label(int bin);

/// Tier/bin pairs the templates can realize.
bool feasible(Tier tier, int bin);

struct GenSpec {
  std::array<double, 5> tier_mix{11, 15, 22, 24, 28};  // percent, kAllTiers order
  std::array<double, 5> bin_mix{33, 31, 14, 11, 11};   // percent, gate bins
  std::uint64_t seed = 1;
  std::size_t count = 5000;

  /// Mixes must be nonnegative and sum to 100 (BadConfig).
  void validate() const;
};

/// Module counts per (tier, bin), matching both mixes. Throws
/// InfeasibleSpec when no plan inside the feasibility mask exists.
std::array<std::array<std::size_t, kGateBins>, 5> plan_quotas(const GenSpec& spec);

struct GeneratedModule {
  verilog::SourceModule module;
  Tier tier = Tier::TinyComb;
  std::string domain;
  int gates = 0;
};

/// Seeded and order-stable: module i depends only on (seed, i) and the
/// plan, so the result does not depend on `jobs`.
std::vector<GeneratedModule> generate(const GenSpec& spec, unsigned jobs = 1);

/// Domains that count as rare for oversampling by default.
inline const std::vector<std::string> kRareDomains = {"arbiter", "crc"};

// ---------------------------------------------------------------- curation

/// |multiset intersection| / max(|a|, |b|) over canonical tokens.
double token_overlap(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// Greedy scan in id order; a module is dropped when its overlap with any
/// survivor exceeds `threshold`. Returns survivor indices into `modules`.
std::vector<std::size_t> dedup(const std::vector<verilog::SourceModule>& modules, double threshold = 0.95);

struct Annotation {
  std::string id;
  int gates = 0;
  int flops = 0;
  int depth = 0;  // longest combinational path, gates
  int paths = 0;  // timed endpoints
  double wns = 0.0;
  double tns = 0.0;
  Tier tier = Tier::TinyComb;
  std::string domain;
};

/// elaborate + run_sta under (lib, corner, clock).
Annotation annotate(const verilog::SourceModule& module, Tier tier, const std::string& domain, const CellLibrary& lib,
                    const std::string& corner, double clock_period);

enum class Statefulness { Comb, SeqLight, SeqHeavy };
std::string_view to_string(Statefulness s);

/// Size bins 0-200, 201-500, 501-1000, 1001+ gates; seq-heavy above 16 flops.
inline constexpr int kSizeBins = 4;
struct StratAxes {
  int size_bin = 0;
  Statefulness state = Statefulness::Comb;
  bool violates = false;
  std::string domain;
};

StratAxes strat_axes(const Annotation& a);

struct KMeansResult {
  std::vector<int> assignment;
  std::vector<std::vector<double>> centroids;
  double inertia = 0.0;
  int iterations = 0;
};

/// k-means++ seeding and Lloyd iterations (cap 100, stop when assignments
/// are stable). Throws DegenerateK unless 1 <= K <= points.
KMeansResult kmeans_cluster(const std::vector<std::vector<double>>& points, int k, std::uint64_t seed);

struct PoolItem {
  std::string id;
  StratAxes axes;
  int cluster = 0;
};

struct SampleOptions {
  std::vector<std::string> oversample = kRareDomains;
  double factor = 2.0;
  std::uint64_t seed = 1;
};

/// Quotas per (cluster, size bin, difficulty, rare) cell proportional to
/// mass, rare cells weighted by `factor`, capped at the cell size with the
/// excess redistributed. Returns sorted ids. Throws EmptyPool, BadConfig
/// when target exceeds the pool.
std::vector<std::string> stratified_sample(const std::vector<PoolItem>& pool, std::size_t target,
                                           const SampleOptions& options);

struct SplitManifest {
  std::vector<std::string> train, rag, test;
  std::uint64_t seed = 0;
  std::string library;
  std::string corner;
  double clock_period = 0.0;
};

/// Sizes floor(ratio * n) for rag and test, remainder to train. Throws
/// BadConfig unless ratios sum to 1, CollisionAfterDedup when two ids share
/// a token hash across splits.
SplitManifest split(const std::vector<std::string>& ids, const std::vector<std::uint64_t>& token_hashes,
                    std::array<double, 3> ratios, std::uint64_t seed);

nlohmann::json to_json(const Annotation& a);
Annotation annotation_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SplitManifest& m);
SplitManifest manifest_from_json(const nlohmann::json& j);

// ------------------------------------------------------ corpus directory

/// Layout: modules/<id>.v, generated.jsonl, stages/*.json,
/// annotations.jsonl, clusters.json, manifest.json.
struct CurateOptions {
  CellLibrary library = CellLibrary::default_library();
  std::string corner = "typ";
  double clock_period = 1000.0;
  double dedup_threshold = 0.95;
  int clusters = 16;
  std::size_t sample = 3500;
  std::array<double, 3> ratios{4.0 / 7, 2.0 / 7, 1.0 / 7};
  SampleOptions sampling;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
};

void write_generated(const std::string& dir, const std::vector<GeneratedModule>& modules);

/// Each stage reads the previous stage's artifact and raises BadConfig
/// when it is missing.
void stage_filter(const std::string& dir, const CurateOptions& o);
void stage_dedup(const std::string& dir, const CurateOptions& o);
void stage_annotate(const std::string& dir, const CurateOptions& o);
void stage_stratify(const std::string& dir, const CurateOptions& o);
void stage_cluster(const std::string& dir, const CurateOptions& o);
void stage_sample(const std::string& dir, const CurateOptions& o);
void stage_split(const std::string& dir, const CurateOptions& o);

/// All stages in order.
void curate(const std::string& dir, const CurateOptions& o);

/// Loaded corpus directory.
struct Corpus {
  std::string dir;
  std::vector<verilog::SourceModule> modules;  // every curated module, by id
  std::vector<Annotation> annotations;         // parallel to modules
  SplitManifest manifest;

  const verilog::SourceModule& module(const std::string& id) const;
  const Annotation& annotation(const std::string& id) const;
};

Corpus load_corpus(const std::string& dir);

/// Oracle labels for a set of modules under another (lib, corner, clock).
std::vector<Annotation> relabel(const Corpus& corpus, const std::vector<std::string>& ids, const CellLibrary& lib,
                                const std::string& corner, double clock_period, unsigned jobs = 1);

}  // namespace slackcast::corpus
