#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "slackcast/corpus.hpp"
#include "slackcast/elaborate.hpp"
#include "slackcast/error.hpp"
#include "slackcast/parallel.hpp"
#include "slackcast/sta.hpp"
#include "slackcast/stage1.hpp"

namespace fs = std::filesystem;

namespace slackcast::corpus {

// ------------------------------------------------------------------ dedup

namespace {

using Bag = std::vector<std::uint32_t>;  // sorted interned tokens

std::size_t intersection(const Bag& a, const Bag& b) {
  std::size_t i = 0, j = 0, n = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

class Interner {
 public:
  Bag bag(const std::vector<std::string>& tokens) {
    Bag out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(ids_.try_emplace(t, static_cast<std::uint32_t>(ids_.size())).first->second);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::unordered_map<std::string, std::uint32_t> ids_;
};

}  // namespace

double token_overlap(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  Interner in;
  Bag x = in.bag(a), y = in.bag(b);
  return static_cast<double>(intersection(x, y)) / static_cast<double>(std::max(x.size(), y.size()));
}

std::vector<std::size_t> dedup(const std::vector<verilog::SourceModule>& modules, double threshold) {
  std::vector<std::size_t> order(modules.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return modules[a].id < modules[b].id; });
  Interner in;
  std::multimap<std::size_t, std::pair<std::size_t, Bag>> survivors;  // by token count
  std::vector<std::size_t> kept;
  for (std::size_t idx : order) {
    const auto& m = modules[idx];
    Bag bag = in.bag(m.token_stream.empty() ? verilog::canonical_tokens(m.source_text) : m.token_stream);
    const double len = static_cast<double>(bag.size());
    // overlap <= min/max, so only similar lengths can exceed the threshold.
    auto lo = survivors.lower_bound(static_cast<std::size_t>(std::floor(len * threshold)));
    auto hi = survivors.upper_bound(static_cast<std::size_t>(std::ceil(len / std::max(threshold, 1e-9))));
    bool duplicate = false;
    for (auto it = lo; it != hi && !duplicate; ++it) {
      double denom = std::max(len, static_cast<double>(it->first));
      if (denom == 0) {
        duplicate = true;
        break;
      }
      duplicate = static_cast<double>(intersection(bag, it->second.second)) / denom > threshold;
    }
    if (duplicate) continue;
    kept.push_back(idx);
    const std::size_t size = bag.size();
    survivors.emplace(size, std::make_pair(idx, std::move(bag)));
  }
  return kept;
}

// ------------------------------------------------------------- annotation

Annotation annotate(const verilog::SourceModule& module, Tier tier, const std::string& domain, const CellLibrary& lib,
                    const std::string& corner, double clock_period) {
  Netlist n = elaborate(verilog::parse(module.source_text));
  auto report = run_sta(n, lib, corner, TimingConstraint{clock_period});
  Annotation a;
  a.id = module.id;
  a.gates = static_cast<int>(n.gates.size());
  a.flops = static_cast<int>(n.flops.size());
  a.depth = unit_depth(n);
  a.paths = static_cast<int>(report.paths.size());
  a.wns = report.wns;
  a.tns = report.tns;
  a.tier = tier;
  a.domain = domain;
  return a;
}

std::string_view to_string(Statefulness s) {
  switch (s) {
    case Statefulness::Comb: return "comb";
    case Statefulness::SeqLight: return "seq-light";
    case Statefulness::SeqHeavy: return "seq-heavy";
  }
  return "?";
}

StratAxes strat_axes(const Annotation& a) {
  StratAxes s;
  s.size_bin = a.gates <= 200 ? 0 : a.gates <= 500 ? 1 : a.gates <= 1000 ? 2 : 3;
  s.state = a.flops == 0 ? Statefulness::Comb : a.flops <= 16 ? Statefulness::SeqLight : Statefulness::SeqHeavy;
  s.violates = a.wns < 0;
  s.domain = a.domain;
  return s;
}

// --------------------------------------------------------------- sampling

std::vector<std::string> stratified_sample(const std::vector<PoolItem>& pool, std::size_t target,
                                           const SampleOptions& options) {
  if (pool.empty()) throw Error(ErrorCode::EmptyPool, "nothing to sample from");
  if (target > pool.size())
    throw Error(ErrorCode::BadConfig, "sample target " + std::to_string(target) + " exceeds pool size " +
                                          std::to_string(pool.size()));
  if (!(options.factor > 0)) throw Error(ErrorCode::BadConfig, "oversample factor must be positive");
  const std::set<std::string> rare(options.oversample.begin(), options.oversample.end());

  using Key = std::tuple<int, int, bool, bool>;
  std::map<Key, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& p = pool[i];
    cells[{p.cluster, p.axes.size_bin, p.axes.violates, rare.count(p.axes.domain) > 0}].push_back(i);
  }
  std::vector<std::vector<std::size_t>> members;
  std::vector<double> weight;
  for (auto& [key, idx] : cells) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return pool[a].id < pool[b].id; });
    weight.push_back(static_cast<double>(idx.size()) * (std::get<3>(key) ? options.factor : 1.0));
    members.push_back(idx);
  }

  // Proportional quotas, capped at cell size, excess redistributed.
  const std::size_t m = members.size();
  std::vector<double> quota(m, 0.0);
  std::vector<char> capped(m, 0);
  double remaining = static_cast<double>(target);
  for (int round = 0; round < static_cast<int>(m) + 1 && remaining > 1e-9; ++round) {
    double free_weight = 0;
    for (std::size_t c = 0; c < m; ++c)
      if (!capped[c]) free_weight += weight[c];
    if (free_weight <= 0) break;
    bool any = false;
    for (std::size_t c = 0; c < m; ++c) {
      if (capped[c]) continue;
      double want = quota[c] + remaining * weight[c] / free_weight;
      double size = static_cast<double>(members[c].size());
      if (want >= size) {
        capped[c] = 1;
        any = true;
      }
    }
    if (!any) {
      for (std::size_t c = 0; c < m; ++c)
        if (!capped[c]) quota[c] += remaining * weight[c] / free_weight;
      remaining = 0;
      break;
    }
    remaining = static_cast<double>(target);
    for (std::size_t c = 0; c < m; ++c) {
      if (capped[c]) {
        quota[c] = static_cast<double>(members[c].size());
        remaining -= quota[c];
      } else {
        quota[c] = 0;
      }
    }
  }

  std::vector<std::size_t> take(m);
  std::size_t total = 0;
  std::vector<std::pair<double, std::size_t>> rest;
  for (std::size_t c = 0; c < m; ++c) {
    take[c] = std::min(members[c].size(), static_cast<std::size_t>(std::floor(quota[c] + 1e-9)));
    total += take[c];
    if (take[c] < members[c].size()) rest.push_back({quota[c] - std::floor(quota[c] + 1e-9), c});
  }
  std::stable_sort(rest.begin(), rest.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; total < target && !rest.empty(); i = (i + 1) % rest.size()) {
    auto c = rest[i].second;
    if (take[c] < members[c].size()) {
      ++take[c];
      ++total;
    }
  }

  std::mt19937_64 rng(options.seed);
  std::vector<std::string> out;
  for (std::size_t c = 0; c < m; ++c) {
    auto idx = members[c];
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i = 0; i < take[c]; ++i) out.push_back(pool[idx[i]].id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ------------------------------------------------------------------ split

SplitManifest split(const std::vector<std::string>& ids, const std::vector<std::uint64_t>& token_hashes,
                    std::array<double, 3> ratios, std::uint64_t seed) {
  if (ids.size() != token_hashes.size()) throw Error(ErrorCode::DimensionMismatch, "ids and hashes differ in count");
  for (double r : ratios)
    if (!(r >= 0)) throw Error(ErrorCode::BadConfig, "split ratios must be nonnegative");
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) throw Error(ErrorCode::BadConfig, "split ratios must sum to 1");
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (ids[order[i]] == ids[order[i - 1]]) throw Error(ErrorCode::DuplicateId, "duplicate id " + ids[order[i]]);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const double n = static_cast<double>(ids.size());
  auto rag = static_cast<std::size_t>(std::floor(ratios[1] * n + 1e-9));
  auto test = static_cast<std::size_t>(std::floor(ratios[2] * n + 1e-9));
  SplitManifest m;
  m.seed = seed;
  std::vector<int> part(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    std::size_t idx = order[i];
    auto& dst = i < rag ? m.rag : i < rag + test ? m.test : m.train;
    part[idx] = i < rag ? 1 : i < rag + test ? 2 : 0;
    dst.push_back(ids[idx]);
  }
  std::map<std::uint64_t, int> owner;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto [it, fresh] = owner.emplace(token_hashes[i], part[i]);
    if (!fresh && it->second != part[i])
      throw Error(ErrorCode::CollisionAfterDedup, "token hash of " + ids[i] + " appears in two splits");
  }
  for (auto* v : {&m.train, &m.rag, &m.test}) std::sort(v->begin(), v->end());
  return m;
}

// ------------------------------------------------------------------- json

namespace {

nlohmann::json ps(double v) {
  if (std::isfinite(v) && v == std::round(v) && std::abs(v) < 9e15) return static_cast<long long>(v);
  return v;
}

}  // namespace

nlohmann::json to_json(const Annotation& a) {
  return {{"id", a.id},       {"gates", a.gates},         {"flops", a.flops}, {"depth", a.depth},
          {"paths", a.paths}, {"wns_ps", ps(a.wns)},       {"tns_ps", ps(a.tns)},
          {"tier", std::string(to_string(a.tier))},       {"domain", a.domain}};
}

Annotation annotation_from_json(const nlohmann::json& j) {
  try {
    Annotation a;
    a.id = j.at("id").get<std::string>();
    a.gates = j.at("gates").get<int>();
    a.flops = j.at("flops").get<int>();
    a.depth = j.at("depth").get<int>();
    a.paths = j.at("paths").get<int>();
    a.wns = j.at("wns_ps").get<double>();
    a.tns = j.at("tns_ps").get<double>();
    a.tier = tier_from_string(j.at("tier").get<std::string>());
    a.domain = j.at("domain").get<std::string>();
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("malformed annotation: ") + e.what());
  }
}

nlohmann::json to_json(const SplitManifest& m) {
  return {{"train", m.train},     {"rag", m.rag},         {"test", m.test},
          {"seed", m.seed},       {"library", m.library}, {"corner", m.corner},
          {"clock_ps", ps(m.clock_period)}};
}

SplitManifest manifest_from_json(const nlohmann::json& j) {
  try {
    SplitManifest m;
    m.train = j.at("train").get<std::vector<std::string>>();
    m.rag = j.at("rag").get<std::vector<std::string>>();
    m.test = j.at("test").get<std::vector<std::string>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.library = j.at("library").get<std::string>();
    m.corner = j.at("corner").get<std::string>();
    m.clock_period = j.at("clock_ps").get<double>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("malformed manifest: ") + e.what());
  }
}

// -------------------------------------------------------- corpus directory

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + p.string());
}

nlohmann::json read_json(const fs::path& p) {
  try {
    return nlohmann::json::parse(read_file(p));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, p.string() + ": " + e.what());
  }
}

std::vector<nlohmann::json> read_jsonl(const fs::path& p) {
  std::vector<nlohmann::json> out;
  std::istringstream in(read_file(p));
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::FormatError, p.string() + ": " + e.what());
    }
  }
  return out;
}

// Loads the artifact of the stage `needs`, or explains what to run first.
nlohmann::json require(const std::string& dir, const char* stage, const char* file, const char* needs) {
  fs::path p = fs::path(dir) / file;
  if (!fs::exists(p))
    throw Error(ErrorCode::BadConfig, std::string("stage '") + stage + "' needs " + p.string() + "; run '" + needs +
                                          "' first");
  return read_json(p);
}

struct GenRecord {
  std::string id;
  Tier tier;
  std::string domain;
};

std::map<std::string, GenRecord> generated_records(const std::string& dir) {
  std::map<std::string, GenRecord> out;
  for (const auto& j : read_jsonl(fs::path(dir) / "generated.jsonl")) {
    GenRecord r{j.at("id").get<std::string>(), tier_from_string(j.at("tier").get<std::string>()),
                j.at("domain").get<std::string>()};
    out.emplace(r.id, r);
  }
  return out;
}

verilog::SourceModule load_module(const std::string& dir, const std::string& id) {
  return verilog::make_source_module(id, read_file(fs::path(dir) / "modules" / (id + ".v")));
}

std::vector<std::string> ids_of(const nlohmann::json& j, const char* key) {
  return j.at(key).get<std::vector<std::string>>();
}

std::map<std::string, Annotation> annotations_by_id(const std::string& dir) {
  fs::path p = fs::path(dir) / "annotations.jsonl";
  if (!fs::exists(p)) throw Error(ErrorCode::BadConfig, "missing " + p.string() + "; run 'annotate' first");
  std::map<std::string, Annotation> out;
  for (const auto& j : read_jsonl(p)) {
    auto a = annotation_from_json(j);
    out.emplace(a.id, a);
  }
  return out;
}

}  // namespace

void write_generated(const std::string& dir, const std::vector<GeneratedModule>& modules) {
  fs::create_directories(fs::path(dir) / "modules");
  std::string index;
  for (const auto& m : modules) {
    write_file(fs::path(dir) / "modules" / (m.module.id + ".v"), m.module.source_text);
    nlohmann::json j = {{"id", m.module.id}, {"tier", std::string(to_string(m.tier))}, {"domain", m.domain}, {"gates", m.gates}};
    index += j.dump() + "\n";
  }
  write_file(fs::path(dir) / "generated.jsonl", index);
}

void stage_filter(const std::string& dir, const CurateOptions& o) {
  fs::path gen = fs::path(dir) / "generated.jsonl";
  if (!fs::exists(gen)) throw Error(ErrorCode::BadConfig, "stage 'filter' needs " + gen.string() + "; run 'gen' first");
  auto records = generated_records(dir);
  std::vector<std::string> ids;
  for (const auto& [id, r] : records) ids.push_back(id);
  std::vector<std::string> error(ids.size());
  parallel_for(ids.size(), o.jobs, [&](std::size_t i) {
    try {
      elaborate(verilog::parse(load_module(dir, ids[i]).source_text));
    } catch (const Error& e) {
      error[i] = std::string(to_string(e.code())) + ": " + e.what();
    }
  });
  nlohmann::json kept = nlohmann::json::array(), rejected = nlohmann::json::array();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (error[i].empty()) kept.push_back(ids[i]);
    else rejected.push_back({{"id", ids[i]}, {"error", error[i]}});
  }
  write_file(fs::path(dir) / "stages" / "filter.json",
             nlohmann::json{{"stage", "filter"}, {"kept", kept}, {"rejected", rejected}}.dump(1) + "\n");
}

void stage_dedup(const std::string& dir, const CurateOptions& o) {
  auto prev = require(dir, "dedup", "stages/filter.json", "filter");
  auto ids = ids_of(prev, "kept");
  std::vector<verilog::SourceModule> mods(ids.size());
  parallel_for(ids.size(), o.jobs, [&](std::size_t i) { mods[i] = load_module(dir, ids[i]); });
  auto survivors = dedup(mods, o.dedup_threshold);
  std::vector<std::string> kept;
  for (auto i : survivors) kept.push_back(ids[i]);
  std::sort(kept.begin(), kept.end());
  std::set<std::string> keep(kept.begin(), kept.end());
  std::vector<std::string> dropped;
  for (const auto& id : ids)
    if (!keep.count(id)) dropped.push_back(id);
  write_file(fs::path(dir) / "stages" / "dedup.json",
             nlohmann::json{{"stage", "dedup"}, {"threshold", o.dedup_threshold}, {"kept", kept}, {"dropped", dropped}}
                     .dump(1) +
                 "\n");
}

void stage_annotate(const std::string& dir, const CurateOptions& o) {
  auto prev = require(dir, "annotate", "stages/dedup.json", "dedup");
  auto ids = ids_of(prev, "kept");
  auto records = generated_records(dir);
  std::vector<Annotation> out(ids.size());
  parallel_for(ids.size(), o.jobs, [&](std::size_t i) {
    const auto& r = records.at(ids[i]);
    out[i] = annotate(load_module(dir, ids[i]), r.tier, r.domain, o.library, o.corner, o.clock_period);
  });
  std::string text;
  for (const auto& a : out) text += to_json(a).dump() + "\n";
  write_file(fs::path(dir) / "annotations.jsonl", text);
  write_file(fs::path(dir) / "stages" / "annotate.json",
             nlohmann::json{{"stage", "annotate"},
                            {"library", o.library.name},
                            {"corner", o.corner},
                            {"clock_ps", ps(o.clock_period)},
                            {"count", out.size()}}
                     .dump(1) +
                 "\n");
}

void stage_stratify(const std::string& dir, const CurateOptions&) {
  require(dir, "stratify", "stages/annotate.json", "annotate");
  nlohmann::json items = nlohmann::json::array();
  for (const auto& [id, a] : annotations_by_id(dir)) {
    auto s = strat_axes(a);
    items.push_back({{"id", id},
                     {"size_bin", s.size_bin},
                     {"state", std::string(to_string(s.state))},
                     {"violates", s.violates},
                     {"domain", s.domain}});
  }
  write_file(fs::path(dir) / "stages" / "stratify.json",
             nlohmann::json{{"stage", "stratify"}, {"items", items}}.dump(1) + "\n");
}

void stage_cluster(const std::string& dir, const CurateOptions& o) {
  auto prev = require(dir, "cluster", "stages/stratify.json", "stratify");
  std::vector<std::string> ids;
  for (const auto& item : prev.at("items")) ids.push_back(item.at("id").get<std::string>());
  std::vector<std::vector<double>> points(ids.size());
  parallel_for(ids.size(), o.jobs, [&](std::size_t i) {
    auto fp = stage1::fingerprint_source(load_module(dir, ids[i]).source_text, o.clock_period);
    points[i].assign(fp.s.begin(), fp.s.end());
  });
  int k = std::min<int>(o.clusters, static_cast<int>(ids.size()));
  auto r = kmeans_cluster(points, k, o.seed);
  nlohmann::json assignment = nlohmann::json::object();
  for (std::size_t i = 0; i < ids.size(); ++i) assignment[ids[i]] = r.assignment[i];
  write_file(fs::path(dir) / "clusters.json", nlohmann::json{{"stage", "cluster"},
                                                             {"k", k},
                                                             {"seed", o.seed},
                                                             {"iterations", r.iterations},
                                                             {"inertia", r.inertia},
                                                             {"assignment", assignment}}
                                                      .dump(1) +
                                                  "\n");
}

void stage_sample(const std::string& dir, const CurateOptions& o) {
  auto clusters = require(dir, "sample", "clusters.json", "cluster");
  auto strata = require(dir, "sample", "stages/stratify.json", "stratify");
  std::vector<PoolItem> pool;
  for (const auto& item : strata.at("items")) {
    PoolItem p;
    p.id = item.at("id").get<std::string>();
    p.axes.size_bin = item.at("size_bin").get<int>();
    p.axes.violates = item.at("violates").get<bool>();
    p.axes.domain = item.at("domain").get<std::string>();
    p.cluster = clusters.at("assignment").at(p.id).get<int>();
    pool.push_back(p);
  }
  auto options = o.sampling;
  options.seed = o.seed;
  auto selected = stratified_sample(pool, std::min(o.sample, pool.size()), options);
  write_file(fs::path(dir) / "stages" / "sample.json",
             nlohmann::json{{"stage", "sample"}, {"target", o.sample}, {"selected", selected}}.dump(1) + "\n");
}

void stage_split(const std::string& dir, const CurateOptions& o) {
  auto prev = require(dir, "split", "stages/sample.json", "sample");
  auto ids = ids_of(prev, "selected");
  std::vector<std::uint64_t> hashes(ids.size());
  parallel_for(ids.size(), o.jobs, [&](std::size_t i) { hashes[i] = verilog::token_hash(load_module(dir, ids[i]).token_stream); });
  auto m = split(ids, hashes, o.ratios, o.seed);
  m.library = o.library.name;
  m.corner = o.corner;
  m.clock_period = o.clock_period;
  write_file(fs::path(dir) / "manifest.json", to_json(m).dump(1) + "\n");
}

void curate(const std::string& dir, const CurateOptions& o) {
  stage_filter(dir, o);
  stage_dedup(dir, o);
  stage_annotate(dir, o);
  stage_stratify(dir, o);
  stage_cluster(dir, o);
  stage_sample(dir, o);
  stage_split(dir, o);
}

const verilog::SourceModule& Corpus::module(const std::string& id) const {
  auto it = std::lower_bound(modules.begin(), modules.end(), id,
                             [](const verilog::SourceModule& m, const std::string& key) { return m.id < key; });
  if (it == modules.end() || it->id != id) throw Error(ErrorCode::FormatError, "corpus has no module " + id);
  return *it;
}

const Annotation& Corpus::annotation(const std::string& id) const {
  auto it = std::lower_bound(annotations.begin(), annotations.end(), id,
                             [](const Annotation& a, const std::string& key) { return a.id < key; });
  if (it == annotations.end() || it->id != id) throw Error(ErrorCode::FormatError, "corpus has no annotation for " + id);
  return *it;
}

Corpus load_corpus(const std::string& dir) {
  Corpus c;
  c.dir = dir;
  fs::path manifest = fs::path(dir) / "manifest.json";
  if (!fs::exists(manifest)) throw Error(ErrorCode::IoError, "no manifest.json in " + dir + "; run 'curate' first");
  c.manifest = manifest_from_json(read_json(manifest));
  for (auto& [id, a] : annotations_by_id(dir)) c.annotations.push_back(a);
  c.modules.resize(c.annotations.size());
  for (std::size_t i = 0; i < c.annotations.size(); ++i) c.modules[i] = load_module(dir, c.annotations[i].id);
  return c;
}

std::vector<Annotation> relabel(const Corpus& corpus, const std::vector<std::string>& ids, const CellLibrary& lib,
                                const std::string& corner, double clock_period, unsigned jobs) {
  lib.scale(corner);
  std::vector<Annotation> out(ids.size());
  parallel_for(ids.size(), jobs, [&](std::size_t i) {
    const auto& a = corpus.annotation(ids[i]);
    out[i] = annotate(corpus.module(ids[i]), a.tier, a.domain, lib, corner, clock_period);
  });
  return out;
}

}  // namespace slackcast::corpus
