#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "slackcast/error.hpp"
#include "slackcast/eval.hpp"
#include "slackcast/parallel.hpp"

namespace fs = std::filesystem;

namespace slackcast::eval {

// --------------------------------------------------------------- workspace

model::Dataset LabeledSplit::dataset() const { return model::make_dataset(samples, wns, tns); }

namespace {

bool matches_manifest(const corpus::Corpus& c, const Setting& s) {
  return s.library.name == c.manifest.library && s.corner == c.manifest.corner &&
         s.clock_period == c.manifest.clock_period;
}

}  // namespace

LabeledSplit labeled_split(const corpus::Corpus& corpus, const std::vector<std::string>& ids, const Setting& setting,
                           unsigned jobs) {
  const double scale = setting.library.scale(setting.corner);
  LabeledSplit out;
  out.ids = ids;
  out.sources.resize(ids.size());
  out.samples.resize(ids.size());
  out.wns.resize(ids.size());
  out.tns.resize(ids.size());
  const bool reuse = matches_manifest(corpus, setting);
  parallel_for(ids.size(), jobs, [&](std::size_t i) {
    const auto& m = corpus.module(ids[i]);
    out.sources[i] = m.source_text;
    out.samples[i] = {stage1::fingerprint_source(m.source_text, setting.clock_period), setting.clock_period, scale};
    corpus::Annotation a = reuse ? corpus.annotation(ids[i])
                                 : corpus::annotate(m, corpus.annotation(ids[i]).tier, corpus.annotation(ids[i]).domain,
                                                    setting.library, setting.corner, setting.clock_period);
    out.wns[i] = a.wns;
    out.tns[i] = a.tns;
  });
  return out;
}

retrieval::TrainSplit train_split(const corpus::Corpus& corpus) {
  retrieval::TrainSplit t;
  for (const auto& id : corpus.manifest.train) {
    t.ids.push_back(id);
    t.token_hashes.push_back(verilog::token_hash(corpus.module(id).token_stream));
  }
  return t;
}

retrieval::Bank corpus_bank(const corpus::Corpus& corpus, unsigned jobs) {
  const auto& ids = corpus.manifest.rag;
  std::vector<retrieval::BankEntry> entries(ids.size());
  parallel_for(ids.size(), jobs, [&](std::size_t i) {
    const auto& m = corpus.module(ids[i]);
    entries[i] = retrieval::make_entry(ids[i], verilog::token_hash(m.token_stream),
                                       stage1::fingerprint_source(m.source_text, corpus.manifest.clock_period));
  });
  return retrieval::build_bank(std::move(entries), train_split(corpus));
}

Workspace make_workspace(const corpus::Corpus& corpus, const Setting& setting, unsigned jobs) {
  Workspace ws;
  ws.setting = setting;
  ws.train = labeled_split(corpus, corpus.manifest.train, setting, jobs);
  ws.test = labeled_split(corpus, corpus.manifest.test, setting, jobs);
  ws.bank = corpus_bank(corpus, jobs);
  return ws;
}

// ---------------------------------------------------------------- training

model::Model train_baseline(const LabeledSplit& train, const PipelineConfig& config, std::uint64_t seed) {
  model::Model m = model::init_model(config.shape, seed);
  auto options = config.train;
  options.seed = seed;
  model::fit_baseline(m, train.dataset(), options);
  return m;
}

model::Model train_steered(const model::Model& baseline, const LabeledSplit& train, const retrieval::Bank& bank,
                           const model::SteeringConfig& steering, const model::TrainOptions& options) {
  steering.validate(baseline.shape.blocks);
  model::Model m = baseline;
  m.steering = steering;
  m.bank_checksum = bank.checksum();
  auto data = train.dataset();
  auto neighbors = model::neighbor_table(bank, train.samples, steering.k);
  model::fit_gamma(m, data, neighbors, options);
  model::refit_head(m, data, &neighbors, options);
  return m;
}

EvalResult evaluate(const model::Model& model, const retrieval::Bank* bank, const LabeledSplit& test, unsigned jobs) {
  if (model.steered) {
    if (!bank) throw Error(ErrorCode::BadConfig, "a steered model needs its retrieval bank");
    if (bank->checksum() != model.bank_checksum)
      throw Error(ErrorCode::ChecksumMismatch, "bank " + retrieval::hex64(bank->checksum()) +
                                                   " is not the one the model was trained against (" +
                                                   retrieval::hex64(model.bank_checksum) + ")");
  }
  std::vector<PredictionRow> rows(test.ids.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = {test.ids[i], test.wns[i], 0.0, test.tns[i], 0.0, {}};
  try {
    auto p = model::predict_samples(model, bank, test.samples, jobs);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      rows[i].yhat_wns = p[i].wns_ps;
      rows[i].yhat_tns = p[i].tns_ps;
    }
  } catch (const Error&) {
    parallel_for(rows.size(), jobs, [&](std::size_t i) {
      try {
        auto p = model::predict_samples(model, bank, {test.samples[i]}, 1);
        rows[i].yhat_wns = p[0].wns_ps;
        rows[i].yhat_tns = p[0].tns_ps;
      } catch (const Error& e) {
        rows[i].error = std::string(to_string(e.code())) + ": " + e.what();
      }
    });
  }
  return score(std::move(rows));
}

// ---------------------------------------------------------------- ablation

std::string_view to_string(Axis axis) {
  switch (axis) {
    case Axis::K: return "k";
    case Axis::Gamma: return "gamma";
    case Axis::Injection: return "injection";
    case Axis::Alpha: return "alpha";
    case Axis::Stage: return "stage";
  }
  return "?";
}

Axis axis_from_string(std::string_view name) {
  for (Axis a : {Axis::K, Axis::Gamma, Axis::Injection, Axis::Alpha, Axis::Stage})
    if (to_string(a) == name) return a;
  throw Error(ErrorCode::BadConfig, "unknown ablation axis '" + std::string(name) + "' (k, gamma, injection, alpha, stage)");
}

namespace {

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

struct Cell {
  std::string label;
  std::function<EvalResult(const model::Model& baseline, std::uint64_t seed)> run;
};

// Stage-1 numbers used directly as the prediction.
EvalResult stage1_only(const LabeledSplit& test, unsigned jobs) {
  std::vector<PredictionRow> rows(test.ids.size());
  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    rows[i] = {test.ids[i], test.wns[i], 0.0, test.tns[i], 0.0, {}};
    try {
      auto r = stage1::approx_report(verilog::parse(test.sources[i]), test.samples[i].clock_period);
      rows[i].yhat_wns = r.wns;
      rows[i].yhat_tns = r.tns;
    } catch (const Error& e) {
      rows[i].error = std::string(to_string(e.code())) + ": " + e.what();
    }
  });
  return score(std::move(rows));
}

// Same split with lexical statistics in place of the Stage-1 features.
LabeledSplit lexical(const LabeledSplit& s) {
  LabeledSplit out = s;
  for (std::size_t i = 0; i < s.samples.size(); ++i)
    out.samples[i].fp = stage1::fingerprint(stage1::token_statistics(s.sources[i]));
  return out;
}

std::vector<Cell> cells(Axis axis, const Workspace& ws, const PipelineConfig& config, const AblationGrid& grid) {
  std::vector<Cell> out;
  auto steered = [&ws, &config](model::SteeringConfig sc) {
    return [&ws, &config, sc](const model::Model& base, std::uint64_t seed) {
      auto options = config.train;
      options.seed = seed;
      auto m = train_steered(base, ws.train, ws.bank, sc, options);
      return evaluate(m, &ws.bank, ws.test, config.jobs);
    };
  };
  switch (axis) {
    case Axis::K:
      for (auto k : grid.k) {
        auto sc = config.steering;
        sc.k = k;
        out.push_back({"k=" + std::to_string(k), steered(sc)});
      }
      break;
    case Axis::Gamma:
      for (double g : grid.gamma) {
        auto sc = config.steering;
        sc.mode = model::GammaMode::Scalar;
        sc.gamma0 = g;
        out.push_back({"gamma=" + fixed(g, 2), steered(sc)});
      }
      {
        auto sc = config.steering;
        sc.mode = model::GammaMode::Diagonal;
        out.push_back({"gamma=diagonal", steered(sc)});
      }
      break;
    case Axis::Injection:
      for (int b : grid.injection) {
        auto sc = config.steering;
        sc.injections = {{b, 1.0}};
        out.push_back({"block=" + std::to_string(b), steered(sc)});
      }
      break;
    case Axis::Alpha: {
      const int last = config.shape.blocks;
      for (double a : grid.alpha) {
        auto sc = config.steering;
        sc.injections = {{last, a}, {last - 1, 1.0 - a}};
        out.push_back({"alpha=" + fixed(a, 2) + " blocks=" + std::to_string(last) + "+" + std::to_string(last - 1),
                       steered(sc)});
      }
      break;
    }
    case Axis::Stage:
      out.push_back({"stage1-only", [&ws, &config](const model::Model&, std::uint64_t) {
                       return stage1_only(ws.test, config.jobs);
                     }});
      out.push_back({"stage2-only", [&ws, &config](const model::Model&, std::uint64_t seed) {
                       auto train = lexical(ws.train);
                       auto m = train_baseline(train, config, seed);
                       return evaluate(m, nullptr, lexical(ws.test), config.jobs);
                     }});
      out.push_back({"full", steered(config.steering)});
      break;
  }
  return out;
}

struct Summary {
  double mean = 0.0, stddev = 0.0;
  std::size_t n = 0;
};

Summary summarize(const AblationRow& row, std::optional<double> TargetScore::*metric, TargetScore EvalResult::*target) {
  std::vector<double> v;
  for (const auto& r : row.per_seed)
    if (r && ((*r).*target.*metric)) v.push_back(*((*r).*target.*metric));
  Summary s;
  s.n = v.size();
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    for (double x : v) s.stddev += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(s.stddev / static_cast<double>(v.size() - 1));
  }
  return s;
}

nlohmann::json summary_json(const Summary& s) {
  if (s.n == 0) return nullptr;
  return {{"mean", s.mean}, {"std", s.stddev}, {"n", s.n}};
}

std::string file_label(const std::string& label) {
  std::string out;
  for (char c : label) out += std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ? c : '_';
  return out;
}

}  // namespace

AblationTable run_ablation(Axis axis, const Workspace& ws, const PipelineConfig& config,
                           const std::vector<std::uint64_t>& seeds, const AblationGrid& grid) {
  if (seeds.empty()) throw Error(ErrorCode::BadConfig, "ablation needs at least one seed");
  auto grid_cells = cells(axis, ws, config, grid);
  if (grid_cells.empty()) throw Error(ErrorCode::BadConfig, "empty ablation grid");
  AblationTable table;
  table.axis = axis;
  table.seeds = seeds;
  for (const auto& c : grid_cells) table.rows.push_back({c.label, {}, {}});
  for (auto seed : seeds) {
    std::optional<model::Model> base;
    std::string base_error;
    try {
      base = train_baseline(ws.train, config, seed);
    } catch (const Error& e) {
      base_error = std::string(to_string(e.code())) + ": " + e.what();
    }
    for (std::size_t i = 0; i < grid_cells.size(); ++i) {
      auto& row = table.rows[i];
      if (!base) {
        row.per_seed.emplace_back();
        row.errors.push_back("baseline failed: " + base_error);
        continue;
      }
      try {
        row.per_seed.push_back(grid_cells[i].run(*base, seed));
        row.errors.emplace_back();
      } catch (const Error& e) {
        row.per_seed.emplace_back();
        row.errors.push_back(std::string(to_string(e.code())) + ": " + e.what());
      }
    }
  }
  return table;
}

nlohmann::json to_json(const AblationTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json seeds = nlohmann::json::array();
    for (std::size_t i = 0; i < row.per_seed.size(); ++i) {
      nlohmann::json cell = {{"seed", table.seeds[i]}};
      if (row.per_seed[i]) cell["result"] = to_json(*row.per_seed[i]);
      if (!row.errors[i].empty()) cell["error"] = row.errors[i];
      seeds.push_back(cell);
    }
    rows.push_back({{"label", row.label},
                    {"r_wns", summary_json(summarize(row, &TargetScore::r, &EvalResult::wns))},
                    {"mape_wns", summary_json(summarize(row, &TargetScore::mape, &EvalResult::wns))},
                    {"r_tns", summary_json(summarize(row, &TargetScore::r, &EvalResult::tns))},
                    {"mape_tns", summary_json(summarize(row, &TargetScore::mape, &EvalResult::tns))},
                    {"seeds", seeds}});
  }
  return {{"axis", std::string(to_string(table.axis))}, {"seeds", table.seeds}, {"rows", rows}};
}

std::string summary_text(const AblationTable& table) {
  auto cell = [](const Summary& s, bool percent) {
    if (s.n == 0) return std::string("n/a");
    std::string v = percent ? fixed(s.mean, 1) + "%" : fixed(s.mean, 3);
    return s.n > 1 ? v + " +/- " + (percent ? fixed(s.stddev, 1) : fixed(s.stddev, 3)) : v;
  };
  std::size_t width = 8;
  for (const auto& row : table.rows) width = std::max(width, row.label.size() + 2);
  std::ostringstream out;
  out << "Ablation over " << to_string(table.axis) << ", " << table.seeds.size() << " seed(s)\n\n";
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(s.size(), w), ' ');
    return s;
  };
  out << pad("row", width) << pad("R_WNS", 20) << pad("MAPE_WNS", 20) << pad("R_TNS", 20) << "MAPE_TNS\n";
  for (const auto& row : table.rows) {
    out << pad(row.label, width) << pad(cell(summarize(row, &TargetScore::r, &EvalResult::wns), false), 20)
        << pad(cell(summarize(row, &TargetScore::mape, &EvalResult::wns), true), 20)
        << pad(cell(summarize(row, &TargetScore::r, &EvalResult::tns), false), 20)
        << cell(summarize(row, &TargetScore::mape, &EvalResult::tns), true) << "\n";
    for (std::size_t i = 0; i < row.errors.size(); ++i)
      if (!row.errors[i].empty()) out << "  seed " << table.seeds[i] << " failed: " << row.errors[i] << "\n";
  }
  return out.str();
}

void write_results(const std::string& dir, const AblationTable& table) {
  fs::create_directories(fs::path(dir) / "predictions");
  auto write = [](const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
    out << text;
  };
  write(fs::path(dir) / "table.json", to_json(table).dump(1) + "\n");
  std::ostringstream csv;
  csv.precision(10);
  csv << "row,seed,r_wns,mape_wns,r_tns,mape_tns,n_failed,error\n";
  auto num = [](const std::optional<double>& v) {
    std::ostringstream s;
    s.precision(10);
    if (v) s << *v;
    return s.str();
  };
  for (const auto& row : table.rows)
    for (std::size_t i = 0; i < row.per_seed.size(); ++i) {
      const auto& r = row.per_seed[i];
      std::string err = row.errors[i];
      std::replace(err.begin(), err.end(), ',', ';');
      csv << '"' << row.label << "\"," << table.seeds[i] << ',' << (r ? num(r->wns.r) : "") << ','
          << (r ? num(r->wns.mape) : "") << ',' << (r ? num(r->tns.r) : "") << ',' << (r ? num(r->tns.mape) : "")
          << ',' << (r ? std::to_string(r->n_failed) : "") << ',' << err << '\n';
      if (r)
        write_predictions_csv(*r, (fs::path(dir) / "predictions" /
                                   (file_label(row.label) + "_seed" + std::to_string(table.seeds[i]) + ".csv"))
                                      .string());
    }
  write(fs::path(dir) / "table.csv", csv.str());
  write(fs::path(dir) / "summary.txt", summary_text(table));
}

// -------------------------------------------------------------- adaptation

std::vector<std::string> adaptation_ids(const corpus::Corpus& corpus, std::size_t n, std::uint64_t seed) {
  const auto& ids = corpus.manifest.train;
  if (n > ids.size())
    throw Error(ErrorCode::BadConfig, "n_adapt " + std::to_string(n) + " exceeds the train split (" +
                                          std::to_string(ids.size()) + ")");
  auto quartile = [](std::vector<int> v, int x) {
    std::sort(v.begin(), v.end());
    int q = 0;
    for (int i = 1; i < 4; ++i)
      if (x > v[v.size() * static_cast<std::size_t>(i) / 4]) q = i;
    return q;
  };
  std::vector<int> gates, depth;
  for (const auto& id : ids) {
    gates.push_back(corpus.annotation(id).gates);
    depth.push_back(corpus.annotation(id).depth);
  }
  std::vector<corpus::PoolItem> pool;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    corpus::PoolItem p;
    p.id = ids[i];
    p.axes.size_bin = quartile(gates, gates[i]);
    p.cluster = quartile(depth, depth[i]);
    pool.push_back(p);
  }
  corpus::SampleOptions o;
  o.oversample.clear();
  o.factor = 1.0;
  o.seed = seed;
  return corpus::stratified_sample(pool, n, o);
}

model::Model adapt_head(const model::Model& model, const retrieval::Bank& bank, const corpus::Corpus& corpus,
                        const Setting& target, const AdaptOptions& options) {
  if (model.steered && bank.checksum() != model.bank_checksum)
    throw Error(ErrorCode::AdaptationViolation, "bank " + retrieval::hex64(bank.checksum()) +
                                                    " differs from the one the model was trained against");
  const auto encoder_sum = model.encoder_checksum(), gamma_sum = model.gamma_checksum();
  const auto bank_sum = bank.checksum();
  auto split = labeled_split(corpus, adaptation_ids(corpus, options.n_adapt, options.seed), target, options.jobs);
  auto data = split.dataset();
  model::Model out = model;
  auto train = options.train;
  train.seed = options.seed;
  try {
    if (model.steered) {
      auto neighbors = model::neighbor_table(bank, split.samples, model.steering.k);
      model::refit_head(out, data, &neighbors, train);
    } else {
      model::refit_head(out, data, nullptr, train);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ChecksumMismatch) throw Error(ErrorCode::AdaptationViolation, e.what());
    throw;
  }
  if (out.encoder_checksum() != encoder_sum || out.gamma_checksum() != gamma_sum || bank.checksum() != bank_sum ||
      out.steering.k != model.steering.k || out.steered != model.steered || out.bank_checksum != model.bank_checksum)
    throw Error(ErrorCode::AdaptationViolation, "adaptation touched more than the regression head");
  return out;
}

}  // namespace slackcast::eval
