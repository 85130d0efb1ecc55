// slackcast command-line driver. JSON results go to stdout, diagnostics to
// stderr. Exit codes: 0 ok, 1 domain error, 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include "slackcast/elaborate.hpp"
#include "slackcast/error.hpp"
#include "slackcast/eval.hpp"
#include "slackcast/hash.hpp"
#include "slackcast/sta.hpp"
#include "slackcast/stage1.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace slackcast;

namespace {

constexpr const char* kVersion = "0.1.0";

struct SettingFlags {
  std::string lib;
  std::string corner = "typ";
  double clock = 1000.0;

  eval::Setting resolve() const {
    eval::Setting s;
    if (!lib.empty()) s.library = load_library(lib);
    s.library.scale(corner);
    s.corner = corner;
    s.clock_period = clock;
    if (!(clock > 0)) throw Error(ErrorCode::BadConfig, "--clock must be positive");
    return s;
  }
};

struct ModelFlags {
  int d_h = 64, blocks = 8, hidden = 32;
  std::size_t k = 3;
  std::string gamma = "diagonal";
  std::string inject;
  double lr = 1e-3;
  int batch = 32, epochs = 500, patience = 20;

  model::Shape shape() const { return {d_h, blocks, hidden}; }

  model::SteeringConfig steering() const {
    model::SteeringConfig s;
    s.k = k;
    if (gamma == "diagonal") {
      s.mode = model::GammaMode::Diagonal;
    } else {
      s.mode = model::GammaMode::Scalar;
      try {
        std::size_t used = 0;
        s.gamma0 = std::stod(gamma, &used);
        if (used != gamma.size()) throw std::invalid_argument(gamma);
      } catch (const std::exception&) {
        throw Error(ErrorCode::BadConfig, "--gamma takes 'diagonal' or a number, got '" + gamma + "'");
      }
    }
    s.injections = {{blocks, 1.0}};
    if (!inject.empty()) {
      s.injections.clear();
      std::stringstream in(inject);
      std::string item;
      while (std::getline(in, item, ',')) {
        auto colon = item.find(':');
        try {
          model::Injection j;
          j.block = std::stoi(item.substr(0, colon));
          j.share = colon == std::string::npos ? 1.0 : std::stod(item.substr(colon + 1));
          s.injections.push_back(j);
        } catch (const std::exception&) {
          throw Error(ErrorCode::BadConfig, "--inject takes block[:share],..., got '" + inject + "'");
        }
      }
    }
    s.validate(blocks);
    return s;
  }

  model::TrainOptions train(std::uint64_t seed) const {
    model::TrainOptions o;
    o.lr = lr;
    o.batch = batch;
    o.max_epochs = epochs;
    o.patience = patience;
    o.seed = seed;
    return o;
  }
};

struct Run {
  std::string command;
  std::string dir = ".";
  json inputs = json::object();
  std::uint64_t seed = 1;
  unsigned jobs = 1;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
}

void input_file(Run& run, const std::string& key, const std::string& path) {
  if (path.empty()) return;
  if (!fs::is_regular_file(path)) throw Error(ErrorCode::IoError, "no such file: " + path);
  run.inputs[key] = {{"path", path}, {"fnv1a", retrieval::hex64(fnv1a(read_file(path)))}};
}

void input_corpus(Run& run, const std::string& dir) {
  const auto manifest = fs::path(dir) / "manifest.json";
  const auto annotations = fs::path(dir) / "annotations.jsonl";
  if (!fs::is_regular_file(manifest)) throw Error(ErrorCode::IoError, "no curated corpus at " + dir);
  Fnv1a h;
  h.add(read_file(manifest.string())).add(read_file(annotations.string()));
  run.inputs["corpus"] = {{"path", dir}, {"fnv1a", retrieval::hex64(h.value())}};
}

json checksums(const model::Model& m) {
  json j = {{"encoder", retrieval::hex64(m.encoder_checksum())},
            {"head", retrieval::hex64(m.head_checksum())},
            {"gamma", retrieval::hex64(m.gamma_checksum())},
            {"steered", m.steered}};
  if (m.steered) j["bank"] = retrieval::hex64(m.bank_checksum);
  return j;
}

std::optional<retrieval::Bank> bank_for(Run& run, const std::string& path, const model::Model& m) {
  if (path.empty()) {
    if (m.steered) throw Error(ErrorCode::BadConfig, "a steered checkpoint needs --bank");
    return std::nullopt;
  }
  input_file(run, "bank", path);
  return retrieval::load_bank(path);
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(std::stoull(item));
    } catch (const std::exception&) {
      throw Error(ErrorCode::BadConfig, "--seeds takes a comma-separated list, got '" + text + "'");
    }
  }
  return out;
}

std::array<double, 5> parse_mix(const std::string& text, const char* flag) {
  std::array<double, 5> out{};
  std::stringstream in(text);
  std::string item;
  std::size_t i = 0;
  while (std::getline(in, item, ',')) {
    if (i == out.size()) throw Error(ErrorCode::BadConfig, std::string(flag) + " takes five percentages");
    try {
      out[i++] = std::stod(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::BadConfig, std::string(flag) + " takes five percentages, got '" + text + "'");
    }
  }
  if (i != out.size()) throw Error(ErrorCode::BadConfig, std::string(flag) + " takes five percentages");
  return out;
}

void add_setting(CLI::App* app, SettingFlags& s) {
  app->add_option("--lib", s.lib, "Cell library JSON (default: built-in)");
  app->add_option("--corner", s.corner, "PVT corner");
  app->add_option("--clock", s.clock, "Clock period in ps");
}

void add_model(CLI::App* app, ModelFlags& m, bool shape) {
  if (shape) {
    app->add_option("--d-h", m.d_h, "Encoder width");
    app->add_option("--blocks", m.blocks, "Encoder blocks");
    app->add_option("--hidden", m.hidden, "Head hidden width");
  }
  app->add_option("--k", m.k, "Neighbors per query");
  app->add_option("--gamma", m.gamma, "'diagonal' or a scalar gain");
  app->add_option("--inject", m.inject, "Injection blocks, block[:share],... (default: last block)");
  app->add_option("--lr", m.lr, "Adam learning rate");
  app->add_option("--batch", m.batch, "Minibatch size");
  app->add_option("--epochs", m.epochs, "Epoch cap per phase");
  app->add_option("--patience", m.patience, "Early-stopping patience");
}

json option_values(const CLI::App* app) {
  json j = json::object();
  for (const auto* opt : app->get_options()) {
    if (opt->get_name() == "--help" || opt->get_name().empty()) continue;
    auto name = opt->get_single_name();
    if (opt->count() > 0) {
      auto r = opt->results();
      j[name] = r.size() == 1 ? json(r[0]) : json(r);
    } else if (opt->get_type_size() == 0) {
      j[name] = false;
    } else {
      j[name] = opt->get_default_str();
    }
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slackcast: timing slack prediction from RTL with retrieval steering"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Run run;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  std::string run_dir;
  app.add_option("--seed", seed, "Random seed (SLACKCAST_SEED overrides the default)");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--run-dir", run_dir, "Where run.json is written");

  SettingFlags setting;
  ModelFlags mflags;
  std::function<json()> action;
  CLI::App* active = nullptr;
  auto sub = [&](CLI::App* parent, const std::string& name, const std::string& help) {
    auto* s = parent->add_subcommand(name, help);
    s->fallthrough();
    return s;
  };

  // gen
  std::string out, corpus_dir, rtl, ckpt, bank_path, stage = "all", axis, seeds_text = "1,2,3,4,5";
  std::string tier_mix, bin_mix, split = "test";
  std::size_t count = 5000, sample = 3500, n_adapt = 200, top_paths = 5;
  int clusters = 16;
  double dedup = 0.95;
  auto* gen = sub(&app, "gen", "Generate a synthetic RTL corpus");
  gen->add_option("--out", out, "Output directory")->required();
  gen->add_option("--count", count, "Modules to generate");
  gen->add_option("--tier-mix", tier_mix, "Tier percentages, five values");
  gen->add_option("--bin-mix", bin_mix, "Gate-bin percentages, five values");
  gen->callback([&] {
    active = gen;
    run.dir = out;
    action = [&] {
      corpus::GenSpec spec;
      spec.seed = run.seed;
      spec.count = count;
      if (!tier_mix.empty()) spec.tier_mix = parse_mix(tier_mix, "--tier-mix");
      if (!bin_mix.empty()) spec.bin_mix = parse_mix(bin_mix, "--bin-mix");
      auto mods = corpus::generate(spec, run.jobs);
      corpus::write_generated(out, mods);
      json tiers = json::object();
      for (const auto& m : mods) tiers[std::string(corpus::to_string(m.tier))] = tiers.value(std::string(corpus::to_string(m.tier)), 0) + 1;
      return json{{"out", out}, {"count", mods.size()}, {"tiers", tiers}};
    };
  });

  // curate
  auto* cur = sub(&app, "curate", "Filter, dedup, annotate, sample and split a generated corpus");
  cur->add_option("--dir", corpus_dir, "Corpus directory from 'gen'")->required();
  cur->add_option("--stage", stage, "One stage or 'all'")
      ->check(CLI::IsMember({"all", "filter", "dedup", "annotate", "stratify", "cluster", "sample", "split"}));
  cur->add_option("--dedup-threshold", dedup, "Token-overlap threshold");
  cur->add_option("--clusters", clusters, "k-means clusters");
  cur->add_option("--sample", sample, "Modules kept by stratified sampling");
  add_setting(cur, setting);
  cur->callback([&] {
    active = cur;
    run.dir = corpus_dir;
    action = [&] {
      if (!setting.lib.empty()) input_file(run, "lib", setting.lib);
      auto s = setting.resolve();
      corpus::CurateOptions o;
      o.library = s.library;
      o.corner = s.corner;
      o.clock_period = s.clock_period;
      o.dedup_threshold = dedup;
      o.clusters = clusters;
      o.sample = sample;
      o.seed = run.seed;
      o.sampling.seed = run.seed;
      o.jobs = run.jobs;
      const std::map<std::string, void (*)(const std::string&, const corpus::CurateOptions&)> stages = {
          {"filter", corpus::stage_filter},     {"dedup", corpus::stage_dedup},
          {"annotate", corpus::stage_annotate}, {"stratify", corpus::stage_stratify},
          {"cluster", corpus::stage_cluster},   {"sample", corpus::stage_sample},
          {"split", corpus::stage_split}};
      if (stage == "all")
        corpus::curate(corpus_dir, o);
      else
        stages.at(stage)(corpus_dir, o);
      json j = {{"dir", corpus_dir}, {"stage", stage}};
      if (fs::exists(fs::path(corpus_dir) / "manifest.json")) {
        auto m = corpus::manifest_from_json(json::parse(read_file((fs::path(corpus_dir) / "manifest.json").string())));
        j["train"] = m.train.size();
        j["rag"] = m.rag.size();
        j["test"] = m.test.size();
      }
      return j;
    };
  });

  // label
  auto* lab = sub(&app, "label", "Exact static timing of one RTL module");
  lab->add_option("--rtl", rtl, "Verilog source")->required();
  lab->add_option("--paths", top_paths, "Worst endpoint paths to report");
  add_setting(lab, setting);
  lab->callback([&] {
    active = lab;
    action = [&] {
      input_file(run, "rtl", rtl);
      if (!setting.lib.empty()) input_file(run, "lib", setting.lib);
      auto s = setting.resolve();
      auto report = run_sta(elaborate(verilog::parse(read_file(rtl))), s.library, s.corner,
                            TimingConstraint{s.clock_period});
      auto worst = critical_paths(report, top_paths);
      report.paths = worst;
      return json{{"wns_ps", report.wns}, {"tns_ps", report.tns}, {"report", to_json(report)}};
    };
  });

  // fingerprint
  auto* fpc = sub(&app, "fingerprint", "Stage-1 approximate report and retrieval fingerprint");
  fpc->add_option("--rtl", rtl, "Verilog source")->required();
  fpc->add_option("--clock", setting.clock, "Clock period in ps");
  fpc->callback([&] {
    active = fpc;
    action = [&] {
      input_file(run, "rtl", rtl);
      const auto src = read_file(rtl);
      auto ast = verilog::parse(src);
      auto report = stage1::approx_report(ast, setting.clock);
      return json{{"report", to_json(report)},
                  {"fingerprint", to_json(stage1::fingerprint(stage1::extract_phi(ast, report)))}};
    };
  });

  // bank build
  auto* bank = sub(&app, "bank", "Retrieval bank commands");
  bank->require_subcommand(1);
  auto* build = sub(bank, "build", "Build the bank from a curated corpus's rag split");
  build->add_option("--corpus", corpus_dir, "Curated corpus directory")->required();
  build->add_option("--out", out, "Bank file (JSON lines)")->required();
  build->callback([&] {
    active = build;
    run.dir = fs::path(out).parent_path().string();
    action = [&] {
      input_corpus(run, corpus_dir);
      auto c = corpus::load_corpus(corpus_dir);
      auto b = eval::corpus_bank(c, run.jobs);
      retrieval::save_bank(b, out);
      return json{{"out", out}, {"entries", b.size()}, {"checksum", retrieval::hex64(b.checksum())}};
    };
  });

  // train
  std::string baseline_out;
  auto* train = sub(&app, "train", "Train the encoder and head, then steering when a bank is given");
  train->add_option("--corpus", corpus_dir, "Curated corpus directory")->required();
  train->add_option("--out", out, "Checkpoint path")->required();
  train->add_option("--bank", bank_path, "Bank file; omit for a no-retrieval model");
  train->add_option("--baseline-out", baseline_out, "Also save the model before steering");
  add_setting(train, setting);
  add_model(train, mflags, true);
  train->callback([&] {
    active = train;
    run.dir = fs::path(out).parent_path().string();
    action = [&] {
      input_corpus(run, corpus_dir);
      if (!setting.lib.empty()) input_file(run, "lib", setting.lib);
      auto s = setting.resolve();
      auto c = corpus::load_corpus(corpus_dir);
      eval::PipelineConfig cfg;
      cfg.shape = mflags.shape();
      cfg.steering = mflags.steering();
      cfg.train = mflags.train(run.seed);
      cfg.jobs = run.jobs;
      auto split = eval::labeled_split(c, c.manifest.train, s, run.jobs);
      auto m = eval::train_baseline(split, cfg, run.seed);
      if (!baseline_out.empty()) model::save_model(m, baseline_out);
      if (!bank_path.empty()) {
        input_file(run, "bank", bank_path);
        auto b = retrieval::load_bank(bank_path);
        retrieval::verify_disjoint(b, eval::train_split(c));
        m = eval::train_steered(m, split, b, cfg.steering, cfg.train);
      }
      model::save_model(m, out);
      return json{{"out", out}, {"train_modules", split.ids.size()}, {"checksums", checksums(m)}};
    };
  });

  // refit
  auto* refit = sub(&app, "refit", "Refit the regression head on the train split");
  refit->add_option("--ckpt", ckpt, "Checkpoint")->required();
  refit->add_option("--corpus", corpus_dir, "Curated corpus directory")->required();
  refit->add_option("--bank", bank_path, "Bank the checkpoint is bound to");
  refit->add_option("--out", out, "Refitted checkpoint path")->required();
  add_setting(refit, setting);
  add_model(refit, mflags, false);
  refit->callback([&] {
    active = refit;
    run.dir = fs::path(out).parent_path().string();
    action = [&] {
      input_file(run, "ckpt", ckpt);
      input_corpus(run, corpus_dir);
      if (!setting.lib.empty()) input_file(run, "lib", setting.lib);
      auto s = setting.resolve();
      auto m = model::load_model(ckpt);
      auto b = bank_for(run, bank_path, m);
      auto c = corpus::load_corpus(corpus_dir);
      auto split = eval::labeled_split(c, c.manifest.train, s, run.jobs);
      auto data = split.dataset();
      model::FitReport rep;
      if (m.steered) {
        auto nb = model::neighbor_table(*b, split.samples, m.steering.k);
        rep = model::refit_head(m, data, &nb, mflags.train(run.seed));
      } else {
        rep = model::refit_head(m, data, nullptr, mflags.train(run.seed));
      }
      model::save_model(m, out);
      return json{{"out", out},
                  {"loss_before", rep.initial_loss},
                  {"loss_after", rep.final_loss},
                  {"epochs", rep.epochs},
                  {"checksums", checksums(m)}};
    };
  });

  // predict
  auto* pred = sub(&app, "predict", "Predict WNS and TNS for one RTL module");
  pred->add_option("--rtl", rtl, "Verilog source")->required();
  pred->add_option("--ckpt", ckpt, "Checkpoint")->required();
  pred->add_option("--bank", bank_path, "Bank the checkpoint is bound to");
  add_setting(pred, setting);
  pred->callback([&] {
    active = pred;
    action = [&] {
      input_file(run, "rtl", rtl);
      input_file(run, "ckpt", ckpt);
      if (!setting.lib.empty()) input_file(run, "lib", setting.lib);
      auto s = setting.resolve();
      auto m = model::load_model(ckpt);
      auto b = bank_for(run, bank_path, m);
      auto p = model::predict(m, b ? &*b : nullptr, read_file(rtl), s.clock_period, s.library.scale(s.corner));
      return json{{"wns_ps", p.wns_ps}, {"tns_ps", p.tns_ps}};
    };
  });

  // eval
  auto* ev = sub(&app, "eval", "Score a checkpoint on a corpus split");
  ev->add_option("--ckpt", ckpt, "Checkpoint")->required();
  ev->add_option("--corpus", corpus_dir, "Curated corpus directory")->required();
  ev->add_option("--bank", bank_path, "Bank the checkpoint is bound to");
  ev->add_option("--split", split, "Split to score")->check(CLI::IsMember({"train", "test"}));
  ev->add_option("--out", out, "Directory for metrics.json and predictions.csv");
  add_setting(ev, setting);
  ev->callback([&] {
    active = ev;
    if (!out.empty()) run.dir = out;
    action = [&] {
      input_file(run, "ckpt", ckpt);
      input_corpus(run, corpus_dir);
      if (!setting.lib.empty()) input_file(run, "lib", setting.lib);
      auto s = setting.resolve();
      auto m = model::load_model(ckpt);
      auto b = bank_for(run, bank_path, m);
      auto c = corpus::load_corpus(corpus_dir);
      auto ls = eval::labeled_split(c, split == "train" ? c.manifest.train : c.manifest.test, s, run.jobs);
      auto r = eval::evaluate(m, b ? &*b : nullptr, ls, run.jobs);
      auto j = eval::to_json(r);
      if (!out.empty()) {
        write_file(fs::path(out) / "metrics.json", j.dump(2) + "\n");
        eval::write_predictions_csv(r, (fs::path(out) / "predictions.csv").string());
      }
      return j;
    };
  });

  // ablate
  auto* abl = sub(&app, "ablate", "Sweep one steering axis over several seeds");
  abl->add_option("--corpus", corpus_dir, "Curated corpus directory")->required();
  abl->add_option("--axis", axis, "k, gamma, injection, alpha or stage")->required();
  abl->add_option("--seeds", seeds_text, "Comma-separated seeds");
  abl->add_option("--bank", bank_path, "Bank file (default: built from the corpus)");
  abl->add_option("--out", out, "Results directory")->required();
  add_setting(abl, setting);
  add_model(abl, mflags, true);
  abl->callback([&] {
    active = abl;
    run.dir = out;
    action = [&] {
      input_corpus(run, corpus_dir);
      if (!setting.lib.empty()) input_file(run, "lib", setting.lib);
      const auto which = eval::axis_from_string(axis);
      auto seeds = parse_seeds(seeds_text);
      auto c = corpus::load_corpus(corpus_dir);
      auto ws = eval::make_workspace(c, setting.resolve(), run.jobs);
      if (!bank_path.empty()) {
        input_file(run, "bank", bank_path);
        ws.bank = retrieval::load_bank(bank_path);
        retrieval::verify_disjoint(ws.bank, eval::train_split(c));
      }
      eval::PipelineConfig cfg;
      cfg.shape = mflags.shape();
      cfg.steering = mflags.steering();
      cfg.train = mflags.train(run.seed);
      cfg.jobs = run.jobs;
      auto table = eval::run_ablation(which, ws, cfg, seeds);
      eval::write_results(out, table);
      std::cerr << eval::summary_text(table);
      return eval::to_json(table);
    };
  });

  // adapt
  auto* adapt = sub(&app, "adapt", "Head-only adaptation to another library, corner or clock");
  adapt->add_option("--ckpt", ckpt, "Checkpoint")->required();
  adapt->add_option("--corpus", corpus_dir, "Curated corpus directory")->required();
  adapt->add_option("--bank", bank_path, "Bank the checkpoint is bound to");
  adapt->add_option("--n-adapt", n_adapt, "Labeled modules used for the refit");
  adapt->add_option("--out", out, "Adapted checkpoint path")->required();
  add_setting(adapt, setting);
  add_model(adapt, mflags, false);
  adapt->callback([&] {
    active = adapt;
    run.dir = fs::path(out).parent_path().string();
    action = [&] {
      input_file(run, "ckpt", ckpt);
      input_corpus(run, corpus_dir);
      if (!setting.lib.empty()) input_file(run, "lib", setting.lib);
      auto s = setting.resolve();
      auto m = model::load_model(ckpt);
      if (bank_path.empty()) throw Error(ErrorCode::BadConfig, "adapt needs --bank");
      auto b = bank_for(run, bank_path, m);
      auto c = corpus::load_corpus(corpus_dir);
      eval::AdaptOptions o;
      o.n_adapt = n_adapt;
      o.seed = run.seed;
      o.train = mflags.train(run.seed);
      o.jobs = run.jobs;
      auto adapted = eval::adapt_head(m, *b, c, s, o);
      model::save_model(adapted, out);
      auto test = eval::labeled_split(c, c.manifest.test, s, run.jobs);
      return json{{"out", out},
                  {"n_adapt", n_adapt},
                  {"checksums", checksums(adapted)},
                  {"test", eval::to_json(eval::evaluate(adapted, &*b, test, run.jobs))}};
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  run.seed = seed;
  if (app.get_option("--seed")->count() == 0) {
    if (const char* env = std::getenv("SLACKCAST_SEED")) {
      try {
        std::size_t used = 0;
        run.seed = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument(env);
      } catch (const std::exception&) {
        std::cerr << "error: SLACKCAST_SEED must be an unsigned integer, got '" << env << "'\n";
        return 2;
      }
    }
  }
  run.jobs = jobs;
  if (!run_dir.empty()) run.dir = run_dir;
  if (run.dir.empty()) run.dir = ".";
  std::string cmd;
  for (auto* a = active; a && a != &app; a = a->get_parent()) cmd = a->get_name() + (cmd.empty() ? "" : " " + cmd);
  run.command = cmd;

  int code = 0;
  json record = {{"tool", "slackcast"},
                 {"command", run.command},
                 {"seed", run.seed},
                 {"jobs", run.jobs},
                 {"config", option_values(active)}};
  try {
    json result = action();
    std::cout << result.dump(2) << "\n";
    record["status"] = "ok";
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    record["status"] = std::string(to_string(e.code()));
    code = 1;
  } catch (const std::exception& e) {
    std::cerr << "error: IoError: " << e.what() << "\n";
    record["status"] = "IoError";
    code = 1;
  }
  record["inputs"] = run.inputs;
  record["versions"] = {{"slackcast", kVersion},
                        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                      "." + std::to_string(EIGEN_MINOR_VERSION)},
                        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                        {"cli11", CLI11_VERSION}};
  try {
    write_file(fs::path(run.dir) / "run.json", record.dump(2) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "error: IoError: " << e.what() << "\n";
    if (code == 0) code = 1;
  }
  return code;
}
