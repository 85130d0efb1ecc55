#pragma once

// Metrics, evaluation runs, ablation grids and head-only adaptation.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "slackcast/bank.hpp"
#include "slackcast/corpus.hpp"
#include "slackcast/liberty.hpp"
#include "slackcast/predict.hpp"
#include "slackcast/training.hpp"

namespace slackcast::eval {

/// Sample Pearson correlation. Throws DimensionMismatch, BadConfig for
/// n < 2, DegenerateVariance when either side is constant.
double pearson_r(std::span<const double> y, std::span<const double> yhat);

struct Mape {
  double percent = 0.0;
  std::size_t n_used = 0;
  std::size_t n_excluded = 0;  // |y| < epsilon
};

/// 100/N * sum |y - yhat| / |y| over samples with |y| >= epsilon (ps).
/// Throws AllExcluded when nothing is left.
Mape mape(std::span<const double> y, std::span<const double> yhat, double epsilon = 1.0);

// ---------------------------------------------------------------- results

struct PredictionRow {
  std::string id;
  double y_wns = 0.0;
  double yhat_wns = 0.0;
  double y_tns = 0.0;
  double yhat_tns = 0.0;
  std::string error;  // non-empty when prediction failed
};

struct TargetScore {
  std::optional<double> r;
  std::optional<double> mape;
  std::size_t n_used = 0;      // entered the MAPE mean
  std::size_t n_excluded = 0;  // failed predictions plus |y| < epsilon
  std::string error;           // metric error code, e.g. DegenerateVariance
};

struct EvalResult {
  TargetScore wns, tns;
  std::size_t n_failed = 0;
  std::vector<PredictionRow> rows;
};

/// Metrics for both targets; failed rows are excluded and counted.
EvalResult score(std::vector<PredictionRow> rows, double epsilon = 1.0);

nlohmann::json to_json(const EvalResult& result);
void write_predictions_csv(const EvalResult& result, const std::string& path);

// ------------------------------------------------------------- workspace

/// Timing setting labels are produced under.
struct Setting {
  CellLibrary library = CellLibrary::default_library();
  std::string corner = "typ";
  double clock_period = 1000.0;
};

/// Modules of one split with fingerprints, encoder settings and oracle labels.
struct LabeledSplit {
  std::vector<std::string> ids;
  std::vector<std::string> sources;
  std::vector<model::Sample> samples;
  std::vector<double> wns, tns;

  model::Dataset dataset() const;
};

/// Fingerprints are computed at the query clock; labels reuse the corpus
/// annotations when the setting matches the manifest and are relabeled by
/// the oracle otherwise.
LabeledSplit labeled_split(const corpus::Corpus& corpus, const std::vector<std::string>& ids, const Setting& setting,
                           unsigned jobs = 1);

/// Bank over the rag split, fingerprinted at the manifest clock and
/// checked disjoint from the train split.
retrieval::Bank corpus_bank(const corpus::Corpus& corpus, unsigned jobs = 1);
retrieval::TrainSplit train_split(const corpus::Corpus& corpus);

struct Workspace {
  Setting setting;
  LabeledSplit train, test;
  retrieval::Bank bank;
};

Workspace make_workspace(const corpus::Corpus& corpus, const Setting& setting, unsigned jobs = 1);

// --------------------------------------------------------------- training

struct PipelineConfig {
  model::Shape shape;
  model::SteeringConfig steering;
  model::TrainOptions train;
  unsigned jobs = 1;
};

/// Encoder and head on the train split, no retrieval.
model::Model train_baseline(const LabeledSplit& train, const PipelineConfig& config, std::uint64_t seed);

/// Steering on a copy of `baseline`: fit_gamma then refit_head against the
/// bank, which the returned model is bound to.
model::Model train_steered(const model::Model& baseline, const LabeledSplit& train, const retrieval::Bank& bank,
                           const model::SteeringConfig& steering, const model::TrainOptions& options);

/// Predicts every module; per-module failures are recorded, not thrown.
EvalResult evaluate(const model::Model& model, const retrieval::Bank* bank, const LabeledSplit& test,
                    unsigned jobs = 1);

// --------------------------------------------------------------- ablation

enum class Axis { K, Gamma, Injection, Alpha, Stage };
std::string_view to_string(Axis axis);
Axis axis_from_string(std::string_view name);  // BadConfig

struct AblationGrid {
  std::vector<std::size_t> k{1, 2, 3, 5};
  std::vector<double> gamma{0.02, 0.05, 0.10, 0.20, 0.30, 0.40};  // plus a diagonal row
  std::vector<int> injection{2, 4, 6, 7, 8};
  std::vector<double> alpha{1.0, 0.75, 0.5};  // share at the last block, rest one block earlier
};

struct AblationRow {
  std::string label;
  std::vector<std::optional<EvalResult>> per_seed;  // empty when the cell failed
  std::vector<std::string> errors;                  // parallel to per_seed
};

struct AblationTable {
  Axis axis = Axis::K;
  std::vector<std::uint64_t> seeds;
  std::vector<AblationRow> rows;
};

/// One row per grid value, one trained model per row and seed. Failed
/// cells are recorded and the run continues.
AblationTable run_ablation(Axis axis, const Workspace& ws, const PipelineConfig& config,
                           const std::vector<std::uint64_t>& seeds, const AblationGrid& grid = {});

nlohmann::json to_json(const AblationTable& table);

/// table.json, table.csv, summary.txt and predictions/<row>_seed<s>.csv.
void write_results(const std::string& dir, const AblationTable& table);
std::string summary_text(const AblationTable& table);

// ------------------------------------------------------------- adaptation

/// Label-free stratified pick from the train split over gate-count and
/// depth quartiles. Deterministic per seed.
std::vector<std::string> adaptation_ids(const corpus::Corpus& corpus, std::size_t n, std::uint64_t seed);

struct AdaptOptions {
  std::size_t n_adapt = 200;
  std::uint64_t seed = 1;
  model::TrainOptions train;
  unsigned jobs = 1;
};

/// Relabels the adaptation modules under `target` and refits the head
/// only. Encoder, gamma and bank are verified before and after; any
/// difference raises AdaptationViolation.
model::Model adapt_head(const model::Model& model, const retrieval::Bank& bank, const corpus::Corpus& corpus,
                        const Setting& target, const AdaptOptions& options);

}  // namespace slackcast::eval
