// Experiment orchestration: the strategy benchmark, the evaluation-strategy
// comparison, and the diagnostic exports, all reproducible from one seed.
#pragma once

#include "rinfer/config.hpp"
#include "rinfer/report.hpp"
#include "rinfer/synthgen.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rinfer {

struct LoadedData {
    PartitionedData partition;
    std::optional<PartitionStats> stats;  // present for synthetic data
};

/// Generates or ingests the accept/reject/unbiased partition.
LoadedData load_experiment_data(const ExperimentConfig& cfg);

struct Experiment1Result {
    EvaluationReport report;
    std::optional<PartitionStats> data_stats;
    std::size_t n_strategies = 0;
};

/// The strategy benchmark: per CV fold, each strategy augments the training
/// folds with rejects, a scorer is trained on the result and evaluated on
/// the held-out fold and on bootstrap resamples of the unbiased sample;
/// kickout is evaluated once per strategy. Failures are recorded per run
/// and excluded, never imputed.
Experiment1Result run_experiment1(const ExperimentConfig& cfg, int jobs = 1);
void write_experiment1_outputs(const ExperimentConfig& cfg, const Experiment1Result& result);

struct VariantEvaluation {
    StrategySpec spec;
    std::string id;
    Scalar accepts_auc = 0;
    Scalar unbiased_auc = 0;
    Scalar unbiased_brier = 0;
    Scalar unbiased_rp = 0;
    std::optional<Scalar> kickout;
    bool failed = false;
    std::string error;
};

struct Experiment2Result {
    std::vector<VariantEvaluation> variants;
    std::vector<std::string> criteria;  // correlation matrix axis names
    Matrix correlations;                // pairwise Spearman, unit diagonal
    std::string selected_by_accepts;    // variant id; empty when undecidable
    std::string selected_by_kickout;
    std::optional<PartitionStats> data_stats;
    std::vector<std::string> failures;
};

/// The evaluation-strategy comparison: every self-learning variant in the
/// grid is scored by accepts-side AUC (CV), unbiased-sample AUC and the
/// kickout protocol; reports rank correlations between the three rankings
/// and the unbiased performance of the models each criterion selects.
Experiment2Result run_experiment2(const ExperimentConfig& cfg, int jobs = 1);
void write_experiment2_outputs(const ExperimentConfig& cfg, const Experiment2Result& result);

struct ScoreSpread {
    Vector l1_scores;
    Vector gbt_scores;
    Scalar l1_interdecile = 0;
    Scalar gbt_interdecile = 0;
};

/// Fits the L1 labeler and the boosted scorer on the same data and scores
/// that data with both; interdecile = 90th minus 10th score percentile.
ScoreSpread score_spread(const CreditDataset& train, const GbtParams& scorer,
                         std::uint64_t seed);

struct DiagnosticsResult {
    ScoreSpread spread;
    std::vector<VariantEvaluation> variants;   // accepts vs unbiased AUC pairs
    Scalar scatter_rank_correlation = 0;
    std::optional<PartitionStats> data_stats;
    std::vector<std::string> failures;
};

/// Score-density and model-selection-scatter exports.
DiagnosticsResult run_diagnostics(const ExperimentConfig& cfg, int jobs = 1);
void write_diagnostics_outputs(const ExperimentConfig& cfg, const DiagnosticsResult& result,
                               bool svg = false);

/// Writes accepts/rejects/unbiased CSVs, the sealed reject labels and a
/// manifest with the realized statistics, which are also returned.
PartitionStats write_synth_outputs(const ExperimentConfig& cfg);

}  // namespace rinfer
