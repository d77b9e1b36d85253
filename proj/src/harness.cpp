#include "rinfer/harness.hpp"

#include "rinfer/kickout_protocol.hpp"
#include "rinfer/logistic.hpp"
#include "rinfer/rng.hpp"
#include "rinfer/strategies.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

namespace rinfer {

namespace {

constexpr Scalar kDiagnosticLambda = 0.01;
constexpr int kHistogramBins = 20;

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    const std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        workers.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) break;
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (std::thread& w : workers) w.join();
    for (const std::exception_ptr& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

Scalar quantile(std::vector<Scalar> v, Scalar q) {
    std::sort(v.begin(), v.end());
    const Scalar pos = q * static_cast<Scalar>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
    const Scalar w = pos - static_cast<Scalar>(lo);
    return (1 - w) * v[lo] + w * v[hi];
}

bool has_both_classes(const std::vector<Label>& labels) {
    bool good = false, bad = false;
    for (const Label l : labels) (l == Label::Bad ? bad : good) = true;
    return good && bad;
}

/// Per-fold evaluation shared by both experiments: augment, train, score the
/// held-out fold and the unbiased sample.
struct FoldEvaluation {
    Scalar accepts_auc = 0;
    Scalar accepts_brier = 0;
    Scalar accepts_rp = 0;
    Scalar unbiased_auc = 0;
    Scalar unbiased_brier = 0;
    Scalar unbiased_rp = 0;
    Vector unbiased_pd;  // kept for bootstrap resampling
};

FoldEvaluation evaluate_fold(const StrategySpec& spec, const ExperimentConfig& cfg,
                             const PartitionedData& partition, const FoldAssignment& folds,
                             int fold) {
    const CreditDataset train = partition.accepts.subset(folds.complement_rows(fold));
    const CreditDataset eval = partition.accepts.subset(folds.fold_rows(fold));
    // One seed per fold, shared by every strategy: paired comparisons then
    // differ only through the training data a strategy assembles.
    const std::uint64_t run_seed = derive_seed(cfg.seed, "run", static_cast<std::uint64_t>(fold));

    const AugmentedTrainingSet augmented =
        run_strategy(spec, train, partition.rejects, cfg.scorer, run_seed);
    const GbtModel scorer =
        train_scorer(augmented.dataset.features(), augmented.dataset.labels(), cfg.scorer,
                     derive_seed(run_seed, "scorer"));

    FoldEvaluation out;
    const Vector pd_eval = scorer.predict_proba(eval.features());
    out.accepts_auc = auc(eval.labels(), pd_eval);
    out.accepts_brier = brier(eval.labels(), pd_eval);
    out.accepts_rp = r_precision(eval.labels(), pd_eval, 0.3);

    out.unbiased_pd = scorer.predict_proba(partition.unbiased.features());
    out.unbiased_auc = auc(partition.unbiased.labels(), out.unbiased_pd);
    out.unbiased_brier = brier(partition.unbiased.labels(), out.unbiased_pd);
    out.unbiased_rp = r_precision(partition.unbiased.labels(), out.unbiased_pd, 0.3);
    return out;
}

std::optional<Scalar> run_kickout(const StrategySpec& spec, const ExperimentConfig& cfg,
                                  const PartitionedData& partition) {
    KickoutProtocolConfig kc = cfg.kickout;
    kc.scorer = cfg.scorer;
    kc.seed = derive_seed(cfg.seed, "kickout");  // shared splits keep K comparable
    return kickout_protocol(partition, spec, kc);
}

nlohmann::json stats_json(const PartitionStats& s) {
    nlohmann::json j;
    j["n_accepts"] = s.n_accepts;
    j["n_rejects"] = s.n_rejects;
    j["n_unbiased"] = s.n_unbiased;
    j["accept_bad_rate"] = s.accept_bad_rate;
    j["reject_bad_rate"] = s.reject_bad_rate;
    j["unbiased_bad_rate"] = s.unbiased_bad_rate;
    j["unbiased_to_accept_ratio"] = s.unbiased_to_accept_ratio;
    j["legacy_auc_unbiased"] = s.legacy_auc_unbiased;
    return j;
}

nlohmann::json config_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["seed"] = cfg.seed;
    j["k_folds"] = cfg.k_folds;
    j["n_bootstraps"] = cfg.n_bootstraps;
    j["out_dir"] = cfg.out_dir.string();
    j["kickout"] = {{"mu", cfg.kickout.mu},
                    {"accept_split", cfg.kickout.accept_split},
                    {"reject_split", cfg.kickout.reject_split}};
    j["scorer"] = {{"max_trees", cfg.scorer.max_trees},
                   {"early_stopping_rounds", cfg.scorer.early_stopping_rounds},
                   {"learning_rate", cfg.scorer.learning_rate},
                   {"max_depth", cfg.scorer.max_depth},
                   {"min_child_weight", cfg.scorer.min_child_weight},
                   {"subsample", cfg.scorer.subsample},
                   {"reg_lambda", cfg.scorer.reg_lambda}};
    if (cfg.data.kind == DataSourceConfig::Kind::Synthetic) {
        const GeneratorConfig& g = cfg.data.synthetic;
        j["data"] = {{"kind", "synthetic"},
                     {"n_population", g.n_population},
                     {"n_features", g.n_features},
                     {"n_informative", g.n_informative},
                     {"noise_scale", g.noise_scale},
                     {"legacy_feature_subset", g.legacy_feature_subset},
                     {"acceptance_rate", g.acceptance_rate},
                     {"unbiased_fraction", g.unbiased_fraction},
                     {"target_accept_bad_rate", g.target_accept_bad_rate},
                     {"seed", g.seed}};
    } else {
        j["data"] = {{"kind", "csv"},
                     {"accepts_csv", cfg.data.accepts_csv.string()},
                     {"rejects_csv", cfg.data.rejects_csv.string()},
                     {"unbiased_csv", cfg.data.unbiased_csv.string()},
                     {"label_column", cfg.data.label_column},
                     {"id_column", cfg.data.id_column}};
    }
    nlohmann::json grid = nlohmann::json::array();
    for (const StrategySpec& s : cfg.strategies) grid.push_back(s.id());
    j["strategies"] = std::move(grid);
    return j;
}

void write_manifest(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path.string() + ": cannot open file for writing");
    out << j.dump(2) << '\n';
}

}  // namespace

LoadedData load_experiment_data(const ExperimentConfig& cfg) {
    LoadedData data;
    if (cfg.data.kind == DataSourceConfig::Kind::Synthetic) {
        SimulationResult sim = generate_partitioned(cfg.data.synthetic);
        data.partition = std::move(sim.partition);
        data.stats = sim.stats;
        return data;
    }
    CsvOptions labeled;
    labeled.label_column = cfg.data.label_column;
    labeled.id_column = cfg.data.id_column;
    CsvOptions unlabeled;
    unlabeled.id_column = cfg.data.id_column;
    data.partition.accepts = load_csv(cfg.data.accepts_csv, labeled);
    data.partition.rejects = load_csv(cfg.data.rejects_csv, unlabeled);
    data.partition.unbiased = load_csv(cfg.data.unbiased_csv, labeled);
    data.partition.validate();
    return data;
}

Experiment1Result run_experiment1(const ExperimentConfig& cfg, int jobs) {
    cfg.validate();
    if (cfg.strategies.empty()) {
        throw std::invalid_argument("the experiment needs a non-empty strategy grid");
    }
    const LoadedData data = load_experiment_data(cfg);
    const PartitionedData& partition = data.partition;
    const FoldAssignment folds =
        stratified_kfold(partition.accepts, cfg.k_folds, derive_seed(cfg.seed, "folds"));

    // Bootstrap resamples of the unbiased sample, shared across strategies so
    // comparisons are paired.
    const Index n_unb = partition.unbiased.rows();
    std::vector<std::vector<Index>> boot_rows(static_cast<std::size_t>(cfg.n_bootstraps));
    std::vector<std::vector<Label>> boot_labels(boot_rows.size());
    std::vector<bool> boot_has_both(boot_rows.size());
    for (std::size_t b = 0; b < boot_rows.size(); ++b) {
        Rng rng(derive_seed(cfg.seed, "bootstrap", b));
        auto& rows = boot_rows[b];
        auto& labels = boot_labels[b];
        rows.resize(static_cast<std::size_t>(n_unb));
        labels.resize(static_cast<std::size_t>(n_unb));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            rows[i] = static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(n_unb)));
            labels[i] = partition.unbiased.labels()[static_cast<std::size_t>(rows[i])];
        }
        boot_has_both[b] = has_both_classes(labels);
    }

    struct TaskResult {
        std::vector<MetricRow> rows;
        std::vector<std::string> failures;
    };
    const std::size_t n_strategies = cfg.strategies.size();
    const std::size_t n_fold_tasks = n_strategies * static_cast<std::size_t>(cfg.k_folds);
    std::vector<TaskResult> results(n_fold_tasks + n_strategies);

    parallel_for(results.size(), jobs, [&](std::size_t t) {
        TaskResult& slot = results[t];
        if (t < n_fold_tasks) {
            const StrategySpec& spec = cfg.strategies[t / static_cast<std::size_t>(cfg.k_folds)];
            const int fold = static_cast<int>(t % static_cast<std::size_t>(cfg.k_folds));
            try {
                const FoldEvaluation ev = evaluate_fold(spec, cfg, partition, folds, fold);
                const auto push = [&](const char* metric, int bootstrap, Scalar value) {
                    slot.rows.push_back({spec.id(), fold, bootstrap, metric, value});
                };
                push("accepts_auc", -1, ev.accepts_auc);
                push("accepts_brier", -1, ev.accepts_brier);
                push("accepts_rp", -1, ev.accepts_rp);
                for (int b = 0; b < cfg.n_bootstraps; ++b) {
                    const auto& rows = boot_rows[static_cast<std::size_t>(b)];
                    const auto& labels = boot_labels[static_cast<std::size_t>(b)];
                    Vector pd(static_cast<Index>(rows.size()));
                    for (std::size_t i = 0; i < rows.size(); ++i) {
                        pd[static_cast<Index>(i)] = ev.unbiased_pd[rows[i]];
                    }
                    if (boot_has_both[static_cast<std::size_t>(b)]) {
                        push("unbiased_auc", b, auc(labels, pd));
                    }
                    push("unbiased_brier", b, brier(labels, pd));
                    push("unbiased_rp", b, r_precision(labels, pd, 0.3));
                }
            } catch (const std::exception& e) {
                slot.failures.push_back(spec.id() + ": fold " + std::to_string(fold) + ": " +
                                        e.what());
            }
        } else {
            const StrategySpec& spec = cfg.strategies[t - n_fold_tasks];
            try {
                const std::optional<Scalar> value = run_kickout(spec, cfg, partition);
                slot.rows.push_back({spec.id(), -1, -1, "kickout", value});
            } catch (const std::exception& e) {
                slot.failures.push_back(spec.id() + ": kickout: " + e.what());
            }
        }
    });

    Experiment1Result out;
    out.n_strategies = n_strategies;
    out.data_stats = data.stats;
    for (TaskResult& slot : results) {
        out.report.raw.insert(out.report.raw.end(), slot.rows.begin(), slot.rows.end());
        out.report.failures.insert(out.report.failures.end(), slot.failures.begin(),
                                   slot.failures.end());
    }
    sort_rows(out.report.raw);
    out.report.aggregates = aggregate_metrics(out.report.raw);
    out.report.tests = rank_tests(out.report.raw);
    return out;
}

void write_experiment1_outputs(const ExperimentConfig& cfg, const Experiment1Result& result) {
    std::filesystem::create_directories(cfg.out_dir);
    write_raw_metrics_csv(cfg.out_dir / "raw_metrics.csv", result.report.raw);
    write_summary_csv(cfg.out_dir / "summary_table.csv", result.report.aggregates);
    write_text_file(cfg.out_dir / "summary_table.txt", format_summary_table(result.report));

    nlohmann::json manifest;
    manifest["command"] = "bench";
    manifest["config"] = config_json(cfg);
    manifest["n_strategies"] = result.n_strategies;
    if (result.data_stats) manifest["realized_data"] = stats_json(*result.data_stats);
    manifest["failures"] = result.report.failures;
    nlohmann::json tests = nlohmann::json::array();
    for (const MetricTest& t : result.report.tests) {
        nlohmann::json tj;
        tj["metric"] = t.metric;
        tj["friedman_chi2"] = t.friedman.statistic;
        tj["p_value"] = t.friedman.p_value;
        if (std::isnan(t.nemenyi_cd)) {
            tj["nemenyi_cd"] = nullptr;
        } else {
            tj["nemenyi_cd"] = t.nemenyi_cd;
        }
        tests.push_back(std::move(tj));
    }
    manifest["tests"] = std::move(tests);
    write_manifest(cfg.out_dir / "manifest.json", manifest);
}

namespace {

/// CV evaluation of a set of strategy variants (optionally plus kickout),
/// used by the selection experiment and the diagnostics export.
std::pair<std::vector<VariantEvaluation>, std::vector<std::string>> evaluate_grid(
    const ExperimentConfig& cfg, const std::vector<StrategySpec>& specs,
    const PartitionedData& partition, const FoldAssignment& folds, bool with_kickout,
    int jobs) {
    struct FoldSlot {
        bool ok = false;
        std::string error;
        FoldEvaluation ev;
    };
    const std::size_t n_variants = specs.size();
    const std::size_t n_folds = static_cast<std::size_t>(cfg.k_folds);
    std::vector<FoldSlot> fold_slots(n_variants * n_folds);
    struct KickSlot {
        std::optional<Scalar> value;
        std::string error;
    };
    std::vector<KickSlot> kick_slots(with_kickout ? n_variants : 0);

    const std::size_t n_tasks = n_variants * n_folds + kick_slots.size();
    parallel_for(n_tasks, jobs, [&](std::size_t t) {
        if (t < n_variants * n_folds) {
            const std::size_t v = t / n_folds;
            const int fold = static_cast<int>(t % n_folds);
            FoldSlot& slot = fold_slots[t];
            try {
                slot.ev = evaluate_fold(specs[v], cfg, partition, folds, fold);
                slot.ev.unbiased_pd.resize(0);  // not needed, free the memory
                slot.ok = true;
            } catch (const std::exception& e) {
                slot.error = specs[v].id() + ": fold " + std::to_string(fold) + ": " + e.what();
            }
        } else {
            const std::size_t v = t - n_variants * n_folds;
            KickSlot& slot = kick_slots[v];
            try {
                slot.value = run_kickout(specs[v], cfg, partition);
            } catch (const std::exception& e) {
                slot.error = specs[v].id() + ": kickout: " + e.what();
            }
        }
    });

    std::vector<VariantEvaluation> variants(n_variants);
    std::vector<std::string> failures;
    for (std::size_t v = 0; v < n_variants; ++v) {
        VariantEvaluation& var = variants[v];
        var.spec = specs[v];
        var.id = specs[v].id();
        Scalar a_auc = 0, u_auc = 0, u_brier = 0, u_rp = 0;
        int n_ok = 0;
        for (std::size_t f = 0; f < n_folds; ++f) {
            const FoldSlot& slot = fold_slots[v * n_folds + f];
            if (!slot.ok) {
                failures.push_back(slot.error);
                if (var.error.empty()) var.error = slot.error;
                continue;
            }
            a_auc += slot.ev.accepts_auc;
            u_auc += slot.ev.unbiased_auc;
            u_brier += slot.ev.unbiased_brier;
            u_rp += slot.ev.unbiased_rp;
            ++n_ok;
        }
        if (n_ok == 0) {
            var.failed = true;
        } else {
            var.accepts_auc = a_auc / n_ok;
            var.unbiased_auc = u_auc / n_ok;
            var.unbiased_brier = u_brier / n_ok;
            var.unbiased_rp = u_rp / n_ok;
        }
        if (with_kickout) {
            var.kickout = kick_slots[v].value;
            if (!kick_slots[v].error.empty()) failures.push_back(kick_slots[v].error);
        }
    }
    return {std::move(variants), std::move(failures)};
}

}  // namespace

Experiment2Result run_experiment2(const ExperimentConfig& cfg, int jobs) {
    cfg.validate();
    std::vector<StrategySpec> variants;
    for (const StrategySpec& spec : cfg.strategies) {
        if (spec.kind == StrategyKind::RegularSelfLearning ||
            spec.kind == StrategyKind::ShallowSelfLearning) {
            variants.push_back(spec);
        }
    }
    if (variants.size() < 2) {
        throw std::invalid_argument(
            "the selection experiment needs at least two self-learning variants in the grid");
    }

    const LoadedData data = load_experiment_data(cfg);
    const FoldAssignment folds =
        stratified_kfold(data.partition.accepts, cfg.k_folds, derive_seed(cfg.seed, "folds"));

    Experiment2Result out;
    auto [evaluated, failures] =
        evaluate_grid(cfg, variants, data.partition, folds, /*with_kickout=*/true, jobs);
    out.variants = std::move(evaluated);
    out.failures = std::move(failures);
    out.data_stats = data.stats;
    out.criteria = {"accepts_auc", "unbiased_auc", "kickout"};

    const auto pairwise = [&](auto get_a, auto get_b) {
        std::vector<Scalar> a, b;
        for (const VariantEvaluation& v : out.variants) {
            if (v.failed) continue;
            const std::optional<Scalar> va = get_a(v);
            const std::optional<Scalar> vb = get_b(v);
            if (!va || !vb) continue;
            a.push_back(*va);
            b.push_back(*vb);
        }
        if (a.size() < 2) return std::numeric_limits<Scalar>::quiet_NaN();
        Vector va(static_cast<Index>(a.size())), vb(static_cast<Index>(b.size()));
        for (std::size_t i = 0; i < a.size(); ++i) {
            va[static_cast<Index>(i)] = a[i];
            vb[static_cast<Index>(i)] = b[i];
        }
        return spearman(va, vb);
    };
    const auto accepts_of = [](const VariantEvaluation& v) {
        return std::optional<Scalar>(v.accepts_auc);
    };
    const auto unbiased_of = [](const VariantEvaluation& v) {
        return std::optional<Scalar>(v.unbiased_auc);
    };
    const auto kickout_of = [](const VariantEvaluation& v) { return v.kickout; };

    out.correlations = Matrix::Identity(3, 3);
    out.correlations(0, 1) = out.correlations(1, 0) = pairwise(accepts_of, unbiased_of);
    out.correlations(0, 2) = out.correlations(2, 0) = pairwise(accepts_of, kickout_of);
    out.correlations(1, 2) = out.correlations(2, 1) = pairwise(unbiased_of, kickout_of);

    const VariantEvaluation* by_accepts = nullptr;
    const VariantEvaluation* by_kickout = nullptr;
    for (const VariantEvaluation& v : out.variants) {
        if (v.failed) continue;
        if (!by_accepts || v.accepts_auc > by_accepts->accepts_auc) by_accepts = &v;
        if (v.kickout && (!by_kickout || *v.kickout > *by_kickout->kickout)) by_kickout = &v;
    }
    if (by_accepts) out.selected_by_accepts = by_accepts->id;
    if (by_kickout) out.selected_by_kickout = by_kickout->id;
    return out;
}

namespace {

void write_variants_csv(const std::filesystem::path& path,
                        const std::vector<VariantEvaluation>& variants, bool with_kickout) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path.string() + ": cannot open file for writing");
    out << "variant,accepts_auc,unbiased_auc,unbiased_brier,unbiased_rp";
    if (with_kickout) out << ",kickout";
    out << '\n';
    for (const VariantEvaluation& v : variants) {
        out << v.id << ',';
        if (v.failed) {
            out << "NA,NA,NA,NA";
        } else {
            out << format_scalar(v.accepts_auc) << ',' << format_scalar(v.unbiased_auc) << ','
                << format_scalar(v.unbiased_brier) << ',' << format_scalar(v.unbiased_rp);
        }
        if (with_kickout) {
            out << ',' << (v.kickout ? format_scalar(*v.kickout) : "NA");
        }
        out << '\n';
    }
}

}  // namespace

void write_experiment2_outputs(const ExperimentConfig& cfg, const Experiment2Result& result) {
    std::filesystem::create_directories(cfg.out_dir);
    write_variants_csv(cfg.out_dir / "variants.csv", result.variants, true);

    {
        std::ofstream out(cfg.out_dir / "correlations.csv");
        if (!out) throw std::runtime_error("correlations.csv: cannot open file for writing");
        out << "criterion";
        for (const std::string& name : result.criteria) out << ',' << name;
        out << '\n';
        for (std::size_t i = 0; i < result.criteria.size(); ++i) {
            out << result.criteria[i];
            for (std::size_t j = 0; j < result.criteria.size(); ++j) {
                const Scalar v = result.correlations(static_cast<Index>(i),
                                                     static_cast<Index>(j));
                out << ',' << (std::isnan(v) ? "NA" : format_scalar(v));
            }
            out << '\n';
        }
    }
    {
        std::ofstream out(cfg.out_dir / "selection.csv");
        if (!out) throw std::runtime_error("selection.csv: cannot open file for writing");
        out << "criterion,variant,unbiased_auc,unbiased_brier,unbiased_rp\n";
        const auto row = [&](const char* criterion, const std::string& id) {
            out << criterion << ',';
            for (const VariantEvaluation& v : result.variants) {
                if (v.id == id && !v.failed) {
                    out << v.id << ',' << format_scalar(v.unbiased_auc) << ','
                        << format_scalar(v.unbiased_brier) << ','
                        << format_scalar(v.unbiased_rp) << '\n';
                    return;
                }
            }
            out << "NA,NA,NA,NA\n";
        };
        row("accepts_auc", result.selected_by_accepts);
        row("kickout", result.selected_by_kickout);
    }

    nlohmann::json manifest;
    manifest["command"] = "select";
    manifest["config"] = config_json(cfg);
    manifest["n_variants"] = result.variants.size();
    if (result.data_stats) manifest["realized_data"] = stats_json(*result.data_stats);
    manifest["failures"] = result.failures;
    nlohmann::json corr;
    for (std::size_t i = 0; i < result.criteria.size(); ++i) {
        for (std::size_t j = i + 1; j < result.criteria.size(); ++j) {
            const Scalar v =
                result.correlations(static_cast<Index>(i), static_cast<Index>(j));
            const std::string key = result.criteria[i] + " vs " + result.criteria[j];
            if (std::isnan(v)) {
                corr[key] = nullptr;
            } else {
                corr[key] = v;
            }
        }
    }
    manifest["spearman"] = std::move(corr);
    manifest["selected_by_accepts"] = result.selected_by_accepts;
    manifest["selected_by_kickout"] = result.selected_by_kickout;
    write_manifest(cfg.out_dir / "manifest.json", manifest);
}

ScoreSpread score_spread(const CreditDataset& train, const GbtParams& scorer,
                         std::uint64_t seed) {
    ScoreSpread out;
    const L1LogisticModel labeler =
        fit_l1_logistic(train.features(), train.labels(), kDiagnosticLambda);
    const GbtModel booster =
        train_scorer(train.features(), train.labels(), scorer, derive_seed(seed, "scorer"));
    out.l1_scores = labeler.predict_proba(train.features());
    out.gbt_scores = booster.predict_proba(train.features());
    const auto spread = [](const Vector& scores) {
        std::vector<Scalar> v(scores.data(), scores.data() + scores.size());
        return quantile(v, 0.9) - quantile(v, 0.1);
    };
    out.l1_interdecile = spread(out.l1_scores);
    out.gbt_interdecile = spread(out.gbt_scores);
    return out;
}

DiagnosticsResult run_diagnostics(const ExperimentConfig& cfg, int jobs) {
    cfg.validate();
    if (cfg.strategies.empty()) {
        throw std::invalid_argument("diagnostics need a non-empty strategy grid");
    }
    const LoadedData data = load_experiment_data(cfg);
    const FoldAssignment folds =
        stratified_kfold(data.partition.accepts, cfg.k_folds, derive_seed(cfg.seed, "folds"));

    DiagnosticsResult out;
    out.data_stats = data.stats;
    out.spread =
        score_spread(data.partition.accepts, cfg.scorer, derive_seed(cfg.seed, "spread"));

    auto [variants, failures] = evaluate_grid(cfg, cfg.strategies, data.partition, folds,
                                              /*with_kickout=*/false, jobs);
    out.variants = std::move(variants);
    out.failures = std::move(failures);

    std::vector<Scalar> a, u;
    for (const VariantEvaluation& v : out.variants) {
        if (v.failed) continue;
        a.push_back(v.accepts_auc);
        u.push_back(v.unbiased_auc);
    }
    if (a.size() >= 2) {
        Vector va(static_cast<Index>(a.size())), vu(static_cast<Index>(u.size()));
        for (std::size_t i = 0; i < a.size(); ++i) {
            va[static_cast<Index>(i)] = a[i];
            vu[static_cast<Index>(i)] = u[i];
        }
        out.scatter_rank_correlation = spearman(va, vu);
    } else {
        out.scatter_rank_correlation = std::numeric_limits<Scalar>::quiet_NaN();
    }
    return out;
}

namespace {

std::vector<int> histogram_counts(const Vector& scores) {
    std::vector<int> counts(kHistogramBins, 0);
    for (Index i = 0; i < scores.size(); ++i) {
        int bin = static_cast<int>(std::floor(scores[i] * kHistogramBins));
        bin = std::clamp(bin, 0, kHistogramBins - 1);
        ++counts[static_cast<std::size_t>(bin)];
    }
    return counts;
}

std::string density_svg(const std::vector<int>& l1, const std::vector<int>& gbt) {
    const int width = 640, height = 360, margin = 40;
    int peak = 1;
    for (const int c : l1) peak = std::max(peak, c);
    for (const int c : gbt) peak = std::max(peak, c);
    const Scalar bar = static_cast<Scalar>(width - 2 * margin) / kHistogramBins;
    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "'>\n";
    const auto bars = [&](const std::vector<int>& counts, const char* color) {
        for (int b = 0; b < kHistogramBins; ++b) {
            const Scalar h = static_cast<Scalar>(counts[static_cast<std::size_t>(b)]) /
                             static_cast<Scalar>(peak) * (height - 2 * margin);
            svg << "<rect x='" << margin + b * bar << "' y='" << height - margin - h
                << "' width='" << bar << "' height='" << h << "' fill='" << color
                << "' fill-opacity='0.45'/>\n";
        }
    };
    bars(gbt, "#3465a4");
    bars(l1, "#cc0000");
    svg << "<line x1='" << margin << "' y1='" << height - margin << "' x2='" << width - margin
        << "' y2='" << height - margin << "' stroke='black'/>\n";
    svg << "<text x='" << margin << "' y='" << margin - 14
        << "' font-size='13'>score density: labeler (red) vs scorer (blue)</text>\n";
    svg << "<text x='" << margin << "' y='" << height - margin + 16
        << "' font-size='11'>0</text>\n";
    svg << "<text x='" << width - margin - 8 << "' y='" << height - margin + 16
        << "' font-size='11'>1</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

std::string scatter_svg(const std::vector<VariantEvaluation>& variants) {
    const int width = 480, height = 480, margin = 48;
    Scalar lo_a = 1, hi_a = 0, lo_u = 1, hi_u = 0;
    for (const VariantEvaluation& v : variants) {
        if (v.failed) continue;
        lo_a = std::min(lo_a, v.accepts_auc);
        hi_a = std::max(hi_a, v.accepts_auc);
        lo_u = std::min(lo_u, v.unbiased_auc);
        hi_u = std::max(hi_u, v.unbiased_auc);
    }
    const Scalar pad_a = std::max<Scalar>(0.005, (hi_a - lo_a) * 0.1);
    const Scalar pad_u = std::max<Scalar>(0.005, (hi_u - lo_u) * 0.1);
    lo_a -= pad_a;
    hi_a += pad_a;
    lo_u -= pad_u;
    hi_u += pad_u;
    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "'>\n";
    svg << "<line x1='" << margin << "' y1='" << height - margin << "' x2='" << width - margin
        << "' y2='" << height - margin << "' stroke='black'/>\n";
    svg << "<line x1='" << margin << "' y1='" << margin << "' x2='" << margin << "' y2='"
        << height - margin << "' stroke='black'/>\n";
    for (const VariantEvaluation& v : variants) {
        if (v.failed) continue;
        const Scalar x = margin + (v.accepts_auc - lo_a) / (hi_a - lo_a) * (width - 2 * margin);
        const Scalar y =
            height - margin - (v.unbiased_auc - lo_u) / (hi_u - lo_u) * (height - 2 * margin);
        svg << "<circle cx='" << x << "' cy='" << y << "' r='4' fill='#3465a4'"
            << " fill-opacity='0.7'/>\n";
    }
    svg << "<text x='" << width / 2 - 40 << "' y='" << height - 12
        << "' font-size='12'>AUC on accepts</text>\n";
    svg << "<text x='14' y='" << height / 2
        << "' font-size='12' transform='rotate(-90 14 " << height / 2
        << ")'>AUC on unbiased sample</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace

void write_diagnostics_outputs(const ExperimentConfig& cfg, const DiagnosticsResult& result,
                               bool svg) {
    const std::filesystem::path dir = cfg.out_dir / "diagnostics";
    std::filesystem::create_directories(dir);

    const std::vector<int> l1_hist = histogram_counts(result.spread.l1_scores);
    const std::vector<int> gbt_hist = histogram_counts(result.spread.gbt_scores);
    {
        std::ofstream out(dir / "score_density.csv");
        if (!out) throw std::runtime_error("score_density.csv: cannot open file for writing");
        out << "model,bin_lo,bin_hi,count\n";
        const auto rows = [&](const char* model, const std::vector<int>& counts) {
            for (int b = 0; b < kHistogramBins; ++b) {
                out << model << ',' << format_scalar(static_cast<Scalar>(b) / kHistogramBins)
                    << ',' << format_scalar(static_cast<Scalar>(b + 1) / kHistogramBins) << ','
                    << counts[static_cast<std::size_t>(b)] << '\n';
            }
        };
        rows("l1_logistic", l1_hist);
        rows("gbt", gbt_hist);
    }
    write_variants_csv(dir / "auc_scatter.csv", result.variants, false);
    if (svg) {
        write_text_file(dir / "score_density.svg", density_svg(l1_hist, gbt_hist));
        write_text_file(dir / "auc_scatter.svg", scatter_svg(result.variants));
    }

    nlohmann::json manifest;
    manifest["command"] = "diag";
    manifest["config"] = config_json(cfg);
    manifest["l1_interdecile"] = result.spread.l1_interdecile;
    manifest["gbt_interdecile"] = result.spread.gbt_interdecile;
    if (std::isnan(result.scatter_rank_correlation)) {
        manifest["scatter_rank_correlation"] = nullptr;
    } else {
        manifest["scatter_rank_correlation"] = result.scatter_rank_correlation;
    }
    if (result.data_stats) manifest["realized_data"] = stats_json(*result.data_stats);
    manifest["failures"] = result.failures;
    write_manifest(cfg.out_dir / "manifest.json", manifest);
}

PartitionStats write_synth_outputs(const ExperimentConfig& cfg) {
    if (cfg.data.kind != DataSourceConfig::Kind::Synthetic) {
        throw std::invalid_argument("synth requires a synthetic data source");
    }
    const SimulationResult sim = generate_partitioned(cfg.data.synthetic);
    std::filesystem::create_directories(cfg.out_dir);
    save_csv(cfg.out_dir / "accepts.csv", sim.partition.accepts);
    save_csv(cfg.out_dir / "rejects.csv", sim.partition.rejects);
    save_csv(cfg.out_dir / "unbiased.csv", sim.partition.unbiased);
    {
        std::ofstream out(cfg.out_dir / "rejects_labels_oracle.csv");
        if (!out) {
            throw std::runtime_error("rejects_labels_oracle.csv: cannot open file for writing");
        }
        out << "id,label\n";
        const auto& ids = OracleAccess::ids(sim.partition.reject_labels);
        const auto& labels = OracleAccess::labels(sim.partition.reject_labels);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            out << ids[i] << ',' << (labels[i] == Label::Bad ? 1 : 0) << '\n';
        }
    }
    nlohmann::json manifest;
    manifest["command"] = "synth";
    manifest["config"] = config_json(cfg);
    manifest["realized_data"] = stats_json(sim.stats);
    manifest["files"] = {"accepts.csv", "rejects.csv", "unbiased.csv",
                         "rejects_labels_oracle.csv"};
    write_manifest(cfg.out_dir / "manifest.json", manifest);
    return sim.stats;
}

}  // namespace rinfer
