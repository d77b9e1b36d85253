#include "rinfer/harness.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    int jobs = 1;
};

void add_common_flags(CLI::App* sub, CommonOptions& opts) {
    sub->add_option("--config", opts.config_path, "experiment config file (built-in defaults when omitted)")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", opts.seed, "master seed, overrides the config");
    sub->add_option("--out", opts.out_dir, "output directory, overrides the config");
    sub->add_option("--jobs", opts.jobs, "worker threads")->check(CLI::PositiveNumber);
}

rinfer::ExperimentConfig resolve_config(const CommonOptions& opts) {
    rinfer::ExperimentConfig cfg =
        opts.config_path.empty()
            ? rinfer::parse_experiment_config(rinfer::experiment_config_template(), "<builtin>")
            : rinfer::load_experiment_config(opts.config_path);
    if (opts.seed) cfg.reseed(*opts.seed);
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    return cfg;
}

void print_stats(const std::optional<rinfer::PartitionStats>& stats) {
    if (!stats) return;
    std::printf("data: %lld accepts (bad rate %.4f), %lld rejects (bad rate %.4f), %lld unbiased (bad rate %.4f)\n",
                static_cast<long long>(stats->n_accepts), stats->accept_bad_rate,
                static_cast<long long>(stats->n_rejects), stats->reject_bad_rate,
                static_cast<long long>(stats->n_unbiased), stats->unbiased_bad_rate);
    std::printf("unbiased/accept bad-rate ratio %.3f, legacy scorecard AUC on unbiased %.4f\n",
                stats->unbiased_to_accept_ratio, stats->legacy_auc_unbiased);
}

int run_synth(const CommonOptions& opts) {
    rinfer::ExperimentConfig cfg = resolve_config(opts);
    const rinfer::PartitionStats stats = rinfer::write_synth_outputs(cfg);
    print_stats(stats);
    std::printf("wrote accepts.csv, rejects.csv, unbiased.csv, rejects_labels_oracle.csv to %s\n",
                cfg.out_dir.string().c_str());
    return 0;
}

int run_bench(const CommonOptions& opts) {
    rinfer::ExperimentConfig cfg = resolve_config(opts);
    const rinfer::Experiment1Result result = rinfer::run_experiment1(cfg, opts.jobs);
    rinfer::write_experiment1_outputs(cfg, result);
    print_stats(result.data_stats);
    std::cout << rinfer::format_summary_table(result.report);
    std::printf("wrote raw_metrics.csv, summary_table.csv, summary_table.txt, manifest.json to %s\n",
                cfg.out_dir.string().c_str());
    return 0;
}

int run_select(const CommonOptions& opts) {
    rinfer::ExperimentConfig cfg = resolve_config(opts);
    const rinfer::Experiment2Result result = rinfer::run_experiment2(cfg, opts.jobs);
    rinfer::write_experiment2_outputs(cfg, result);
    print_stats(result.data_stats);
    std::printf("%zu self-learning variants evaluated\n", result.variants.size());
    const auto corr = [&](int i, int j) {
        const rinfer::Scalar v = result.correlations(i, j);
        if (std::isnan(v)) return std::string("n/a");
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", v);
        return std::string(buf);
    };
    std::printf("spearman accepts_auc vs unbiased_auc: %s\n", corr(0, 1).c_str());
    std::printf("spearman accepts_auc vs kickout:      %s\n", corr(0, 2).c_str());
    std::printf("spearman unbiased_auc vs kickout:     %s\n", corr(1, 2).c_str());
    std::printf("selected by accepts AUC: %s\n", result.selected_by_accepts.empty()
                                                     ? "n/a"
                                                     : result.selected_by_accepts.c_str());
    std::printf("selected by kickout:     %s\n", result.selected_by_kickout.empty()
                                                     ? "n/a"
                                                     : result.selected_by_kickout.c_str());
    for (const std::string& f : result.failures) std::printf("excluded: %s\n", f.c_str());
    std::printf("wrote variants.csv, correlations.csv, selection.csv, manifest.json to %s\n",
                cfg.out_dir.string().c_str());
    return 0;
}

int run_diag(const CommonOptions& opts, bool svg) {
    rinfer::ExperimentConfig cfg = resolve_config(opts);
    const rinfer::DiagnosticsResult result = rinfer::run_diagnostics(cfg, opts.jobs);
    rinfer::write_diagnostics_outputs(cfg, result, svg);
    print_stats(result.data_stats);
    std::printf("interdecile score range: l1_logistic %.4f, gbt %.4f\n",
                result.spread.l1_interdecile, result.spread.gbt_interdecile);
    if (std::isnan(result.scatter_rank_correlation)) {
        std::printf("accepts vs unbiased AUC rank correlation: n/a\n");
    } else {
        std::printf("accepts vs unbiased AUC rank correlation: %.4f\n",
                    result.scatter_rank_correlation);
    }
    for (const std::string& f : result.failures) std::printf("excluded: %s\n", f.c_str());
    std::printf("wrote diagnostics/ and manifest.json to %s\n", cfg.out_dir.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reject inference benchmark for credit scoring"};
    app.require_subcommand(1);

    CommonOptions synth_opts, bench_opts, select_opts, diag_opts;
    bool diag_svg = false;

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic accept/reject partition");
    add_common_flags(synth, synth_opts);
    CLI::App* bench = app.add_subcommand("bench", "benchmark all configured strategies");
    add_common_flags(bench, bench_opts);
    CLI::App* select = app.add_subcommand(
        "select", "compare evaluation criteria across self-learning variants");
    add_common_flags(select, select_opts);
    CLI::App* diag = app.add_subcommand("diag", "export score-density and AUC-scatter diagnostics");
    add_common_flags(diag, diag_opts);
    diag->add_flag("--svg", diag_svg, "also render SVG plots");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return run_synth(synth_opts);
        if (bench->parsed()) return run_bench(bench_opts);
        if (select->parsed()) return run_select(select_opts);
        if (diag->parsed()) return run_diag(diag_opts, diag_svg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
