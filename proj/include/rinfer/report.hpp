// Long-format metric collection plus the derived aggregate/test views that
// the experiment harness serializes.
#pragma once

#include "rinfer/metrics.hpp"
#include "rinfer/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rinfer {

struct MetricRow {
    std::string strategy;
    int fold = -1;       // -1 when the metric is not fold-scoped
    int bootstrap = -1;  // -1 when the metric is not bootstrap-scoped
    std::string metric;
    std::optional<Scalar> value;  // absent = explicitly undefined (e.g. kickout)
};

struct AggregateRow {
    std::string strategy;
    std::string metric;
    Scalar mean = 0;
    Scalar std_error = 0;
    std::size_t count = 0;
};

struct MetricTest {
    std::string metric;
    FriedmanResult friedman;
    Scalar nemenyi_cd = 0;  // NaN when the strategy count is outside the table
};

struct EvaluationReport {
    std::vector<MetricRow> raw;
    std::vector<AggregateRow> aggregates;
    std::vector<MetricTest> tests;
    std::vector<std::string> failures;  // excluded runs, one message each
};

/// Canonical order (strategy, metric, fold, bootstrap) used by all writers,
/// keeping every serialization reproducible byte for byte.
void sort_rows(std::vector<MetricRow>& rows);

/// Means and standard errors of the defined values per (strategy, metric).
std::vector<AggregateRow> aggregate_metrics(std::vector<MetricRow> rows);

/// Friedman test and Nemenyi critical difference per metric, over the
/// (fold, bootstrap) blocks where every strategy has a defined value.
/// Metrics without at least 2 strategies and 2 complete blocks are skipped.
std::vector<MetricTest> rank_tests(const std::vector<MetricRow>& rows);

void write_raw_metrics_csv(const std::filesystem::path& path, std::vector<MetricRow> rows);
void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<AggregateRow>& aggregates);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Human-readable aligned table: one strategy per row, "mean +- se" cells,
/// followed by the rank tests and any recorded failures.
std::string format_summary_table(const EvaluationReport& report);

/// Canonical float formatting for report CSVs.
std::string format_scalar(Scalar v);

}  // namespace rinfer
