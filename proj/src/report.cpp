#include "rinfer/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace rinfer {

namespace {

/// Fixed column order for the summary views.
const std::vector<std::string>& metric_order() {
    static const std::vector<std::string> order = {
        "accepts_auc",  "accepts_brier",  "accepts_rp", "unbiased_auc",
        "unbiased_brier", "unbiased_rp",  "kickout",
    };
    return order;
}

int metric_rank(const std::string& metric) {
    const auto& order = metric_order();
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (order[i] == metric) return static_cast<int>(i);
    }
    return static_cast<int>(order.size());
}

}  // namespace

std::string format_scalar(Scalar v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void sort_rows(std::vector<MetricRow>& rows) {
    std::sort(rows.begin(), rows.end(), [](const MetricRow& a, const MetricRow& b) {
        return std::tie(a.strategy, a.metric, a.fold, a.bootstrap) <
               std::tie(b.strategy, b.metric, b.fold, b.bootstrap);
    });
}

std::vector<AggregateRow> aggregate_metrics(std::vector<MetricRow> rows) {
    sort_rows(rows);
    std::vector<AggregateRow> out;
    std::size_t i = 0;
    while (i < rows.size()) {
        std::size_t j = i;
        Scalar sum = 0;
        std::size_t n = 0;
        while (j < rows.size() && rows[j].strategy == rows[i].strategy &&
               rows[j].metric == rows[i].metric) {
            if (rows[j].value) {
                sum += *rows[j].value;
                ++n;
            }
            ++j;
        }
        AggregateRow agg;
        agg.strategy = rows[i].strategy;
        agg.metric = rows[i].metric;
        agg.count = n;
        if (n > 0) {
            agg.mean = sum / static_cast<Scalar>(n);
            Scalar ss = 0;
            for (std::size_t k = i; k < j; ++k) {
                if (!rows[k].value) continue;
                const Scalar d = *rows[k].value - agg.mean;
                ss += d * d;
            }
            agg.std_error = n > 1 ? std::sqrt(ss / static_cast<Scalar>(n - 1) /
                                              static_cast<Scalar>(n))
                                  : 0;
        } else {
            agg.mean = std::numeric_limits<Scalar>::quiet_NaN();
            agg.std_error = std::numeric_limits<Scalar>::quiet_NaN();
        }
        out.push_back(std::move(agg));
        i = j;
    }
    std::stable_sort(out.begin(), out.end(), [](const AggregateRow& a, const AggregateRow& b) {
        if (a.strategy != b.strategy) return a.strategy < b.strategy;
        return metric_rank(a.metric) < metric_rank(b.metric);
    });
    return out;
}

std::vector<MetricTest> rank_tests(const std::vector<MetricRow>& rows) {
    std::set<std::string> metric_names;
    for (const MetricRow& r : rows) metric_names.insert(r.metric);

    std::vector<MetricTest> out;
    for (const std::string& metric : metric_order()) {
        if (!metric_names.count(metric)) continue;
        // strategy -> (fold, bootstrap) -> value
        std::map<std::string, std::map<std::pair<int, int>, Scalar>> by_strategy;
        for (const MetricRow& r : rows) {
            if (r.metric != metric || !r.value) continue;
            by_strategy[r.strategy][{r.fold, r.bootstrap}] = *r.value;
        }
        if (by_strategy.size() < 2) continue;

        std::set<std::pair<int, int>> blocks;
        bool first = true;
        for (const auto& [strategy, values] : by_strategy) {
            std::set<std::pair<int, int>> keys;
            for (const auto& [key, v] : values) keys.insert(key);
            if (first) {
                blocks = std::move(keys);
                first = false;
            } else {
                std::set<std::pair<int, int>> kept;
                std::set_intersection(blocks.begin(), blocks.end(), keys.begin(), keys.end(),
                                      std::inserter(kept, kept.begin()));
                blocks = std::move(kept);
            }
        }
        if (blocks.size() < 2) continue;

        Matrix values(static_cast<Index>(blocks.size()),
                      static_cast<Index>(by_strategy.size()));
        Index col = 0;
        for (const auto& [strategy, value_map] : by_strategy) {
            Index row = 0;
            for (const auto& block : blocks) {
                values(row++, col) = value_map.at(block);
            }
            ++col;
        }

        MetricTest test;
        test.metric = metric;
        try {
            test.friedman = friedman_test(values);
        } catch (const std::exception&) {
            continue;  // fewer treatments than the test needs
        }
        try {
            test.nemenyi_cd = nemenyi_critical_difference(
                static_cast<int>(by_strategy.size()), static_cast<int>(blocks.size()));
        } catch (const std::exception&) {
            test.nemenyi_cd = std::numeric_limits<Scalar>::quiet_NaN();
        }
        out.push_back(std::move(test));
    }
    return out;
}

void write_raw_metrics_csv(const std::filesystem::path& path, std::vector<MetricRow> rows) {
    sort_rows(rows);
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path.string() + ": cannot open file for writing");
    out << "strategy,fold,bootstrap,metric,value\n";
    for (const MetricRow& r : rows) {
        out << r.strategy << ',';
        if (r.fold >= 0) out << r.fold;
        out << ',';
        if (r.bootstrap >= 0) out << r.bootstrap;
        out << ',' << r.metric << ',' << (r.value ? format_scalar(*r.value) : "NA") << '\n';
    }
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<AggregateRow>& aggregates) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path.string() + ": cannot open file for writing");
    out << "strategy,metric,mean,std_error,count\n";
    for (const AggregateRow& a : aggregates) {
        out << a.strategy << ',' << a.metric << ','
            << (a.count ? format_scalar(a.mean) : "NA") << ','
            << (a.count ? format_scalar(a.std_error) : "NA") << ',' << a.count << '\n';
    }
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path.string() + ": cannot open file for writing");
    out << text;
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::string format_summary_table(const EvaluationReport& report) {
    std::vector<std::string> strategies;
    for (const AggregateRow& a : report.aggregates) {
        if (strategies.empty() || strategies.back() != a.strategy) {
            strategies.push_back(a.strategy);
        }
    }
    std::vector<std::string> metrics;
    for (const std::string& m : metric_order()) {
        for (const AggregateRow& a : report.aggregates) {
            if (a.metric == m) {
                metrics.push_back(m);
                break;
            }
        }
    }

    const auto cell = [&](const std::string& strategy, const std::string& metric) {
        for (const AggregateRow& a : report.aggregates) {
            if (a.strategy == strategy && a.metric == metric) {
                if (a.count == 0) return std::string("NA");
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.4f +- %.4f", a.mean, a.std_error);
                return std::string(buf);
            }
        }
        return std::string("-");
    };

    std::size_t name_width = 8;
    for (const std::string& s : strategies) name_width = std::max(name_width, s.size());
    std::vector<std::size_t> widths;
    for (const std::string& m : metrics) {
        std::size_t w = m.size();
        for (const std::string& s : strategies) w = std::max(w, cell(s, m).size());
        widths.push_back(w);
    }

    std::ostringstream out;
    const auto pad = [&out](const std::string& text, std::size_t width) {
        out << text << std::string(width - text.size(), ' ');
    };
    pad("strategy", name_width);
    for (std::size_t j = 0; j < metrics.size(); ++j) {
        out << "  ";
        pad(metrics[j], widths[j]);
    }
    out << '\n';
    out << std::string(name_width, '-');
    for (std::size_t j = 0; j < metrics.size(); ++j) {
        out << "  " << std::string(widths[j], '-');
    }
    out << '\n';
    for (const std::string& s : strategies) {
        pad(s, name_width);
        for (std::size_t j = 0; j < metrics.size(); ++j) {
            out << "  ";
            pad(cell(s, metrics[j]), widths[j]);
        }
        out << '\n';
    }

    if (!report.tests.empty()) {
        out << "\nFriedman / Nemenyi (alpha = 0.05)\n";
        out << "metric            chi2          p-value       CD\n";
        for (const MetricTest& t : report.tests) {
            char buf[160];
            if (std::isnan(t.nemenyi_cd)) {
                std::snprintf(buf, sizeof buf, "%-16s  %-12.4f  %-12.6f  n/a\n",
                              t.metric.c_str(), t.friedman.statistic, t.friedman.p_value);
            } else {
                std::snprintf(buf, sizeof buf, "%-16s  %-12.4f  %-12.6f  %.4f\n",
                              t.metric.c_str(), t.friedman.statistic, t.friedman.p_value,
                              t.nemenyi_cd);
            }
            out << buf;
        }
    }
    if (!report.failures.empty()) {
        out << "\nExcluded runs:\n";
        for (const std::string& f : report.failures) out << "  " << f << '\n';
    }
    return out.str();
}

}  // namespace rinfer
