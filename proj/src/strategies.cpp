#include "rinfer/strategies.hpp"

#include "rinfer/logistic.hpp"
#include "rinfer/metrics.hpp"
#include "rinfer/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace rinfer {

namespace {

void check_pools(const CreditDataset& accepts, const CreditDataset& rejects) {
    if (accepts.size() == 0) throw std::invalid_argument("accept pool is empty");
    if (!accepts.has_labels()) throw std::invalid_argument("accept pool must be labeled");
    if (rejects.has_labels()) {
        throw std::invalid_argument("reject pool must arrive without labels");
    }
    if (rejects.size() > 0 && accepts.features().cols() != rejects.features().cols()) {
        throw std::invalid_argument("accepts and rejects disagree on feature count");
    }
}

/// Assembles the augmented set: accepts first, then the inferred rejects in
/// append order. `rows` index into `reject_pool`.
AugmentedTrainingSet assemble(const CreditDataset& accepts, const CreditDataset& reject_pool,
                              const std::vector<Index>& rows, const std::vector<Label>& labels,
                              int iterations, std::string warning = {}) {
    AugmentedTrainingSet out;
    if (rows.empty()) {
        out.dataset = accepts;
    } else {
        out.dataset =
            CreditDataset::concat(accepts, reject_pool.subset(rows).with_labels(labels));
    }
    out.provenance.assign(accepts.size(), Provenance::OriginalAccept);
    for (const Label label : labels) {
        out.provenance.push_back(label == Label::Good ? Provenance::InferredGood
                                                      : Provenance::InferredBad);
    }
    out.iterations_used = iterations;
    out.warning = std::move(warning);
    return out;
}

std::vector<Index> all_rows(const CreditDataset& ds) {
    std::vector<Index> rows(ds.size());
    std::iota(rows.begin(), rows.end(), Index{0});
    return rows;
}

}  // namespace

void ShallowConfig::validate() const {
    if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("alpha must lie in (0,1)");
    if (!(theta >= 1)) throw std::invalid_argument("theta must be at least 1");
    if (!(alpha * theta < 1)) throw std::invalid_argument("alpha*theta must stay below 1");
    if (lambda && !(*lambda >= 0)) throw std::invalid_argument("lambda must be non-negative");
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
    filter.validate();
}

AugmentedTrainingSet ignore_rejects(const CreditDataset& accepts, const CreditDataset& rejects) {
    check_pools(accepts, rejects);
    return assemble(accepts, rejects, {}, {}, 0);
}

AugmentedTrainingSet label_all_bad(const CreditDataset& accepts, const CreditDataset& rejects) {
    check_pools(accepts, rejects);
    const std::vector<Index> rows = all_rows(rejects);
    const std::vector<Label> labels(rows.size(), Label::Bad);
    return assemble(accepts, rejects, rows, labels, rows.empty() ? 0 : 1);
}

AugmentedTrainingSet hard_cutoff(const CreditDataset& accepts, const CreditDataset& rejects,
                                 Scalar threshold, const GbtParams& scorer, std::uint64_t seed) {
    check_pools(accepts, rejects);
    if (!(threshold > 0 && threshold < 1)) {
        throw std::invalid_argument("hard_cutoff threshold must lie in (0,1)");
    }
    if (rejects.size() == 0) return assemble(accepts, rejects, {}, {}, 0);

    const GbtModel model = train_scorer(accepts.features(), accepts.labels(), scorer, seed);
    const Vector pd = model.predict_proba(rejects.features());

    const std::vector<Index> rows = all_rows(rejects);
    std::vector<Label> labels(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        labels[i] = pd[static_cast<Index>(i)] > threshold ? Label::Bad : Label::Good;
    }
    return assemble(accepts, rejects, rows, labels, 1);
}

AugmentedTrainingSet parcelling(const CreditDataset& accepts, const CreditDataset& rejects,
                                int n_batches, Scalar multiplier, const GbtParams& scorer,
                                std::uint64_t seed) {
    check_pools(accepts, rejects);
    if (n_batches < 2) throw std::invalid_argument("parcelling needs at least 2 batches");
    if (!(multiplier > 0)) throw std::invalid_argument("parcelling multiplier must be positive");
    if (rejects.size() == 0) return assemble(accepts, rejects, {}, {}, 0);

    const GbtModel model =
        train_scorer(accepts.features(), accepts.labels(), scorer, derive_seed(seed, "scorer"));
    const Vector accept_scores = model.predict_proba(accepts.features());
    const Vector reject_scores = model.predict_proba(rejects.features());

    const Index l = accept_scores.size();
    std::vector<Scalar> sorted(accept_scores.data(), accept_scores.data() + l);
    std::sort(sorted.begin(), sorted.end());

    // Equal-frequency cut points over the accepts' score distribution.
    std::vector<Scalar> cuts;
    for (int b = 1; b < n_batches; ++b) {
        cuts.push_back(sorted[static_cast<std::size_t>(
            static_cast<Index>(b) * l / n_batches)]);
    }
    const auto band_of = [&cuts](Scalar score) {
        return static_cast<std::size_t>(
            std::upper_bound(cuts.begin(), cuts.end(), score) - cuts.begin());
    };

    // Merge away bands that score ties left without any accepts.
    std::vector<Index> total, bad;
    for (;;) {
        total.assign(cuts.size() + 1, 0);
        bad.assign(cuts.size() + 1, 0);
        for (Index i = 0; i < l; ++i) {
            const std::size_t b = band_of(accept_scores[i]);
            ++total[b];
            if (accepts.labels()[static_cast<std::size_t>(i)] == Label::Bad) ++bad[b];
        }
        std::size_t empty = total.size();
        for (std::size_t b = 0; b < total.size(); ++b) {
            if (total[b] == 0) {
                empty = b;
                break;
            }
        }
        if (empty == total.size()) break;
        cuts.erase(cuts.begin() + static_cast<std::ptrdiff_t>(empty == 0 ? 0 : empty - 1));
    }

    std::vector<Scalar> bad_rate(total.size());
    for (std::size_t b = 0; b < total.size(); ++b) {
        bad_rate[b] = static_cast<Scalar>(bad[b]) / static_cast<Scalar>(total[b]);
    }

    Rng rng(derive_seed(seed, "labels"));
    const std::vector<Index> rows = all_rows(rejects);
    std::vector<Label> labels(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Scalar p =
            std::min<Scalar>(1.0, bad_rate[band_of(reject_scores[static_cast<Index>(i)])] *
                                      multiplier);
        labels[i] = rng.bernoulli(p) ? Label::Bad : Label::Good;
    }
    return assemble(accepts, rejects, rows, labels, 1);
}

AugmentedTrainingSet cv_voting(const CreditDataset& accepts, const CreditDataset& rejects,
                               int n_folds, Scalar threshold, const GbtParams& scorer,
                               std::uint64_t seed) {
    check_pools(accepts, rejects);
    if (n_folds < 2) throw std::invalid_argument("cv_voting needs at least 2 folds");
    if (!(threshold > 0 && threshold < 1)) {
        throw std::invalid_argument("cv_voting threshold must lie in (0,1)");
    }
    if (rejects.size() == 0) return assemble(accepts, rejects, {}, {}, 0);

    const FoldAssignment folds = stratified_kfold(accepts, n_folds, derive_seed(seed, "folds"));
    const Index m = static_cast<Index>(rejects.size());
    std::vector<int> bad_votes(static_cast<std::size_t>(m), 0);
    for (int f = 0; f < n_folds; ++f) {
        const CreditDataset train = accepts.subset(folds.complement_rows(f));
        const GbtModel model = train_scorer(train.features(), train.labels(), scorer,
                                            derive_seed(seed, "model", static_cast<std::uint64_t>(f)));
        const Vector pd = model.predict_proba(rejects.features());
        for (Index i = 0; i < m; ++i) {
            if (pd[i] > threshold) ++bad_votes[static_cast<std::size_t>(i)];
        }
    }

    std::vector<Index> rows;
    std::vector<Label> labels;
    for (Index i = 0; i < m; ++i) {
        const int votes = bad_votes[static_cast<std::size_t>(i)];
        if (votes == n_folds) {
            rows.push_back(i);
            labels.push_back(Label::Bad);
        } else if (votes == 0) {
            rows.push_back(i);
            labels.push_back(Label::Good);
        }
    }
    return assemble(accepts, rejects, rows, labels, rows.empty() ? 0 : 1);
}

AugmentedTrainingSet regular_self_learning(const CreditDataset& accepts,
                                           const CreditDataset& rejects, Scalar percentage,
                                           int max_iterations, const GbtParams& scorer,
                                           std::uint64_t seed) {
    check_pools(accepts, rejects);
    if (!(percentage > 0 && percentage < 1)) {
        throw std::invalid_argument("self_learning percentage must lie in (0,1)");
    }
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");

    std::vector<Index> remaining = all_rows(rejects);
    std::vector<Index> inferred_rows;
    std::vector<Label> inferred_labels;
    std::vector<IterationTrace> trace;
    int iterations = 0;

    for (int iter = 1; iter <= max_iterations; ++iter) {
        const Index k = static_cast<Index>(
            std::floor(percentage * static_cast<Scalar>(remaining.size())));
        if (remaining.empty() || k == 0) break;

        const CreditDataset pool =
            assemble(accepts, rejects, inferred_rows, inferred_labels, 0).dataset;
        const GbtModel model =
            train_scorer(pool.features(), pool.labels(), scorer,
                         derive_seed(seed, "model", static_cast<std::uint64_t>(iter)));
        const Vector pd = model.predict_proba(rejects.subset(remaining).features());

        std::vector<Index> order(remaining.size());
        std::iota(order.begin(), order.end(), Index{0});
        std::sort(order.begin(), order.end(), [&pd](Index a, Index b) {
            if (pd[a] != pd[b]) return pd[a] < pd[b];
            return a < b;
        });

        std::vector<char> taken(remaining.size(), 0);
        std::vector<Index> selected;
        std::vector<Label> selected_labels;
        for (Index j = 0; j < k; ++j) {
            taken[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])] = 1;
            selected.push_back(remaining[static_cast<std::size_t>(
                order[static_cast<std::size_t>(j)])]);
            selected_labels.push_back(Label::Good);
        }
        Index picked = 0;
        for (std::size_t j = order.size(); j-- > 0 && picked < k;) {
            if (taken[static_cast<std::size_t>(order[j])]) continue;
            taken[static_cast<std::size_t>(order[j])] = 1;
            selected.push_back(remaining[static_cast<std::size_t>(order[j])]);
            selected_labels.push_back(Label::Bad);
            ++picked;
        }

        IterationTrace row;
        row.iteration = iter;
        row.pool_size = pool.size();
        row.threshold_good = pd[order[static_cast<std::size_t>(k - 1)]];
        row.threshold_bad = pd[order[order.size() - static_cast<std::size_t>(picked)]];
        row.appended_good = static_cast<std::size_t>(k);
        row.appended_bad = static_cast<std::size_t>(picked);
        trace.push_back(row);

        inferred_rows.insert(inferred_rows.end(), selected.begin(), selected.end());
        inferred_labels.insert(inferred_labels.end(), selected_labels.begin(),
                               selected_labels.end());
        std::vector<Index> next;
        for (std::size_t j = 0; j < remaining.size(); ++j) {
            if (!taken[j]) next.push_back(remaining[j]);
        }
        remaining = std::move(next);
        iterations = iter;
    }
    AugmentedTrainingSet out = assemble(accepts, rejects, inferred_rows, inferred_labels, iterations);
    out.trace = std::move(trace);
    return out;
}

namespace {

/// Picks the labeler penalty by validation AUC on a stratified 20% slice of
/// the accepts. Falls back to the grid midpoint when the slice degenerates.
Scalar tune_labeler_lambda(const CreditDataset& accepts, std::uint64_t seed) {
    constexpr Scalar kGrid[] = {0.001, 0.01, 0.1, 1.0};
    const FoldAssignment folds = stratified_kfold(accepts, 5, seed);
    const CreditDataset valid = accepts.subset(folds.fold_rows(0));
    const CreditDataset train = accepts.subset(folds.complement_rows(0));
    const auto degenerate = [](const CreditDataset& ds) {
        return ds.bad_count() == 0 || ds.bad_count() == static_cast<Index>(ds.size());
    };
    if (valid.size() == 0 || train.size() == 0 || degenerate(valid) || degenerate(train)) {
        return 0.01;
    }
    Scalar best_lambda = kGrid[0];
    Scalar best_auc = -std::numeric_limits<Scalar>::infinity();
    for (const Scalar lam : kGrid) {
        const L1LogisticModel labeler = fit_l1_logistic(train.features(), train.labels(), lam);
        const Scalar score = auc(valid.labels(), labeler.predict_proba(valid.features()));
        if (score > best_auc) {
            best_auc = score;
            best_lambda = lam;
        }
    }
    return best_lambda;
}

}  // namespace

AugmentedTrainingSet shallow_self_learning(const CreditDataset& accepts,
                                           const CreditDataset& rejects, const ShallowConfig& cfg,
                                           std::uint64_t seed) {
    check_pools(accepts, rejects);
    cfg.validate();
    if (rejects.size() == 0) throw std::invalid_argument("shallow_self_learning needs rejects");
    if (accepts.bad_count() == 0 || accepts.bad_count() == static_cast<Index>(accepts.size())) {
        throw std::invalid_argument("shallow_self_learning needs both classes among accepts");
    }

    CreditDataset pool_rejects = rejects;
    if (cfg.filter.beta_bottom > 0 || cfg.filter.beta_top > 0) {
        pool_rejects =
            filter_rejects(accepts, rejects, cfg.filter, derive_seed(seed, "filter")).retained;
    }

    const Scalar lambda =
        cfg.lambda ? *cfg.lambda : tune_labeler_lambda(accepts, derive_seed(seed, "tune"));

    std::vector<Index> remaining = all_rows(pool_rejects);
    std::vector<Index> inferred_rows;
    std::vector<Label> inferred_labels;
    std::vector<IterationTrace> trace;
    int iterations = 0;
    Scalar c_good = 0, c_bad = 0;

    for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
        if (remaining.empty()) break;
        const CreditDataset pool =
            assemble(accepts, pool_rejects, inferred_rows, inferred_labels, 0).dataset;
        const L1LogisticModel labeler =
            fit_l1_logistic(pool.features(), pool.labels(), lambda);
        const Vector f = labeler.predict_proba(pool_rejects.subset(remaining).features());

        if (iter == 1) {
            const Index m = f.size();
            std::vector<Scalar> sorted(f.data(), f.data() + m);
            std::sort(sorted.begin(), sorted.end());
            const Index k_good = static_cast<Index>(
                std::floor(cfg.alpha * static_cast<Scalar>(m)));
            const Index k_bad = static_cast<Index>(
                std::floor(cfg.alpha * cfg.theta * static_cast<Scalar>(m)));
            c_good = sorted[static_cast<std::size_t>(k_good)];
            c_bad = sorted[static_cast<std::size_t>(m - k_bad - 1)];
            if (!(c_good < c_bad)) {
                return assemble(accepts, pool_rejects, {}, {}, 0,
                                "degenerate labeler score distribution: thresholds collapsed, "
                                "no rejects inferred");
            }
        }

        IterationTrace row;
        row.iteration = iter;
        row.pool_size = pool.size();
        row.threshold_good = c_good;
        row.threshold_bad = c_bad;

        std::vector<Index> next;
        for (std::size_t j = 0; j < remaining.size(); ++j) {
            const Scalar score = f[static_cast<Index>(j)];
            if (score < c_good) {
                inferred_rows.push_back(remaining[j]);
                inferred_labels.push_back(Label::Good);
                ++row.appended_good;
            } else if (score > c_bad) {
                inferred_rows.push_back(remaining[j]);
                inferred_labels.push_back(Label::Bad);
                ++row.appended_bad;
            } else {
                next.push_back(remaining[j]);
            }
        }
        if (row.appended_good + row.appended_bad == 0) break;
        trace.push_back(row);
        remaining = std::move(next);
        iterations = iter;
    }
    AugmentedTrainingSet out =
        assemble(accepts, pool_rejects, inferred_rows, inferred_labels, iterations);
    out.trace = std::move(trace);
    return out;
}

namespace {

std::string format_param(Scalar v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

struct ParamSchema {
    std::vector<std::string> required;
    std::vector<std::pair<std::string, Scalar>> defaults;
    std::vector<std::string> bare_optional;  // allowed, no default (absence has meaning)
};

const ParamSchema& schema_for(StrategyKind kind) {
    static const ParamSchema none{};
    static const ParamSchema hard{{"threshold"}, {}, {}};
    static const ParamSchema parcel{{"multiplier"}, {{"n_batches", 10}}, {}};
    static const ParamSchema voting{{"n_folds"}, {{"threshold", 0.3}}, {}};
    static const ParamSchema self_learn{{"percentage"}, {{"max_iterations", 5}}, {}};
    // Shallow keys all fall back to the ShallowConfig defaults when absent.
    static const ParamSchema shallow{{},
                                     {},
                                     {"alpha", "theta", "max_iterations", "filter_beta_bottom",
                                      "filter_beta_top", "lambda"}};
    switch (kind) {
        case StrategyKind::IgnoreRejects:
        case StrategyKind::LabelAllBad: return none;
        case StrategyKind::HardCutoff: return hard;
        case StrategyKind::Parcelling: return parcel;
        case StrategyKind::CvVoting: return voting;
        case StrategyKind::RegularSelfLearning: return self_learn;
        case StrategyKind::ShallowSelfLearning: return shallow;
    }
    throw std::logic_error("unhandled strategy kind");
}

Scalar param(const StrategySpec& spec, const std::string& key) {
    const auto it = spec.params.find(key);
    if (it != spec.params.end()) return it->second;
    const ParamSchema& schema = schema_for(spec.kind);
    for (const auto& [name, value] : schema.defaults) {
        if (name == key) return value;
    }
    throw std::invalid_argument("missing parameter '" + key + "' for strategy " +
                                strategy_kind_name(spec.kind));
}

int int_param(const StrategySpec& spec, const std::string& key) {
    return static_cast<int>(std::lround(param(spec, key)));
}

Scalar param_or(const StrategySpec& spec, const std::string& key, Scalar fallback) {
    const auto it = spec.params.find(key);
    return it != spec.params.end() ? it->second : fallback;
}

}  // namespace

std::string strategy_kind_name(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::IgnoreRejects: return "ignore_rejects";
        case StrategyKind::LabelAllBad: return "label_all_bad";
        case StrategyKind::HardCutoff: return "hard_cutoff";
        case StrategyKind::Parcelling: return "parcelling";
        case StrategyKind::CvVoting: return "cv_voting";
        case StrategyKind::RegularSelfLearning: return "self_learning";
        case StrategyKind::ShallowSelfLearning: return "shallow_self_learning";
    }
    throw std::logic_error("unhandled strategy kind");
}

StrategyKind strategy_kind_from_string(const std::string& name) {
    static const std::pair<const char*, StrategyKind> table[] = {
        {"ignore_rejects", StrategyKind::IgnoreRejects},
        {"label_all_bad", StrategyKind::LabelAllBad},
        {"hard_cutoff", StrategyKind::HardCutoff},
        {"parcelling", StrategyKind::Parcelling},
        {"cv_voting", StrategyKind::CvVoting},
        {"self_learning", StrategyKind::RegularSelfLearning},
        {"shallow_self_learning", StrategyKind::ShallowSelfLearning},
    };
    for (const auto& [key, kind] : table) {
        if (name == key) return kind;
    }
    std::string known;
    for (const auto& [key, kind] : table) {
        if (!known.empty()) known += ", ";
        known += key;
    }
    throw std::invalid_argument("unknown strategy '" + name + "' (known: " + known + ")");
}

std::string StrategySpec::id() const {
    std::string out = strategy_kind_name(kind);
    if (!params.empty()) {
        out += '[';
        bool first = true;
        for (const auto& [key, value] : params) {
            if (!first) out += ' ';
            first = false;
            out += key;
            out += '=';
            out += format_param(value);
        }
        out += ']';
    }
    return out;
}

void StrategySpec::validate() const {
    const ParamSchema& schema = schema_for(kind);
    const auto allowed = [&schema](const std::string& key) {
        for (const auto& name : schema.required) {
            if (name == key) return true;
        }
        for (const auto& [name, value] : schema.defaults) {
            if (name == key) return true;
        }
        for (const auto& name : schema.bare_optional) {
            if (name == key) return true;
        }
        return false;
    };
    for (const auto& [key, value] : params) {
        if (!allowed(key)) {
            throw std::invalid_argument("unknown parameter '" + key + "' for strategy " +
                                        strategy_kind_name(kind));
        }
    }
    for (const auto& name : schema.required) {
        if (params.find(name) == params.end()) {
            throw std::invalid_argument("missing parameter '" + name + "' for strategy " +
                                        strategy_kind_name(kind));
        }
    }
}

AugmentedTrainingSet run_strategy(const StrategySpec& spec, const CreditDataset& accepts,
                                  const CreditDataset& rejects, const GbtParams& scorer,
                                  std::uint64_t seed) {
    spec.validate();
    switch (spec.kind) {
        case StrategyKind::IgnoreRejects: return ignore_rejects(accepts, rejects);
        case StrategyKind::LabelAllBad: return label_all_bad(accepts, rejects);
        case StrategyKind::HardCutoff:
            return hard_cutoff(accepts, rejects, param(spec, "threshold"), scorer, seed);
        case StrategyKind::Parcelling:
            return parcelling(accepts, rejects, int_param(spec, "n_batches"),
                              param(spec, "multiplier"), scorer, seed);
        case StrategyKind::CvVoting:
            return cv_voting(accepts, rejects, int_param(spec, "n_folds"),
                             param(spec, "threshold"), scorer, seed);
        case StrategyKind::RegularSelfLearning:
            return regular_self_learning(accepts, rejects, param(spec, "percentage"),
                                         int_param(spec, "max_iterations"), scorer, seed);
        case StrategyKind::ShallowSelfLearning: {
            ShallowConfig cfg;
            cfg.alpha = param_or(spec, "alpha", cfg.alpha);
            cfg.theta = param_or(spec, "theta", cfg.theta);
            cfg.max_iterations = static_cast<int>(std::lround(
                param_or(spec, "max_iterations", static_cast<Scalar>(cfg.max_iterations))));
            cfg.filter.beta_bottom = param_or(spec, "filter_beta_bottom", cfg.filter.beta_bottom);
            cfg.filter.beta_top = param_or(spec, "filter_beta_top", cfg.filter.beta_top);
            if (const auto it = spec.params.find("lambda"); it != spec.params.end()) {
                cfg.lambda = it->second;
            }
            return shallow_self_learning(accepts, rejects, cfg, seed);
        }
    }
    throw std::logic_error("unhandled strategy kind");
}

}  // namespace rinfer
