#include "rinfer/synthgen.hpp"

#include "rinfer/metrics.hpp"
#include "rinfer/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace rinfer {

namespace {

constexpr int kMixtureComponents = 3;
constexpr int kLatentFactors = 4;
constexpr Scalar kComponentSpread = 1.0;
constexpr Scalar kLoadingScale = 0.6;
constexpr Scalar kIdiosyncratic = 0.8;
constexpr Scalar kMainScale = 1.6;
constexpr Scalar kHiddenBoost = 1.4;  // extra weight on informative features the legacy model never sees
constexpr Scalar kRateSpread = 1.7;   // through-the-door rate relative to the accept pool
constexpr Scalar kLegacyLambda = 0.01;

/// Random sign, bounded magnitude. Keeps every informative coefficient
/// material so the legacy feature subset carries signal for any seed.
Scalar draw_coefficient(Rng& rng, Scalar scale) {
    const Scalar magnitude = scale * (0.75 + 0.5 * rng.uniform());
    return rng.bernoulli(0.5) ? magnitude : -magnitude;
}

struct Structure {
    Matrix means;     // mixture component centers, one row per component
    Matrix loadings;  // feature x latent-factor loadings
    Vector mains;     // linear index coefficients over informative columns
};

Structure draw_structure(const GeneratorConfig& cfg) {
    Rng rng(derive_seed(cfg.seed, "structure"));
    Structure st;
    st.means.resize(kMixtureComponents, cfg.n_features);
    for (Index c = 0; c < kMixtureComponents; ++c) {
        for (Index j = 0; j < cfg.n_features; ++j) {
            st.means(c, j) = rng.normal(0, kComponentSpread);
        }
    }
    st.loadings.resize(cfg.n_features, kLatentFactors);
    for (Index j = 0; j < cfg.n_features; ++j) {
        for (Index k = 0; k < kLatentFactors; ++k) {
            st.loadings(j, k) = rng.normal(0, kLoadingScale);
        }
    }
    st.mains.resize(cfg.n_informative);
    const Scalar main_scale = kMainScale / std::sqrt(static_cast<Scalar>(cfg.n_informative));
    for (Index j = 0; j < cfg.n_informative; ++j) {
        const Scalar boost = j < cfg.legacy_feature_subset ? 1.0 : kHiddenBoost;
        st.mains[j] = draw_coefficient(rng, main_scale * boost);
    }
    return st;
}

/// Draws n observations from the mixture process and their latent index
/// (linear + interactions + noise, without the intercept).
void draw_rows(const Structure& st, const GeneratorConfig& cfg, Index n, std::uint64_t seed,
               Matrix& X, Vector& index) {
    Rng rng(seed);
    X.resize(n, cfg.n_features);
    index.resize(n);
    Vector z(kLatentFactors);
    for (Index i = 0; i < n; ++i) {
        const Index c = static_cast<Index>(rng.uniform_int(kMixtureComponents));
        for (Index k = 0; k < kLatentFactors; ++k) z[k] = rng.normal();
        for (Index j = 0; j < cfg.n_features; ++j) {
            X(i, j) = st.means(c, j) + st.loadings.row(j).dot(z) +
                      rng.normal(0, kIdiosyncratic);
        }
        Scalar idx = 0;
        for (Index j = 0; j < cfg.n_informative; ++j) idx += st.mains[j] * X(i, j);
        idx += cfg.noise_scale * rng.normal();
        index[i] = idx;
    }
}

Scalar mean_pd(const Vector& index, Scalar intercept) {
    Scalar total = 0;
    for (Index i = 0; i < index.size(); ++i) total += sigmoid(intercept + index[i]);
    return total / static_cast<Scalar>(index.size());
}

Scalar calibrate_intercept(const Vector& index, Scalar target) {
    Scalar lo = -30, hi = 30;
    if (mean_pd(index, lo) > target || mean_pd(index, hi) < target) {
        throw std::runtime_error("intercept calibration failed: target rate not bracketed");
    }
    for (int it = 0; it < 100; ++it) {
        const Scalar mid = 0.5 * (lo + hi);
        (mean_pd(index, mid) < target ? lo : hi) = mid;
    }
    const Scalar intercept = 0.5 * (lo + hi);
    if (std::abs(mean_pd(index, intercept) - target) > 1e-6) {
        throw std::runtime_error("intercept calibration did not converge");
    }
    return intercept;
}

std::vector<Label> draw_labels(const Vector& pd, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Label> labels(static_cast<std::size_t>(pd.size()));
    for (Index i = 0; i < pd.size(); ++i) {
        labels[static_cast<std::size_t>(i)] = rng.bernoulli(pd[i]) ? Label::Bad : Label::Good;
    }
    return labels;
}

}  // namespace

void GeneratorConfig::validate() const {
    if (n_population < 20) throw std::invalid_argument("n_population must be at least 20");
    if (n_features < 1) throw std::invalid_argument("n_features must be positive");
    if (n_informative < 1 || n_informative > n_features) {
        throw std::invalid_argument("n_informative must lie in [1, n_features]");
    }
    if (legacy_feature_subset < 1 || legacy_feature_subset > n_informative) {
        throw std::invalid_argument("legacy_feature_subset must lie in [1, n_informative]");
    }
    if (!(noise_scale >= 0)) throw std::invalid_argument("noise_scale must be non-negative");
    if (!(acceptance_rate > 0 && acceptance_rate < 1)) {
        throw std::invalid_argument("acceptance_rate must lie in (0,1)");
    }
    if (!(unbiased_fraction > 0 && unbiased_fraction < 1)) {
        throw std::invalid_argument("unbiased_fraction must lie in (0,1)");
    }
    if (!(target_accept_bad_rate > 0 && target_accept_bad_rate < 1)) {
        throw std::invalid_argument("target_accept_bad_rate must lie in (0,1)");
    }
    if (!(population_target_rate(*this) < 0.95)) {
        throw std::invalid_argument("target_accept_bad_rate leaves no room above the accept pool");
    }
}

Scalar population_target_rate(const GeneratorConfig& cfg) {
    return cfg.target_accept_bad_rate * (1 + kRateSpread) / 2;
}

Population generate_population(const GeneratorConfig& cfg) {
    cfg.validate();
    const Structure st = draw_structure(cfg);

    Population pop;
    Matrix X;
    Vector index;
    draw_rows(st, cfg, cfg.n_population, derive_seed(cfg.seed, "rows"), X, index);
    pop.intercept = calibrate_intercept(index, population_target_rate(cfg));

    pop.true_pd.resize(cfg.n_population);
    for (Index i = 0; i < cfg.n_population; ++i) {
        pop.true_pd[i] = sigmoid(pop.intercept + index[i]);
    }

    std::vector<CaseId> ids(static_cast<std::size_t>(cfg.n_population));
    std::iota(ids.begin(), ids.end(), CaseId{0});
    pop.data = CreditDataset(std::move(ids), std::move(X),
                             draw_labels(pop.true_pd, derive_seed(cfg.seed, "labels")));
    return pop;
}

SimulationResult simulate_acceptance(const Population& population, const GeneratorConfig& cfg) {
    cfg.validate();
    const CreditDataset& data = population.data;
    if (!data.has_labels()) throw std::invalid_argument("population must be labeled");
    const Index n = data.rows();
    if (population.true_pd.size() != n) {
        throw std::invalid_argument("population PD vector does not match the data");
    }

    // Unbiased holdout: a uniform draw, mirroring loans granted unscored.
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    Rng split_rng(derive_seed(cfg.seed, "unbiased-split"));
    split_rng.shuffle(order);
    const Index n_unbiased =
        static_cast<Index>(std::floor(cfg.unbiased_fraction * static_cast<Scalar>(n)));
    if (n_unbiased == 0) throw std::runtime_error("unbiased partition is empty");
    std::vector<Index> unbiased_rows(order.begin(), order.begin() + n_unbiased);
    std::vector<Index> remainder(order.begin() + n_unbiased, order.end());
    std::sort(unbiased_rows.begin(), unbiased_rows.end());
    std::sort(remainder.begin(), remainder.end());

    // Legacy scorecard: same data-generating process, fresh seed sample,
    // restricted to the first legacy_feature_subset columns.
    const Structure st = draw_structure(cfg);
    const Index n_seed = std::max<Index>(500, cfg.n_population / 4);
    Matrix seed_X;
    Vector seed_index;
    draw_rows(st, cfg, n_seed, derive_seed(cfg.seed, "seed-rows"), seed_X, seed_index);
    Vector seed_pd(n_seed);
    for (Index i = 0; i < n_seed; ++i) seed_pd[i] = sigmoid(population.intercept + seed_index[i]);
    const std::vector<Label> seed_labels = draw_labels(seed_pd, derive_seed(cfg.seed, "seed-labels"));
    const Matrix seed_sub = seed_X.leftCols(cfg.legacy_feature_subset);
    const L1LogisticModel legacy = fit_l1_logistic(seed_sub, seed_labels, kLegacyLambda);

    // Accept the lowest-PD share of the scored remainder.
    const CreditDataset rest = data.subset(remainder);
    const Matrix rest_sub = rest.features().leftCols(cfg.legacy_feature_subset);
    const Vector pd = legacy.predict_proba(rest_sub);
    std::vector<Index> by_score(remainder.size());
    std::iota(by_score.begin(), by_score.end(), Index{0});
    std::sort(by_score.begin(), by_score.end(), [&pd](Index a, Index b) {
        if (pd[a] != pd[b]) return pd[a] < pd[b];
        return a < b;
    });
    const Index n_rest = static_cast<Index>(remainder.size());
    const Index n_accept =
        static_cast<Index>(std::floor(cfg.acceptance_rate * static_cast<Scalar>(n_rest)));
    if (n_accept == 0) throw std::runtime_error("accept partition is empty");
    if (n_accept == n_rest) throw std::runtime_error("reject partition is empty");

    std::vector<Index> accept_rows, reject_rows;
    for (Index i = 0; i < n_rest; ++i) {
        const Index row = remainder[static_cast<std::size_t>(by_score[static_cast<std::size_t>(i)])];
        (i < n_accept ? accept_rows : reject_rows).push_back(row);
    }
    std::sort(accept_rows.begin(), accept_rows.end());
    std::sort(reject_rows.begin(), reject_rows.end());

    SimulationResult out;
    out.partition.accepts = data.subset(accept_rows);
    const CreditDataset rejects_labeled = data.subset(reject_rows);
    out.partition.rejects = rejects_labeled.without_labels();
    out.partition.reject_labels =
        SealedLabels::seal(rejects_labeled.ids(), rejects_labeled.labels());
    out.partition.unbiased = data.subset(unbiased_rows);
    out.partition.validate();
    out.legacy_scorecard = legacy;

    PartitionStats& stats = out.stats;
    stats.n_accepts = out.partition.accepts.size();
    stats.n_rejects = out.partition.rejects.size();
    stats.n_unbiased = out.partition.unbiased.size();
    stats.accept_bad_rate = out.partition.accepts.bad_rate();
    stats.reject_bad_rate = OracleAccess::bad_rate(out.partition.reject_labels);
    stats.unbiased_bad_rate = out.partition.unbiased.bad_rate();
    stats.unbiased_to_accept_ratio =
        stats.accept_bad_rate > 0 ? stats.unbiased_bad_rate / stats.accept_bad_rate
                                  : std::numeric_limits<Scalar>::quiet_NaN();
    const CreditDataset& unb = out.partition.unbiased;
    if (unb.bad_count() > 0 && unb.bad_count() < static_cast<Index>(unb.size())) {
        const Matrix unb_sub = unb.features().leftCols(cfg.legacy_feature_subset);
        stats.legacy_auc_unbiased = auc(unb.labels(), legacy.predict_proba(unb_sub));
    } else {
        stats.legacy_auc_unbiased = std::numeric_limits<Scalar>::quiet_NaN();
    }
    return out;
}

SimulationResult generate_partitioned(const GeneratorConfig& cfg) {
    return simulate_acceptance(generate_population(cfg), cfg);
}

}  // namespace rinfer
