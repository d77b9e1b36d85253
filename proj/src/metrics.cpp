#include "rinfer/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rinfer {

Vector average_ranks(const Vector& values) {
    const Index n = values.size();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return values[a] < values[b]; });
    Vector ranks(n);
    Index i = 0;
    while (i < n) {
        Index j = i;
        while (j + 1 < n && values[order[static_cast<std::size_t>(j + 1)]] ==
                                values[order[static_cast<std::size_t>(i)]])
            ++j;
        const Scalar avg = static_cast<Scalar>(i + j) / 2.0 + 1.0;  // 1-based
        for (Index t = i; t <= j; ++t) ranks[order[static_cast<std::size_t>(t)]] = avg;
        i = j + 1;
    }
    return ranks;
}

Scalar auc(const std::vector<Label>& labels, const Vector& scores) {
    if (static_cast<Index>(labels.size()) != scores.size())
        throw std::invalid_argument("auc: label/score length mismatch");
    Index n_bad = 0;
    for (Label l : labels) n_bad += l == Label::Bad;
    const Index n_good = scores.size() - n_bad;
    if (n_bad == 0 || n_good == 0) throw std::invalid_argument("auc: single-class input");

    const Vector ranks = average_ranks(scores);
    Scalar rank_sum_bad = 0;
    for (Index i = 0; i < scores.size(); ++i)
        if (labels[static_cast<std::size_t>(i)] == Label::Bad) rank_sum_bad += ranks[i];
    const Scalar nb = static_cast<Scalar>(n_bad);
    return (rank_sum_bad - nb * (nb + 1.0) / 2.0) / (nb * static_cast<Scalar>(n_good));
}

Scalar brier(const std::vector<Label>& labels, const Vector& probabilities) {
    if (static_cast<Index>(labels.size()) != probabilities.size())
        throw std::invalid_argument("brier: label/probability length mismatch");
    if (probabilities.size() == 0) throw std::invalid_argument("brier: empty input");
    Scalar sum = 0;
    for (Index i = 0; i < probabilities.size(); ++i) {
        const Scalar y = labels[static_cast<std::size_t>(i)] == Label::Bad ? 1.0 : 0.0;
        const Scalar d = probabilities[i] - y;
        sum += d * d;
    }
    return sum / static_cast<Scalar>(probabilities.size());
}

Scalar r_precision(const std::vector<Label>& labels, const Vector& scores,
                   Scalar accept_fraction) {
    if (static_cast<Index>(labels.size()) != scores.size())
        throw std::invalid_argument("r_precision: label/score length mismatch");
    const auto n_select =
        static_cast<Index>(std::floor(accept_fraction * static_cast<Scalar>(scores.size())));
    if (n_select <= 0)
        throw std::invalid_argument("r_precision: accept_fraction selects zero cases");

    std::vector<Index> order(static_cast<std::size_t>(scores.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return scores[a] < scores[b]; });
    Index good = 0;
    for (Index i = 0; i < n_select; ++i)
        good += labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] == Label::Good;
    return static_cast<Scalar>(good) / static_cast<Scalar>(n_select);
}

void KickoutInputs::validate() const {
    if (selected_bad <= 0) throw std::invalid_argument("kickout: no bad cases in accepted pool");
    if (bad_share <= 0.0 || bad_share >= 1.0)
        throw std::invalid_argument("kickout: bad share must lie strictly in (0,1)");
    if (kicked_bad < 0 || kicked_good < 0 || kicked_bad > selected_bad)
        throw std::invalid_argument("kickout: kicked-out counts out of range");
    const Scalar selected_good =
        static_cast<Scalar>(selected_bad) * (1.0 - bad_share) / bad_share;
    if (static_cast<Scalar>(kicked_good) > selected_good + 1e-9)
        throw std::invalid_argument("kickout: kicked-out goods exceed goods in the pool");
}

Scalar kickout(const KickoutInputs& in) {
    in.validate();
    const Scalar kb = static_cast<Scalar>(in.kicked_bad);
    const Scalar kg = static_cast<Scalar>(in.kicked_good);
    const Scalar sb = static_cast<Scalar>(in.selected_bad);
    const Scalar p = in.bad_share;
    return (kb / p - kg / (1.0 - p)) / (sb / p);
}

FriedmanResult friedman_test(const Matrix& values) {
    const Index n = values.rows();  // blocks
    const Index k = values.cols();  // treatments
    if (k < 3) throw std::invalid_argument("friedman_test: needs at least 3 treatments");
    if (n < 2) throw std::invalid_argument("friedman_test: needs at least 2 blocks");

    Vector mean_ranks = Vector::Zero(k);
    for (Index b = 0; b < n; ++b) mean_ranks += average_ranks(values.row(b).transpose());
    mean_ranks /= static_cast<Scalar>(n);

    const Scalar kk = static_cast<Scalar>(k);
    const Scalar nn = static_cast<Scalar>(n);
    const Scalar stat =
        12.0 * nn / (kk * (kk + 1.0)) *
        (mean_ranks.squaredNorm() - kk * (kk + 1.0) * (kk + 1.0) / 4.0);

    FriedmanResult out;
    out.statistic = std::max(stat, 0.0);  // guard FP noise on identical columns
    out.p_value = chi_squared_sf(out.statistic, static_cast<int>(k) - 1);
    out.mean_ranks = std::move(mean_ranks);
    out.treatments = k;
    out.blocks = n;
    return out;
}

Scalar nemenyi_critical_difference(int k, int n_blocks, Scalar alpha) {
    if (alpha != 0.05)
        throw std::invalid_argument("nemenyi: only alpha = 0.05 constants are tabled");
    // q_0.05 for k = 2..10: studentized range over sqrt(2), infinite dof.
    static constexpr Scalar q05[] = {1.959964, 2.343701, 2.569032, 2.727774, 2.849705,
                                     2.948550, 3.030879, 3.101730, 3.163684};
    if (k < 2 || k > 10) throw std::invalid_argument("nemenyi: k outside tabled range [2,10]");
    if (n_blocks < 1) throw std::invalid_argument("nemenyi: n_blocks must be positive");
    const Scalar kk = static_cast<Scalar>(k);
    return q05[k - 2] * std::sqrt(kk * (kk + 1.0) / (6.0 * static_cast<Scalar>(n_blocks)));
}

Scalar spearman(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("spearman: length mismatch");
    if (a.size() < 2) throw std::invalid_argument("spearman: needs at least 2 points");
    const Vector ra = average_ranks(a);
    const Vector rb = average_ranks(b);
    const Vector ca = ra.array() - ra.mean();
    const Vector cb = rb.array() - rb.mean();
    const Scalar denom = std::sqrt(ca.squaredNorm() * cb.squaredNorm());
    if (denom == 0.0) throw std::invalid_argument("spearman: zero rank variance");
    return ca.dot(cb) / denom;
}

// Regularized incomplete gamma by series/continued fraction (gammp/gammq).
namespace {

Scalar gamma_p_series(Scalar a, Scalar x) {
    Scalar ap = a;
    Scalar sum = 1.0 / a;
    Scalar del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

Scalar gamma_q_cf(Scalar a, Scalar x) {
    constexpr Scalar tiny = 1e-300;
    Scalar b = x + 1.0 - a;
    Scalar c = 1.0 / tiny;
    Scalar d = 1.0 / b;
    Scalar h = d;
    for (int i = 1; i <= 500; ++i) {
        const Scalar an = -static_cast<Scalar>(i) * (static_cast<Scalar>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const Scalar del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

Scalar gamma_q(Scalar a, Scalar x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: invalid arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

Scalar chi_squared_sf(Scalar x, int dof) {
    if (dof < 1) throw std::invalid_argument("chi_squared_sf: dof must be positive");
    if (x <= 0.0) return 1.0;
    return gamma_q(static_cast<Scalar>(dof) / 2.0, x / 2.0);
}

}  // namespace rinfer
