#include "rinfer/dataset.hpp"

#include "rinfer/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace rinfer {

CreditDataset::CreditDataset(std::vector<CaseId> ids, Matrix features,
                             std::optional<std::vector<Label>> labels)
    : ids_(std::move(ids)), features_(std::move(features)), labels_(std::move(labels)) {
    if (static_cast<Index>(ids_.size()) != features_.rows())
        throw std::invalid_argument("dataset: id count does not match row count");
    if (labels_ && static_cast<Index>(labels_->size()) != features_.rows())
        throw std::invalid_argument("dataset: label count does not match row count");
    if (!features_.allFinite())
        throw std::invalid_argument("dataset: features contain non-finite values");
    std::unordered_set<CaseId> seen;
    seen.reserve(ids_.size());
    for (CaseId id : ids_)
        if (!seen.insert(id).second)
            throw std::invalid_argument("dataset: duplicate case id " + std::to_string(id));
}

const std::vector<Label>& CreditDataset::labels() const {
    if (!labels_) throw std::logic_error("dataset: labels requested but absent");
    return *labels_;
}

Index CreditDataset::bad_count() const {
    const auto& y = labels();
    return static_cast<Index>(std::count(y.begin(), y.end(), Label::Bad));
}

Scalar CreditDataset::bad_rate() const {
    if (rows() == 0) throw std::logic_error("dataset: bad_rate of empty dataset");
    return static_cast<Scalar>(bad_count()) / static_cast<Scalar>(rows());
}

CreditDataset CreditDataset::subset(const std::vector<Index>& row_indices) const {
    std::vector<CaseId> ids;
    ids.reserve(row_indices.size());
    Matrix f(static_cast<Index>(row_indices.size()), cols());
    std::optional<std::vector<Label>> lab;
    if (labels_) {
        lab.emplace();
        lab->reserve(row_indices.size());
    }
    Index out = 0;
    for (Index r : row_indices) {
        if (r < 0 || r >= rows()) throw std::out_of_range("dataset: subset row out of range");
        ids.push_back(ids_[static_cast<std::size_t>(r)]);
        f.row(out++) = features_.row(r);
        if (lab) lab->push_back((*labels_)[static_cast<std::size_t>(r)]);
    }
    return CreditDataset(std::move(ids), std::move(f), std::move(lab));
}

CreditDataset CreditDataset::without_labels() const {
    return CreditDataset(ids_, features_, std::nullopt);
}

CreditDataset CreditDataset::with_labels(std::vector<Label> labels) const {
    return CreditDataset(ids_, features_, std::move(labels));
}

CreditDataset CreditDataset::concat(const CreditDataset& a, const CreditDataset& b) {
    if (a.rows() == 0) return b;
    if (b.rows() == 0) return a;
    if (a.cols() != b.cols())
        throw std::invalid_argument("dataset: concat with mismatched feature counts");
    if (a.has_labels() != b.has_labels())
        throw std::invalid_argument("dataset: concat with mismatched label presence");
    std::vector<CaseId> ids = a.ids_;
    ids.insert(ids.end(), b.ids_.begin(), b.ids_.end());
    Matrix f(a.rows() + b.rows(), a.cols());
    f.topRows(a.rows()) = a.features_;
    f.bottomRows(b.rows()) = b.features_;
    std::optional<std::vector<Label>> lab;
    if (a.has_labels()) {
        lab = a.labels();
        lab->insert(lab->end(), b.labels().begin(), b.labels().end());
    }
    return CreditDataset(std::move(ids), std::move(f), std::move(lab));
}

SealedLabels SealedLabels::seal(std::vector<CaseId> ids, std::vector<Label> labels) {
    if (ids.size() != labels.size())
        throw std::invalid_argument("sealed labels: id/label count mismatch");
    SealedLabels s;
    s.ids_ = std::move(ids);
    s.labels_ = std::move(labels);
    return s;
}

Scalar OracleAccess::bad_rate(const SealedLabels& s) {
    if (s.labels_.empty()) throw std::logic_error("sealed labels: empty");
    const auto bad = std::count(s.labels_.begin(), s.labels_.end(), Label::Bad);
    return static_cast<Scalar>(bad) / static_cast<Scalar>(s.labels_.size());
}

CreditDataset OracleAccess::unseal(const CreditDataset& ds, const SealedLabels& s) {
    std::unordered_map<CaseId, Label> by_id;
    by_id.reserve(s.ids_.size());
    for (std::size_t i = 0; i < s.ids_.size(); ++i) by_id.emplace(s.ids_[i], s.labels_[i]);
    std::vector<Label> labels;
    labels.reserve(ds.ids().size());
    for (CaseId id : ds.ids()) {
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw std::invalid_argument("sealed labels: no label for case id " +
                                        std::to_string(id));
        labels.push_back(it->second);
    }
    return ds.with_labels(std::move(labels));
}

void PartitionedData::validate() const {
    if (!accepts.has_labels()) throw std::invalid_argument("partition: accepts must be labeled");
    if (!unbiased.has_labels())
        throw std::invalid_argument("partition: unbiased sample must be labeled");
    if (rejects.has_labels())
        throw std::invalid_argument("partition: rejects must not expose labels");
    const Index bad = accepts.bad_count();
    if (bad == 0 || bad == accepts.rows())
        throw std::invalid_argument("partition: accepts must contain both classes");
    std::unordered_set<CaseId> seen;
    auto check = [&](const CreditDataset& ds, const char* name) {
        for (CaseId id : ds.ids())
            if (!seen.insert(id).second)
                throw std::invalid_argument(std::string("partition: id ") + std::to_string(id) +
                                            " of " + name + " reappears in another part");
    };
    check(accepts, "accepts");
    check(rejects, "rejects");
    check(unbiased, "unbiased");
}

std::vector<Index> FoldAssignment::fold_rows(int fold) const {
    std::vector<Index> rows;
    for (std::size_t i = 0; i < fold_index.size(); ++i)
        if (fold_index[i] == fold) rows.push_back(static_cast<Index>(i));
    return rows;
}

std::vector<Index> FoldAssignment::complement_rows(int fold) const {
    std::vector<Index> rows;
    for (std::size_t i = 0; i < fold_index.size(); ++i)
        if (fold_index[i] != fold) rows.push_back(static_cast<Index>(i));
    return rows;
}

FoldAssignment stratified_kfold(const CreditDataset& ds, int k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("stratified_kfold: k must be >= 2");
    const auto& labels = ds.labels();

    std::vector<Index> good_rows, bad_rows;
    for (Index i = 0; i < ds.rows(); ++i)
        (labels[static_cast<std::size_t>(i)] == Label::Bad ? bad_rows : good_rows).push_back(i);
    if (static_cast<int>(good_rows.size()) < k || static_cast<int>(bad_rows.size()) < k)
        throw std::invalid_argument("stratified_kfold: a class has fewer than k members");

    FoldAssignment out;
    out.k = k;
    out.fold_index.assign(static_cast<std::size_t>(ds.rows()), 0);

    Rng rng(derive_seed(seed, "kfold"));
    int class_offset = 0;
    for (auto* rows : {&good_rows, &bad_rows}) {
        rng.shuffle(*rows);
        for (std::size_t i = 0; i < rows->size(); ++i)
            out.fold_index[static_cast<std::size_t>((*rows)[i])] =
                static_cast<int>((i + static_cast<std::size_t>(class_offset)) % k);
        ++class_offset;
    }
    return out;
}

CreditDataset bootstrap_sample(const CreditDataset& ds, std::uint64_t seed) {
    if (ds.rows() == 0) throw std::invalid_argument("bootstrap_sample: empty dataset");
    Rng rng(derive_seed(seed, "bootstrap"));
    const Index n = ds.rows();
    std::vector<CaseId> ids(static_cast<std::size_t>(n));
    Matrix f(n, ds.cols());
    std::optional<std::vector<Label>> lab;
    if (ds.has_labels()) lab.emplace(static_cast<std::size_t>(n), Label::Good);
    for (Index i = 0; i < n; ++i) {
        const auto r = static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(n)));
        ids[static_cast<std::size_t>(i)] = i;  // fresh ids keep uniqueness
        f.row(i) = ds.features().row(r);
        if (lab) (*lab)[static_cast<std::size_t>(i)] = ds.labels()[static_cast<std::size_t>(r)];
    }
    return CreditDataset(std::move(ids), std::move(f), std::move(lab));
}

}  // namespace rinfer
