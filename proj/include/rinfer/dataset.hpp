// Dataset representation, splitting and resampling primitives.
#pragma once

#include "rinfer/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rinfer {

/// Immutable feature matrix with case identifiers and optional labels.
class CreditDataset {
public:
    CreditDataset() = default;

    /// Throws std::invalid_argument on duplicate ids, non-finite features
    /// or a label sequence whose length does not match the row count.
    CreditDataset(std::vector<CaseId> ids, Matrix features,
                  std::optional<std::vector<Label>> labels = std::nullopt);

    Index rows() const { return features_.rows(); }
    Index cols() const { return features_.cols(); }
    std::size_t size() const { return ids_.size(); }

    const Matrix& features() const { return features_; }
    const std::vector<CaseId>& ids() const { return ids_; }

    bool has_labels() const { return labels_.has_value(); }
    /// Throws std::logic_error when labels are absent.
    const std::vector<Label>& labels() const;

    Index bad_count() const;
    Scalar bad_rate() const;

    /// Rows selected by position, order preserved, labels carried along.
    CreditDataset subset(const std::vector<Index>& row_indices) const;
    CreditDataset without_labels() const;
    CreditDataset with_labels(std::vector<Label> labels) const;

    /// Row-wise concatenation. Ids must stay unique across both parts.
    static CreditDataset concat(const CreditDataset& a, const CreditDataset& b);

private:
    std::vector<CaseId> ids_;
    Matrix features_;
    std::optional<std::vector<Label>> labels_;
};

/// Ground-truth labels hidden from the strategy-facing API. Contents are
/// only reachable through OracleAccess, which evaluation code uses.
class SealedLabels {
public:
    SealedLabels() = default;
    static SealedLabels seal(std::vector<CaseId> ids, std::vector<Label> labels);
    bool empty() const { return ids_.empty(); }
    std::size_t size() const { return ids_.size(); }

private:
    friend struct OracleAccess;
    std::vector<CaseId> ids_;
    std::vector<Label> labels_;
};

struct OracleAccess {
    static const std::vector<CaseId>& ids(const SealedLabels& s) { return s.ids_; }
    static const std::vector<Label>& labels(const SealedLabels& s) { return s.labels_; }
    static Scalar bad_rate(const SealedLabels& s);
    /// Joins sealed labels back onto a dataset by case id.
    static CreditDataset unseal(const CreditDataset& ds, const SealedLabels& s);
};

/// Accepts (labeled), rejects (labels absent or sealed) and the unbiased
/// holdout that represents the through-the-door population.
struct PartitionedData {
    CreditDataset accepts;
    CreditDataset rejects;
    CreditDataset unbiased;
    SealedLabels reject_labels;  // empty unless produced by the generator

    /// Checks pairwise-disjoint ids, labeled accepts/unbiased with both
    /// classes in accepts, and label-free rejects.
    void validate() const;
};

struct FoldAssignment {
    std::vector<int> fold_index;  // per case, in [0, k)
    int k = 0;

    std::vector<Index> fold_rows(int fold) const;
    std::vector<Index> complement_rows(int fold) const;
};

/// Label-stratified k-fold split; fold sizes differ by at most one within
/// each class. Deterministic for a fixed seed.
FoldAssignment stratified_kfold(const CreditDataset& ds, int k, std::uint64_t seed);

/// n rows drawn with replacement; ids are renumbered 0..n-1 so the result
/// still satisfies the unique-id invariant.
CreditDataset bootstrap_sample(const CreditDataset& ds, std::uint64_t seed);

// ---------------------------------------------------------------------------
// CSV ingest/export. UTF-8, comma separated, header row required.
// ---------------------------------------------------------------------------

struct CsvOptions {
    std::optional<std::string> label_column;  // absent -> unlabeled dataset
    std::optional<std::string> id_column;     // absent -> ids are row numbers
    Scalar bad_value = 1.0;
    Scalar good_value = 0.0;
};

/// Loads a CSV file. Row order is preserved. Errors report row/column.
CreditDataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});

/// Writes "id,<feature names>,label". Feature names are f0..f{d-1}.
void save_csv(const std::filesystem::path& path, const CreditDataset& ds,
              bool include_labels = true);

}  // namespace rinfer
