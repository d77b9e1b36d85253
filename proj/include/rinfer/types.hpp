// Core scalar and dense-matrix aliases shared across the library.
#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace rinfer {

using Scalar = double;
using Index = Eigen::Index;

using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

using CaseId = std::int64_t;

/// Repayment outcome. Bad (default) is the positive class; every score in
/// the library is a predicted probability of default, so higher = riskier.
enum class Label : std::uint8_t { Good = 0, Bad = 1 };

/// Labels as a 0/1 target vector (Bad = 1).
inline Vector to_targets(const std::vector<Label>& labels) {
    Vector y(static_cast<Index>(labels.size()));
    for (Index i = 0; i < y.size(); ++i)
        y[i] = labels[static_cast<std::size_t>(i)] == Label::Bad ? 1.0 : 0.0;
    return y;
}

inline Scalar sigmoid(Scalar z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const Scalar e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace rinfer
