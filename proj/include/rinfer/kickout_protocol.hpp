// Kickout evaluation protocol: compares the applicant pool a scorer accepts
// before and after reject inference, without needing reject labels.
#pragma once

#include "rinfer/dataset.hpp"
#include "rinfer/gbt.hpp"
#include "rinfer/strategies.hpp"
#include "rinfer/types.hpp"

#include <cstdint>
#include <optional>

namespace rinfer {

struct KickoutProtocolConfig {
    // A cut at half the pool sits inside the accept book's score range, so
    // ranking changes show up as kicked cases instead of vanishing in the
    // slack between the accept holdout and the larger joint holdout.
    Scalar mu = 0.5;            // acceptance rate applied to both holdout pools
    Scalar accept_split = 0.5;  // share of accepts used for training
    Scalar reject_split = 0.5;  // share of rejects handed to the strategy
    GbtParams scorer;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Runs the protocol: C1 trained on the accept-train split selects pool A1
/// from the accept holdout; the strategy augments the training data, C2 is
/// trained on it and selects A2 from the joint accept+reject holdout; the
/// kickout score is computed from the known labels of A1 \ A2.
/// Returns nullopt when the measure is undefined (A1 with zero or only bad
/// cases). Degenerate splits and strategy failures throw.
std::optional<Scalar> kickout_protocol(const PartitionedData& partition,
                                       const StrategySpec& strategy,
                                       const KickoutProtocolConfig& cfg);

}  // namespace rinfer
