// Debug dumps of fitted models as versioned JSON. Not a stability contract:
// the layout may change between versions.
#pragma once

#include "rinfer/gbt.hpp"
#include "rinfer/logistic.hpp"

#include <string>

namespace rinfer {

inline constexpr int kModelDumpVersion = 1;

std::string dump_model_json(const L1LogisticModel& model);
std::string dump_model_json(const GbtModel& model);

}  // namespace rinfer
