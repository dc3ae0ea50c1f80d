#pragma once

#include "leakmeter/bayes.hpp"
#include "leakmeter/distribution.hpp"
#include "leakmeter/error.hpp"
#include "leakmeter/information.hpp"
#include "leakmeter/measures.hpp"
#include "leakmeter/numeric.hpp"
#include "leakmeter/sampling.hpp"
#include "leakmeter/scenario.hpp"
#include "leakmeter/stats.hpp"

namespace leakmeter {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace leakmeter
