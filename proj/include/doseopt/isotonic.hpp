#pragma once

#include <span>
#include <vector>

namespace doseopt {

// Weighted least-squares nondecreasing fit by pool-adjacent-violators.
// Weights must be positive; an empty input returns an empty fit.
std::vector<double> isotonic_fit(std::span<const double> values, std::span<const double> weights);

}  // namespace doseopt
