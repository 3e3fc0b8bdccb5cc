#pragma once

#include <span>

namespace vc::evaluation {

inline constexpr double kMilFloor = 1e-12;

// log max_z p(x, z), floored at log(floor).
double mil_maxpool_score(std::span<const double> joint, double floor = kMilFloor);

// log(1 - prod_z (1 - p(x, z))), floored at log(floor). Throws DomainError
// for probabilities outside [0, 1].
double mil_noisyor_score(std::span<const double> probs, double floor = kMilFloor);

}  // namespace vc::evaluation
