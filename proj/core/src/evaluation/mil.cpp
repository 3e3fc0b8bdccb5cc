#include "vc/evaluation/mil.hpp"

#include <algorithm>
#include <cmath>

#include "vc/errors.hpp"

namespace vc::evaluation {

double mil_maxpool_score(std::span<const double> joint, double floor) {
  if (joint.empty()) throw DomainError("mil_maxpool_score: no context candidates");
  return std::log(std::max(*std::max_element(joint.begin(), joint.end()), floor));
}

double mil_noisyor_score(std::span<const double> probs, double floor) {
  if (probs.empty()) throw DomainError("mil_noisyor_score: no context candidates");
  double none = 1.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("mil_noisyor_score: probability outside [0, 1]");
    none *= 1.0 - p;
  }
  return std::log(std::max(1.0 - none, floor));
}

}  // namespace vc::evaluation
