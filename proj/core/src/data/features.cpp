#include "vc/data/features.hpp"

#include <cmath>
#include <sstream>

#include "vc/errors.hpp"

namespace vc::data {

void validate_box(const Box& b, double width, double height) {
  std::ostringstream os;
  if (!(b.x_tl < b.x_br) || !(b.y_tl < b.y_br))
    os << "degenerate box [" << b.x_tl << "," << b.y_tl << "," << b.x_br << "," << b.y_br << "]";
  else if (b.x_tl < 0 || b.y_tl < 0 || b.x_br > width || b.y_br > height)
    os << "box [" << b.x_tl << "," << b.y_tl << "," << b.x_br << "," << b.y_br << "] outside " << width << "x"
       << height << " image";
  if (!os.str().empty()) throw ValidationError(os.str());
}

std::array<double, 5> spatial_feature(const Box& b, double width, double height) {
  if (!(width > 0) || !(height > 0)) throw ValidationError("image extents must be positive");
  validate_box(b, width, height);
  return {b.x_tl / width, b.y_tl / height, b.x_br / width, b.y_br / height, b.area() / (width * height)};
}

std::vector<double> visdif_feature(std::span<const double> v, std::span<const std::span<const double>> others) {
  std::vector<double> out(v.size(), 0.0);
  if (others.empty()) return out;
  std::vector<double> diff(v.size());
  for (auto o : others) {
    if (o.size() != v.size()) throw DimensionError("visdif: feature dimensions differ");
    double sq = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      diff[k] = v[k] - o[k];
      sq += diff[k] * diff[k];
    }
    const double n = std::sqrt(sq);
    if (n < 1e-8) continue;
    for (std::size_t k = 0; k < v.size(); ++k) out[k] += diff[k] / n;
  }
  for (auto& x : out) x /= static_cast<double>(others.size());
  return out;
}

}  // namespace vc::data
