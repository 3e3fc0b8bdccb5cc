#pragma once

#include <array>
#include <span>
#include <vector>

namespace vc::data {

// Pixel box given by its top-left and bottom-right corners.
struct Box {
  double x_tl = 0, y_tl = 0, x_br = 0, y_br = 0;

  double width() const { return x_br - x_tl; }
  double height() const { return y_br - y_tl; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x_tl + x_br); }
  double center_y() const { return 0.5 * (y_tl + y_br); }

  friend bool operator==(const Box&, const Box&) = default;
};

// Throws ValidationError unless the box is non-degenerate and inside a
// width x height image.
void validate_box(const Box& box, double width, double height);

// [x_tl/W, y_tl/H, x_br/W, y_br/H, w*h/(W*H)].
std::array<double, 5> spatial_feature(const Box& box, double width, double height);

// Mean of unit difference vectors (v - v_j)/||v - v_j|| over `others`.
// Pairs closer than 1e-8 contribute nothing; an empty comparison set gives
// the zero vector.
std::vector<double> visdif_feature(std::span<const double> v, std::span<const std::span<const double>> others);

}  // namespace vc::data
