#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace symq {

using Vec = std::vector<double>;

/// Axis-aligned compact box [lower, upper] in R^n.
struct Box {
  Vec lower;
  Vec upper;

  Box() = default;
  Box(Vec lo, Vec hi);

  std::size_t dim() const { return lower.size(); }
  double width(std::size_t axis) const { return upper[axis] - lower[axis]; }
  double diameter() const;  // infinity-norm diameter
  bool contains(std::span<const double> point) const;
  Vec clip(std::span<const double> point) const;
};

double inf_norm(std::span<const double> v);
double inf_distance(std::span<const double> a, std::span<const double> b);

}  // namespace symq
