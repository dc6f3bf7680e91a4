#include "symq/box.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace symq {

Box::Box(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.empty() || lower.size() != upper.size()) {
    throw std::invalid_argument("box: bounds must be non-empty and of equal dimension");
  }
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i])) {
      throw std::invalid_argument("box: require finite lower < upper on every axis");
    }
  }
}

double Box::diameter() const {
  double d = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) d = std::max(d, width(i));
  return d;
}

bool Box::contains(std::span<const double> point) const {
  if (point.size() != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (!(point[i] >= lower[i] && point[i] <= upper[i])) return false;
  }
  return true;
}

Vec Box::clip(std::span<const double> point) const {
  Vec out(point.begin(), point.end());
  for (std::size_t i = 0; i < out.size() && i < dim(); ++i) {
    out[i] = std::clamp(out[i], lower[i], upper[i]);
  }
  return out;
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double inf_distance(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace symq
