#include "symq/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace symq {

namespace {

// ceil(width / spacing), treating ratios within a few ulps of an integer as
// that integer (1.8 / 0.45 must give 4 cells, not 5).
std::size_t cell_count(double width, double spacing) {
  const double q = width / spacing;
  const double r = std::round(q);
  if (std::abs(q - r) <= 1e-9 * std::max(1.0, r)) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(q));
}

void finish(GridPartition& g) {
  g.total_cells = 1;
  for (std::size_t n : g.cells_per_axis) {
    if (n == 0) throw std::invalid_argument("grid: every axis needs at least one cell");
    if (g.total_cells > std::numeric_limits<CellId>::max() / n) {
      throw std::invalid_argument("grid: too many cells");
    }
    g.total_cells *= n;
  }
}

}  // namespace

double GridPartition::max_spacing() const { return *std::max_element(spacing.begin(), spacing.end()); }

double GridPartition::min_spacing() const { return *std::min_element(spacing.begin(), spacing.end()); }

double GridPartition::cell_lower(std::size_t axis, std::size_t j) const {
  return box.lower[axis] + static_cast<double>(j) * spacing[axis];
}

double GridPartition::cell_upper(std::size_t axis, std::size_t j) const {
  if (j + 1 == cells_per_axis[axis]) return box.upper[axis];
  return std::min(box.lower[axis] + static_cast<double>(j + 1) * spacing[axis], box.upper[axis]);
}

std::vector<std::size_t> GridPartition::multi_index(CellId id) const {
  std::vector<std::size_t> m(dim());
  std::size_t rest = id;
  for (std::size_t i = dim(); i-- > 0;) {
    m[i] = rest % cells_per_axis[i];
    rest /= cells_per_axis[i];
  }
  return m;
}

CellId GridPartition::flat_index(std::span<const std::size_t> multi) const {
  std::size_t id = 0;
  for (std::size_t i = 0; i < dim(); ++i) id = id * cells_per_axis[i] + multi[i];
  return static_cast<CellId>(id);
}

Box GridPartition::cell_box(CellId id) const {
  const auto m = multi_index(id);
  Vec lo(dim()), hi(dim());
  for (std::size_t i = 0; i < dim(); ++i) {
    lo[i] = cell_lower(i, m[i]);
    hi[i] = cell_upper(i, m[i]);
  }
  return Box(std::move(lo), std::move(hi));
}

std::optional<std::pair<std::size_t, std::size_t>> GridPartition::axis_overlap(std::size_t axis,
                                                                               double lo,
                                                                               double hi) const {
  const std::size_t n = cells_per_axis[axis];
  if (hi < box.lower[axis] || lo > box.upper[axis] || lo > hi) return std::nullopt;
  // Estimate with floor, then settle against the exact cell bounds so the
  // result agrees with a brute-force scan using the same predicate.
  const auto estimate = [&](double x) {
    const double q = std::floor((x - box.lower[axis]) / spacing[axis]);
    return static_cast<std::size_t>(std::clamp(q, 0.0, static_cast<double>(n - 1)));
  };
  std::size_t first = estimate(lo);
  while (first > 0 && cell_upper(axis, first - 1) >= lo) --first;
  while (first + 1 < n && cell_upper(axis, first) < lo) ++first;
  std::size_t last = estimate(hi);
  while (last + 1 < n && cell_lower(axis, last + 1) <= hi) ++last;
  while (last > 0 && cell_lower(axis, last) > hi) --last;
  if (first > last) return std::nullopt;
  return std::pair{first, last};
}

bool GridPartition::operator==(const GridPartition& other) const {
  return box.lower == other.box.lower && box.upper == other.box.upper && spacing == other.spacing &&
         cells_per_axis == other.cells_per_axis;
}

GridPartition build_grid(const Box& box, const Vec& spacing) {
  if (spacing.size() != box.dim()) throw std::invalid_argument("grid: spacing dimension mismatch");
  GridPartition g;
  g.box = box;
  g.spacing = spacing;
  for (std::size_t i = 0; i < box.dim(); ++i) {
    if (!(spacing[i] > 0.0) || !std::isfinite(spacing[i])) {
      throw std::invalid_argument("grid: spacing must be positive (axis " + std::to_string(i) + ")");
    }
    if (spacing[i] > box.width(i) * (1.0 + 1e-12)) {
      throw std::invalid_argument("grid: spacing exceeds box width (axis " + std::to_string(i) + ")");
    }
    g.cells_per_axis.push_back(cell_count(box.width(i), spacing[i]));
  }
  finish(g);
  return g;
}

GridPartition build_grid_with_counts(const Box& box, const std::vector<std::size_t>& counts) {
  if (counts.size() != box.dim()) throw std::invalid_argument("grid: count dimension mismatch");
  GridPartition g;
  g.box = box;
  g.cells_per_axis = counts;
  for (std::size_t i = 0; i < box.dim(); ++i) {
    if (counts[i] == 0) throw std::invalid_argument("grid: cell count must be >= 1");
    g.spacing.push_back(box.width(i) / static_cast<double>(counts[i]));
  }
  finish(g);
  return g;
}

GridPartition build_level_grid(const Box& box, const std::vector<std::size_t>& counts) {
  if (counts.size() != box.dim()) throw std::invalid_argument("grid: count dimension mismatch");
  Vec lo(box.dim()), hi(box.dim());
  GridPartition g;
  for (std::size_t i = 0; i < box.dim(); ++i) {
    if (counts[i] < 2) throw std::invalid_argument("grid: level encoding needs >= 2 levels");
    const double h = box.width(i) / static_cast<double>(counts[i] - 1);
    lo[i] = box.lower[i] - 0.5 * h;
    hi[i] = box.upper[i] + 0.5 * h;
    g.spacing.push_back(h);
  }
  g.box = Box(std::move(lo), std::move(hi));
  g.cells_per_axis = counts;
  finish(g);
  return g;
}

CellId quantize(const GridPartition& grid, std::span<const double> point) {
  if (point.size() != grid.dim()) throw std::invalid_argument("quantize: dimension mismatch");
  if (!grid.box.contains(point)) throw std::domain_error("quantize: point outside the grid box");
  std::size_t id = 0;
  for (std::size_t i = 0; i < grid.dim(); ++i) {
    const std::size_t n = grid.cells_per_axis[i];
    const double q = std::floor((point[i] - grid.box.lower[i]) / grid.spacing[i]);
    auto j = static_cast<std::size_t>(std::clamp(q, 0.0, static_cast<double>(n - 1)));
    while (j > 0 && point[i] < grid.cell_lower(i, j)) --j;
    while (j + 1 < n && point[i] >= grid.cell_lower(i, j + 1)) ++j;
    id = id * n + j;
  }
  return static_cast<CellId>(id);
}

Vec cell_center(const GridPartition& grid, CellId id) {
  if (id >= grid.total_cells) throw std::invalid_argument("cell_center: cell id out of range");
  const auto m = grid.multi_index(id);
  Vec c(grid.dim());
  for (std::size_t i = 0; i < grid.dim(); ++i) {
    c[i] = 0.5 * (grid.cell_lower(i, m[i]) + grid.cell_upper(i, m[i]));
  }
  return c;
}

}  // namespace symq
