#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "symq/box.hpp"

namespace symq {

/// Row-major flat index of a grid cell (axis 0 varies slowest).
using CellId = std::uint32_t;

/// Uniform axis-aligned partition of a box. Cell j on axis i is
/// [lower_i + j*spacing_i, min(lower_i + (j+1)*spacing_i, upper_i)]; the last
/// cell of an axis is truncated at the box edge when the width is not a
/// multiple of the spacing.
struct GridPartition {
  Box box;
  Vec spacing;
  std::vector<std::size_t> cells_per_axis;
  std::size_t total_cells = 0;

  std::size_t dim() const { return box.dim(); }
  double max_spacing() const;
  double min_spacing() const;

  double cell_lower(std::size_t axis, std::size_t j) const;
  double cell_upper(std::size_t axis, std::size_t j) const;

  std::vector<std::size_t> multi_index(CellId id) const;
  CellId flat_index(std::span<const std::size_t> multi) const;
  Box cell_box(CellId id) const;

  /// Indices [first, last] of the cells on `axis` whose closed interval meets
  /// [lo, hi]; nullopt when none does.
  std::optional<std::pair<std::size_t, std::size_t>> axis_overlap(std::size_t axis, double lo,
                                                                  double hi) const;

  bool operator==(const GridPartition& other) const;
};

/// Cells of side `spacing` covering `box`. Throws std::invalid_argument for a
/// non-positive spacing or one larger than the box width.
GridPartition build_grid(const Box& box, const Vec& spacing);

/// Exactly `counts[i]` equal cells per axis.
GridPartition build_grid_with_counts(const Box& box, const std::vector<std::size_t>& counts);

/// `counts[i]` cells per axis whose centers are the evenly spaced levels
/// lower_i, ..., upper_i (counts[i] >= 2). The partition's box extends half a
/// spacing past each end of `box`.
GridPartition build_level_grid(const Box& box, const std::vector<std::size_t>& counts);

/// The cell containing `point`. Cells are closed below and open above,
/// except that the box maximum belongs to the last cell. Throws
/// std::domain_error for points outside the box.
CellId quantize(const GridPartition& grid, std::span<const double> point);

/// Midpoint of the cell on every axis. Throws std::invalid_argument for an
/// out-of-range id.
Vec cell_center(const GridPartition& grid, CellId id);

}  // namespace symq
