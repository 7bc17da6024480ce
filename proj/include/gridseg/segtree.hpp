#pragma once

#include <array>
#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridseg/estimator.hpp"
#include "gridseg/grid.hpp"

namespace gridseg {

/// Position in the hierarchy as a digit sequence (i_1, ..., i_l), digits 1..4.
/// The empty sequence is the root.
struct HierIndex {
  std::vector<int> digits;

  int level() const { return static_cast<int>(digits.size()); }
  HierIndex child(int quadrant) const;
  /// Digits concatenated, e.g. "213"; empty for the root.
  std::string str() const;

  friend auto operator<=>(const HierIndex&, const HierIndex&) = default;
  friend bool operator==(const HierIndex&, const HierIndex&) = default;
};

/// m in 1..4^level to digits: big-endian base-4 expansion of m-1 with each digit +1.
HierIndex index_finder(int level, long long m);
/// Inverse of index_finder for the index's own level.
long long index_finder_inverse(const HierIndex& index);

/// Quadrant split of `domain` at a change point in the domain's local
/// coordinates. Absent entries are empty; at the double boundary only Q3 remains.
std::array<std::optional<Rect>, kQuadrants> child_domains(const Rect& domain, ChangePoint local_cp);

struct SegNode {
  HierIndex index;
  Rect domain;
  /// Local to `domain`; the local double boundary marks a terminal node.
  ChangePoint cp;
  /// False for nodes closed without running the estimator (too small or too deep).
  bool estimated = false;
  std::array<std::optional<HierIndex>, kQuadrants> children;

  bool is_leaf() const;
  bool has_change() const { return !is_double_boundary(domain.dims(), cp); }
  ChangePoint global_cp() const { return {domain.w_lo - 1 + cp.w, domain.h_lo - 1 + cp.h}; }
};

struct SegTree {
  GridDims dims;
  std::map<HierIndex, SegNode> nodes;

  std::vector<const SegNode*> leaves() const;
  std::size_t change_point_count() const;
};

struct SegmentationConfig {
  ThresholdConfig threshold = ThresholdConfig::standard();
  double c_bic = 1.0;
  /// Rectangles with fewer cells, or narrower than 4 on either axis, become leaves unestimated.
  int min_cells = 16;
  /// Nodes deeper than this are not estimated.
  int max_level = 20;

  void validate() const;
};

/// Recursive quadrant splitting with boundary selection, processed level by level.
SegTree quarterly_segmentation(const Grid& grid, const SegmentationConfig& config);

/// Replaces each cell with the mean of its leaf rectangle.
Grid reconstruct_means(const Grid& grid, const SegTree& tree);

struct TreeReport {
  /// Depth of the deepest node carrying a change; absent when there is none.
  std::optional<int> hierarchy_level;
  /// Depth of the deepest leaf.
  int depth = 0;
  std::size_t cp_count = 0;
  std::size_t leaf_count = 0;
  /// Change points in grid coordinates, in index order.
  std::vector<std::pair<HierIndex, ChangePoint>> change_points;
};

TreeReport tree_report(const SegTree& tree);

}  // namespace gridseg
