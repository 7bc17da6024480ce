#include "gridseg/segtree.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace gridseg {

HierIndex HierIndex::child(int quadrant) const {
  if (quadrant < 1 || quadrant > 4) throw std::out_of_range("quadrant digit must be in 1..4");
  HierIndex out = *this;
  out.digits.push_back(quadrant);
  return out;
}

std::string HierIndex::str() const {
  std::string s;
  for (int d : digits) s.push_back(static_cast<char>('0' + d));
  return s;
}

HierIndex index_finder(int level, long long m) {
  if (level < 1 || level > 30) throw std::out_of_range("index_finder: level must be in 1..30");
  const long long count = 1LL << (2 * level);
  if (m < 1 || m > count) {
    throw std::out_of_range("index_finder: m=" + std::to_string(m) + " outside 1.." + std::to_string(count));
  }
  HierIndex out;
  out.digits.assign(static_cast<std::size_t>(level), 1);
  long long r = m - 1;
  for (int i = level - 1; i >= 0; --i) {
    out.digits[static_cast<std::size_t>(i)] = static_cast<int>(r % 4) + 1;
    r /= 4;
  }
  return out;
}

long long index_finder_inverse(const HierIndex& index) {
  long long m = 0;
  for (int d : index.digits) {
    if (d < 1 || d > 4) throw std::out_of_range("hierarchical digit must be in 1..4");
    m = m * 4 + (d - 1);
  }
  return m + 1;
}

std::array<std::optional<Rect>, kQuadrants> child_domains(const Rect& domain, ChangePoint local_cp) {
  return split_rect(domain, local_cp);
}

bool SegNode::is_leaf() const {
  return std::none_of(children.begin(), children.end(), [](const auto& c) { return c.has_value(); });
}

std::vector<const SegNode*> SegTree::leaves() const {
  std::vector<const SegNode*> out;
  for (const auto& [idx, node] : nodes) {
    if (node.is_leaf()) out.push_back(&node);
  }
  return out;
}

std::size_t SegTree::change_point_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const auto& kv) { return kv.second.has_change(); }));
}

void SegmentationConfig::validate() const {
  threshold.validate();
  if (!(c_bic >= 0.0)) throw std::invalid_argument("c_bic must be non-negative");
  if (min_cells < 1) throw std::invalid_argument("min_cells must be positive");
  if (max_level < 0) throw std::invalid_argument("max_level must be non-negative");
}

SegTree quarterly_segmentation(const Grid& grid, const SegmentationConfig& config) {
  config.validate();
  SegTree tree;
  tree.dims = grid.dims();

  std::vector<HierIndex> frontier{HierIndex{}};
  tree.nodes[HierIndex{}] = SegNode{HierIndex{}, Rect{1, grid.tw(), 1, grid.th()}, {grid.tw(), grid.th()}, false, {}};

  for (int level = 0; !frontier.empty(); ++level) {
    std::vector<HierIndex> next;
    for (const auto& idx : frontier) {
      SegNode& node = tree.nodes.at(idx);
      const Rect dom = node.domain;
      const bool estimable = level <= config.max_level && dom.cells() >= static_cast<std::size_t>(config.min_cells) &&
                             dom.width() >= 4 && dom.height() >= 4;
      if (!estimable) continue;

      const Grid sub = grid.subgrid(dom);
      const ChangePoint init = coarse_init(sub, config.threshold);
      node.cp = algorithm2(sub, init, config.threshold, config.c_bic).final_cp;
      node.estimated = true;
      if (!node.has_change()) continue;

      const auto kids = child_domains(dom, node.cp);
      for (int j = 0; j < kQuadrants; ++j) {
        if (!kids[j]) continue;
        const HierIndex cidx = idx.child(j + 1);
        node.children[j] = cidx;
        next.push_back(cidx);
      }
      for (int j = 0; j < kQuadrants; ++j) {
        if (!kids[j]) continue;
        const Rect& r = *kids[j];
        tree.nodes[*node.children[j]] = SegNode{*node.children[j], r, {r.width(), r.height()}, false, {}};
      }
    }
    frontier = std::move(next);
  }
  return tree;
}

Grid reconstruct_means(const Grid& grid, const SegTree& tree) {
  if (tree.dims != grid.dims()) throw std::invalid_argument("tree and grid dimensions differ");
  const int p = grid.p();
  std::vector<int> cover(grid.cells(), 0);
  std::vector<double> out(grid.values().size(), 0.0);
  std::vector<long double> acc(static_cast<std::size_t>(p));
  const auto cell = [&](int w, int h) {
    return static_cast<std::size_t>(w - 1) * static_cast<std::size_t>(grid.th()) + static_cast<std::size_t>(h - 1);
  };
  for (const SegNode* leaf : tree.leaves()) {
    const Rect& r = leaf->domain;
    if (r.cells() == 0 || r.w_lo < 1 || r.h_lo < 1 || r.w_hi > grid.tw() || r.h_hi > grid.th()) {
      throw std::invalid_argument("leaf rectangle outside grid");
    }
    std::fill(acc.begin(), acc.end(), 0.0L);
    for (int w = r.w_lo; w <= r.w_hi; ++w) {
      for (int h = r.h_lo; h <= r.h_hi; ++h) {
        const auto x = grid.at(w, h);
        for (int k = 0; k < p; ++k) acc[k] += x[k];
        ++cover[cell(w, h)];
      }
    }
    std::vector<double> mean(static_cast<std::size_t>(p));
    for (int k = 0; k < p; ++k) mean[k] = static_cast<double>(acc[k] / static_cast<long double>(r.cells()));
    for (int w = r.w_lo; w <= r.w_hi; ++w) {
      for (int h = r.h_lo; h <= r.h_hi; ++h) {
        std::copy(mean.begin(), mean.end(), out.begin() + static_cast<std::ptrdiff_t>(cell(w, h) * p));
      }
    }
  }
  if (std::any_of(cover.begin(), cover.end(), [](int c) { return c != 1; })) {
    throw std::invalid_argument("tree leaves do not partition the grid");
  }
  return Grid(grid.tw(), grid.th(), p, std::move(out));
}

TreeReport tree_report(const SegTree& tree) {
  TreeReport rep;
  for (const auto& [idx, node] : tree.nodes) {
    if (node.is_leaf()) {
      ++rep.leaf_count;
      rep.depth = std::max(rep.depth, idx.level());
    }
    if (node.has_change()) {
      ++rep.cp_count;
      rep.hierarchy_level = std::max(rep.hierarchy_level.value_or(0), idx.level());
      rep.change_points.emplace_back(idx, node.global_cp());
    }
  }
  return rep;
}

}  // namespace gridseg
