#pragma once

#include <vector>

#include "ewc/measure.hpp"

namespace ewc {

// Ordered family of pairwise disjoint bounded cells A_0 < A_1 < ... < A_{t-1}.
// All integrands in this library are constant on products of grid cells.
class Grid {
  public:
    explicit Grid(std::vector<Interval> cells);

    int size() const { return static_cast<int>(cells_.size()); }
    const Interval& cell(int i) const { return cells_.at(static_cast<std::size_t>(i)); }
    const std::vector<Interval>& cells() const { return cells_; }

    bool operator==(const Grid& other) const;

    // Index of the cell containing x, or -1.
    int locate(double x) const;

    // Largest interval covered by the grid (cells need not be contiguous).
    double span_end() const { return cells_.back().hi; }

  private:
    std::vector<Interval> cells_;
};

// Common refinement of two grids: the coarsest grid of disjoint cells such
// that every cell of either input is a union of refined cells. `map_a[i]`
// lists the refined indices that tile cell i of `a` (likewise map_b).
struct GridRefinement {
    Grid grid;
    std::vector<std::vector<int>> map_a;
    std::vector<std::vector<int>> map_b;
};

GridRefinement refine(const Grid& a, const Grid& b);

}  // namespace ewc
