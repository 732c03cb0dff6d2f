#include "ewc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ewc {

Grid::Grid(std::vector<Interval> cells) : cells_(std::move(cells)) {
    if (cells_.empty()) throw std::invalid_argument("Grid: need at least one cell");
    for (const Interval& c : cells_) {
        if (!(c.lo >= 0.0) || !(c.hi > c.lo) || !std::isfinite(c.hi))
            throw std::invalid_argument("Grid: cells must be bounded with 0 <= lo < hi");
    }
    for (std::size_t i = 0; i + 1 < cells_.size(); ++i) {
        if (!(cells_[i].hi <= cells_[i + 1].lo))
            throw std::invalid_argument("Grid: cells must be sorted and pairwise disjoint");
    }
}

bool Grid::operator==(const Grid& other) const {
    if (cells_.size() != other.cells_.size()) return false;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        if (cells_[i].lo != other.cells_[i].lo || cells_[i].hi != other.cells_[i].hi) return false;
    }
    return true;
}

int Grid::locate(double x) const {
    auto it = std::upper_bound(cells_.begin(), cells_.end(), x,
                               [](double v, const Interval& c) { return v < c.hi; });
    if (it == cells_.end() || !it->contains(x)) return -1;
    return static_cast<int>(it - cells_.begin());
}

GridRefinement refine(const Grid& a, const Grid& b) {
    if (a == b) {
        GridRefinement r{a, {}, {}};
        r.map_a.resize(static_cast<std::size_t>(a.size()));
        r.map_b.resize(static_cast<std::size_t>(b.size()));
        for (int i = 0; i < a.size(); ++i) r.map_a[static_cast<std::size_t>(i)] = {i};
        for (int i = 0; i < b.size(); ++i) r.map_b[static_cast<std::size_t>(i)] = {i};
        return r;
    }

    std::vector<double> pts;
    for (const Interval& c : a.cells()) {
        pts.push_back(c.lo);
        pts.push_back(c.hi);
    }
    for (const Interval& c : b.cells()) {
        pts.push_back(c.lo);
        pts.push_back(c.hi);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    std::vector<Interval> cells;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double mid = 0.5 * (pts[i] + pts[i + 1]);
        if (a.locate(mid) >= 0 || b.locate(mid) >= 0) cells.push_back({pts[i], pts[i + 1]});
    }
    Grid refined(std::move(cells));

    auto build_map = [&](const Grid& g) {
        std::vector<std::vector<int>> map(static_cast<std::size_t>(g.size()));
        for (int j = 0; j < refined.size(); ++j) {
            const double mid = 0.5 * (refined.cell(j).lo + refined.cell(j).hi);
            const int i = g.locate(mid);
            if (i >= 0) map[static_cast<std::size_t>(i)].push_back(j);
        }
        return map;
    };
    GridRefinement r{refined, build_map(a), build_map(b)};
    return r;
}

}  // namespace ewc
