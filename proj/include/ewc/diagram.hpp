#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "ewc/integrand.hpp"

namespace ewc {

// Partial matching between a row of k1 vertices and a row of k2 vertices.
// Edges are (left slot, right slot), 0-based, at most one edge per vertex;
// canonical form keeps edges sorted by left slot.
struct Diagram {
    int k1 = 0;
    int k2 = 0;
    std::vector<std::pair<int, int>> edges;

    int l() const { return static_cast<int>(edges.size()); }
};

// Diagram with a distinguished edge subset N1 (the "colored" edges, whose
// merged variables get integrated out).
struct ColoredDiagram {
    Diagram diagram;
    std::vector<int> colored;  // indices into diagram.edges, ascending

    int p() const { return static_cast<int>(colored.size()); }
};

// Closed-form |B(l, k1, k2)| and |B(l, p, k1, k2)|.
std::uint64_t diagram_count(int k1, int k2, int l);
std::uint64_t colored_diagram_count(int k1, int k2, int l, int p);

// Exhaustive duplicate-free enumerations, deterministic order. Results are
// memoized behind an internal lock (enumeration is pure).
std::shared_ptr<const std::vector<Diagram>> enumerate_diagrams(int k1, int k2, int l);
std::shared_ptr<const std::vector<ColoredDiagram>> enumerate_colored_diagrams(int k1, int k2, int l,
                                                                              int p);

// (f tensor g) with paired arguments identified per the diagram's edges.
// Inputs are refined to a common grid internally. Output variable order:
// left slots 0..k1-1, then unmatched right slots in their original order.
CellwiseFunction contract(const CellwiseFunction& f, const CellwiseFunction& g, const Diagram& d);

// As `contract`, but each colored edge's merged variable is integrated out
// against the given measure (multiply by the cell mass, drop the slot).
CellwiseFunction contract_integrated(const CellwiseFunction& f, const CellwiseFunction& g,
                                     const ColoredDiagram& cd, const TriangularArraySchedule& sched,
                                     MeasureKind kind, std::int64_t n = 0);

// Mean over all colored diagrams with |N|=l, |N1|=p, integrating colored
// edges against P_n.
CellwiseFunction averaged_contraction(const CellwiseFunction& f, const CellwiseFunction& g, int l,
                                      int p, std::int64_t n, const TriangularArraySchedule& sched);

// Number of partitions of {1..k} (k = sum of parts) into blocks with the
// given multiset of cardinalities. Exact integer arithmetic.
std::uint64_t set_partition_count(const std::vector<int>& parts);

// Normalization coefficient B_{n,k} in the exact mean formula: a signed sum
// over block-size multisets of k into s parts weighted by (r_1-1)...(r_s-1)
// times the set-partition counts, scaled by C(n,s) s! / (k! n^{k/2}). Parts
// equal to 1 carry weight zero and are skipped. B_{n,0} = 1. Cross-checked in
// the tests against the single-cell binomial factorial-moment identity.
double b_coeff(std::int64_t n, int k);

// E I_k^(n)(f) = k! B_{n,k} (n/a_n)^{k/2} P_n^k(f).
double exact_mean(const CellwiseFunction& f, std::int64_t n, const TriangularArraySchedule& sched);

// Bilinear form F_l^(n)(f,g) = (n/a_n)^{(k1+k2)/2} P_n^{k1+k2-l-p}( averaged
// contraction over B(l,p) ); the value does not depend on p. Defaults to the
// fully integrated route p = l.
double f_bilinear(const CellwiseFunction& f, const CellwiseFunction& g, int l, std::int64_t n,
                  const TriangularArraySchedule& sched, int p = -1);

// One term of the product decomposition of I_{k1}^(n)(f) I_{k2}^(n)(g):
//   coefficient * I^{(n)}_{k1+k2-l-p}(integrand)
// with coefficient = (n/a_n)^{(l+p)/2} |B(l,p)| n^{-(l-p)/2}. All integrands
// share one common grid.
struct ProductExpansionTerm {
    int l = 0;
    int p = 0;
    std::uint64_t count = 0;
    double coefficient = 0.0;
    CellwiseFunction integrand;
};

std::vector<ProductExpansionTerm> product_expansion(const CellwiseFunction& f,
                                                    const CellwiseFunction& g, std::int64_t n,
                                                    const TriangularArraySchedule& sched);

// E[ I_{k1}^(n)(f) I_{k2}^(n)(g) ] exactly, by taking expectations term-wise
// in the product decomposition.
double exact_cross_moment(const CellwiseFunction& f, const CellwiseFunction& g, std::int64_t n,
                          const TriangularArraySchedule& sched);

}  // namespace ewc
