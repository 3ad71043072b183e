#pragma once

#include <cstdint>
#include <vector>

#include "pflab/addcomb.hpp"
#include "pflab/geometry.hpp"

namespace pflab {

/// Deduplicated affine point set, sorted canonically.
class AffinePointSet {
public:
    AffinePointSet(const PrimeField& field, std::vector<AffinePoint> pts);

    /// Cartesian product A x B as a point set.
    static AffinePointSet grid(const ElementSet& a, const ElementSet& b);

    std::uint32_t modulus() const { return p_; }
    std::size_t size() const { return pts_.size(); }
    const std::vector<AffinePoint>& points() const { return pts_; }
    bool contains(const AffinePoint& q) const;

private:
    std::uint32_t p_;
    std::vector<AffinePoint> pts_;
};

class LineSet {
public:
    LineSet(const PrimeField& field, std::vector<Line> lines);

    std::uint32_t modulus() const { return p_; }
    std::size_t size() const { return lines_.size(); }
    const std::vector<Line>& lines() const { return lines_; }
    bool contains(const Line& l) const;

private:
    std::uint32_t p_;
    std::vector<Line> lines_;
};

class ProjPointSet {
public:
    ProjPointSet(const PrimeField& field, std::vector<ProjPoint> pts);

    std::uint32_t modulus() const { return p_; }
    std::size_t size() const { return pts_.size(); }
    const std::vector<ProjPoint>& points() const { return pts_; }
    bool contains(const ProjPoint& q) const;

private:
    std::uint32_t p_;
    std::vector<ProjPoint> pts_;
};

class ProjLineSet {
public:
    ProjLineSet(const PrimeField& field, std::vector<ProjLine> lines);

    std::uint32_t modulus() const { return p_; }
    std::size_t size() const { return lines_.size(); }
    const std::vector<ProjLine>& lines() const { return lines_; }
    bool contains(const ProjLine& l) const;

private:
    std::uint32_t p_;
    std::vector<ProjLine> lines_;
};

/// Lines spanned by a point set, with the exact number of set points k_l on
/// each line. Entries are sorted by line key.
class LineMultiplicityMap {
public:
    LineMultiplicityMap(const PrimeField& field,
                        std::vector<std::pair<Line, std::uint32_t>> entries);

    std::uint32_t modulus() const { return p_; }
    std::size_t line_count() const { return entries_.size(); }
    const std::vector<std::pair<Line, std::uint32_t>>& entries() const {
        return entries_;
    }
    LineSet lines() const;

private:
    std::uint32_t p_;
    std::vector<std::pair<Line, std::uint32_t>> entries_;
};

/// Lines spanned by P (|P| >= 2) via ordered pair enumeration. Each line's
/// multiplicity k_l is recovered from its ordered pair count m = k(k-1) by
/// integer square root, and the recovery is re-checked as an internal
/// identity.
LineMultiplicityMap spanned_lines(const AffinePointSet& p);
/// Projective variant (pair enumeration over proj_line_through).
std::vector<std::pair<ProjLine, std::uint32_t>> proj_spanned_lines(
    const ProjPointSet& p);

/// Exact incidence count I(P, L). Two independent algorithms (pointwise
/// membership and slope-bucketed intercept hashing) are both run and must
/// agree; disagreement throws InternalCheckError.
std::uint64_t count_incidences(const AffinePointSet& p, const LineSet& l);
std::uint64_t count_incidences(const ProjPointSet& p, const ProjLineSet& l);

// The individual algorithms, exposed for equivalence tests and benchmarks.
std::uint64_t count_incidences_naive(const AffinePointSet& p, const LineSet& l);
std::uint64_t count_incidences_bucketed(const AffinePointSet& p, const LineSet& l);
std::uint64_t count_incidences_naive(const ProjPointSet& p, const ProjLineSet& l);
std::uint64_t count_incidences_bucketed(const ProjPointSet& p, const ProjLineSet& l);

/// Lines of the spanned-line census carrying at least t points of P.
LineSet rich_lines(const AffinePointSet& p, double t);

/// Ordered triples of distinct collinear points, by brute determinant scan.
std::uint64_t collinear_triples_det(const AffinePointSet& p);
/// The same census as sum over lines of k(k-1)(k-2).
std::uint64_t collinear_triples_via_lines(const LineMultiplicityMap& m);

struct BeckDeltaReport {
    std::uint32_t n;             // side of the grid
    std::uint64_t line_count;    // |L(P)|
    double delta_eff;            // (log |L| / log n - 2) / 2
    double theorem1_ratio;       // |L| / |P|^(1 + 1/267)
    bool range_warning;          // set when n >= sqrt(p)
};

/// Requires P to be a grid A x B with |A| = |B| = n >= 2
/// (NotCartesianError otherwise).
BeckDeltaReport beck_delta_effective(const AffinePointSet& p);

}  // namespace pflab
