#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pflab/field.hpp"

namespace pflab {

struct AffinePoint {
    FieldElement x, y;

    friend bool operator==(const AffinePoint& a, const AffinePoint& b) {
        return a.x == b.x && a.y == b.y;
    }
    /// Canonical order: lexicographic on (x, y) residues.
    friend bool operator<(const AffinePoint& a, const AffinePoint& b) {
        if (a.x != b.x) return a.x < b.x;
        return a.y < b.y;
    }
};

/// An affine line a*x + b*y + c = 0 in canonical form: a = 1, or a = 0 and
/// b = 1. Lines are value types; equal lines compare equal.
struct Line {
    FieldElement a, b, c;

    /// Injective key: b*p + c for non-vertical-coefficient form a = 1,
    /// p^2 + c for a = 0. Used for ordering and hashing.
    std::uint64_t key() const {
        std::uint64_t p = a.modulus();
        if (a.value() == 1) return std::uint64_t(b.value()) * p + c.value();
        return p * p + c.value();
    }
    friend bool operator==(const Line& l, const Line& r) {
        return l.a == r.a && l.b == r.b && l.c == r.c;
    }
    friend bool operator<(const Line& l, const Line& r) { return l.key() < r.key(); }
};

/// A point of P^2(F_p) in canonical form: leftmost nonzero coordinate is 1.
struct ProjPoint {
    FieldElement x, y, z;

    /// Injective key over the canonical forms: [1:y:z] -> y*p + z,
    /// [0:1:z] -> p^2 + z, [0:0:1] -> p^2 + p. Ascending key order is the
    /// canonical scan order used for deterministic frame completion.
    std::uint64_t key() const {
        std::uint64_t p = x.modulus();
        if (x.value() == 1) return std::uint64_t(y.value()) * p + z.value();
        if (y.value() == 1) return p * p + z.value();
        return p * p + p;
    }
    friend bool operator==(const ProjPoint& a, const ProjPoint& b) {
        return a.x == b.x && a.y == b.y && a.z == b.z;
    }
    friend bool operator<(const ProjPoint& a, const ProjPoint& b) {
        return a.key() < b.key();
    }
};

/// A line of P^2(F_p) by homogeneous coefficients, same canonical form and
/// key scheme as ProjPoint.
struct ProjLine {
    FieldElement a, b, c;

    std::uint64_t key() const {
        std::uint64_t p = a.modulus();
        if (a.value() == 1) return std::uint64_t(b.value()) * p + c.value();
        if (b.value() == 1) return p * p + c.value();
        return p * p + p;
    }
    friend bool operator==(const ProjLine& l, const ProjLine& r) {
        return l.a == r.a && l.b == r.b && l.c == r.c;
    }
    friend bool operator<(const ProjLine& l, const ProjLine& r) {
        return l.key() < r.key();
    }
};

/// Invertible 3x3 matrix over F_p acting on P^2, stored row-major.
struct ProjectiveMap {
    std::array<FieldElement, 9> m;
};

/// Canonicalize homogeneous coordinates (leftmost nonzero becomes 1).
/// Throws DegenerateMapError on the zero triple.
ProjPoint make_proj_point(FieldElement x, FieldElement y, FieldElement z);
ProjLine make_proj_line(FieldElement a, FieldElement b, FieldElement c);

/// Canonical affine line through two distinct points.
/// The result is independent of argument order.
Line line_through(const AffinePoint& p, const AffinePoint& q);
bool on_line(const AffinePoint& p, const Line& l);

/// Line of P^2 through two distinct points (cross product, canonicalized).
ProjLine proj_line_through(const ProjPoint& p, const ProjPoint& q);
bool on_proj_line(const ProjPoint& p, const ProjLine& l);

/// [x : y : 1], canonicalized.
ProjPoint embed_affine(const AffinePoint& p);
/// Projective closure of an affine line (same coefficient triple).
ProjLine embed_line(const Line& l);

ProjPoint apply_map(const ProjectiveMap& m, const ProjPoint& p);
/// Image line under m: coefficients transform by the inverse transpose, so
/// incidence is preserved exactly.
ProjLine apply_map_line(const ProjectiveMap& m, const ProjLine& l);
ProjectiveMap inverse(const ProjectiveMap& m);
ProjectiveMap compose(const ProjectiveMap& f, const ProjectiveMap& g);  // f o g

/// A projective map sending pbar to [0:1:0] and ptil to [1:0:0]. The frame
/// is completed deterministically: the third point is the first point in
/// canonical scan order not collinear with {pbar, ptil}; the fourth (sent to
/// the unit point [1:1:1]) is the first point off the three base lines.
/// Throws CoincidentPointsError when pbar = ptil.
ProjectiveMap map_to_infinity(const ProjPoint& pbar, const ProjPoint& ptil);

/// All p^2 + p + 1 points / lines of P^2(F_p) in canonical scan order.
std::vector<ProjPoint> all_proj_points(const PrimeField& f);
std::vector<ProjLine> all_proj_lines(const PrimeField& f);
/// All p^2 + p affine lines, sorted by key.
std::vector<Line> all_affine_lines(const PrimeField& f);
/// The p + 1 points of a projective line, in canonical scan order.
std::vector<ProjPoint> points_on_proj_line(const ProjLine& l);

}  // namespace pflab
