#include "pflab/geometry.hpp"

#include <algorithm>

#include "pflab/errors.hpp"

namespace pflab {

namespace {

/// Scale a homogeneous triple so its leftmost nonzero entry is 1.
/// Returns false when all three entries are zero.
bool canonicalize(FieldElement& a, FieldElement& b, FieldElement& c) {
    if (!a.is_zero()) {
        FieldElement s = a.inverse();
        a = s * a;
        b = s * b;
        c = s * c;
        return true;
    }
    if (!b.is_zero()) {
        FieldElement s = b.inverse();
        b = s * b;
        c = s * c;
        return true;
    }
    if (!c.is_zero()) {
        c = c.inverse() * c;
        return true;
    }
    return false;
}

/// 3x3 determinant, row-major.
FieldElement det3(const std::array<FieldElement, 9>& m) {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) -
           m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
}

/// The i-th point of P^2(F_p) in canonical scan order, i < p^2 + p + 1.
ProjPoint scan_point(const PrimeField& f, std::uint64_t i) {
    const std::uint64_t p = f.modulus();
    if (i < p * p) return ProjPoint{f.one(), f(i / p), f(i % p)};
    if (i < p * p + p) return ProjPoint{f.zero(), f.one(), f(i - p * p)};
    return ProjPoint{f.zero(), f.zero(), f.one()};
}

}  // namespace

ProjPoint make_proj_point(FieldElement x, FieldElement y, FieldElement z) {
    if (!canonicalize(x, y, z))
        throw DegenerateMapError("zero triple is not a projective point");
    return ProjPoint{x, y, z};
}

ProjLine make_proj_line(FieldElement a, FieldElement b, FieldElement c) {
    if (!canonicalize(a, b, c))
        throw DegenerateMapError("zero triple is not a projective line");
    return ProjLine{a, b, c};
}

Line line_through(const AffinePoint& p, const AffinePoint& q) {
    if (p.x.modulus() != q.x.modulus())
        throw FieldMismatchError("points over different fields");
    if (p == q) throw CoincidentPointsError("line through coincident points");
    FieldElement a = p.y - q.y;
    FieldElement b = q.x - p.x;
    FieldElement c = p.x * q.y - q.x * p.y;
    // Distinct points never yield a = b = 0, so canonicalize via a or b.
    if (!a.is_zero()) {
        FieldElement s = a.inverse();
        return Line{s * a, s * b, s * c};
    }
    FieldElement s = b.inverse();
    return Line{a, s * b, s * c};
}

bool on_line(const AffinePoint& p, const Line& l) {
    return (l.a * p.x + l.b * p.y + l.c).is_zero();
}

ProjLine proj_line_through(const ProjPoint& p, const ProjPoint& q) {
    if (p == q) throw CoincidentPointsError("projective line through coincident points");
    FieldElement a = p.y * q.z - p.z * q.y;
    FieldElement b = p.z * q.x - p.x * q.z;
    FieldElement c = p.x * q.y - p.y * q.x;
    return make_proj_line(a, b, c);
}

bool on_proj_line(const ProjPoint& p, const ProjLine& l) {
    return (l.a * p.x + l.b * p.y + l.c * p.z).is_zero();
}

ProjPoint embed_affine(const AffinePoint& p) {
    PrimeField f(p.x.modulus());
    return make_proj_point(p.x, p.y, f.one());
}

ProjLine embed_line(const Line& l) { return make_proj_line(l.a, l.b, l.c); }

ProjPoint apply_map(const ProjectiveMap& m, const ProjPoint& p) {
    FieldElement x = m.m[0] * p.x + m.m[1] * p.y + m.m[2] * p.z;
    FieldElement y = m.m[3] * p.x + m.m[4] * p.y + m.m[5] * p.z;
    FieldElement z = m.m[6] * p.x + m.m[7] * p.y + m.m[8] * p.z;
    return make_proj_point(x, y, z);
}

ProjectiveMap inverse(const ProjectiveMap& m) {
    FieldElement d = det3(m.m);
    if (d.is_zero()) throw DegenerateMapError("projective map is singular");
    FieldElement s = d.inverse();
    const auto& a = m.m;
    ProjectiveMap r;
    r.m[0] = s * (a[4] * a[8] - a[5] * a[7]);
    r.m[1] = s * (a[2] * a[7] - a[1] * a[8]);
    r.m[2] = s * (a[1] * a[5] - a[2] * a[4]);
    r.m[3] = s * (a[5] * a[6] - a[3] * a[8]);
    r.m[4] = s * (a[0] * a[8] - a[2] * a[6]);
    r.m[5] = s * (a[2] * a[3] - a[0] * a[5]);
    r.m[6] = s * (a[3] * a[7] - a[4] * a[6]);
    r.m[7] = s * (a[1] * a[6] - a[0] * a[7]);
    r.m[8] = s * (a[0] * a[4] - a[1] * a[3]);
    return r;
}

ProjLine apply_map_line(const ProjectiveMap& m, const ProjLine& l) {
    ProjectiveMap inv = inverse(m);
    // Coefficients transform by the inverse transpose: l' = l * m^{-1}.
    FieldElement a = l.a * inv.m[0] + l.b * inv.m[3] + l.c * inv.m[6];
    FieldElement b = l.a * inv.m[1] + l.b * inv.m[4] + l.c * inv.m[7];
    FieldElement c = l.a * inv.m[2] + l.b * inv.m[5] + l.c * inv.m[8];
    return make_proj_line(a, b, c);
}

ProjectiveMap compose(const ProjectiveMap& f, const ProjectiveMap& g) {
    ProjectiveMap r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            FieldElement s = f.m[3 * i] * g.m[j];
            s = s + f.m[3 * i + 1] * g.m[3 + j];
            s = s + f.m[3 * i + 2] * g.m[6 + j];
            r.m[3 * i + j] = s;
        }
    return r;
}

ProjectiveMap map_to_infinity(const ProjPoint& pbar, const ProjPoint& ptil) {
    if (pbar == ptil)
        throw CoincidentPointsError("frame needs two distinct points");
    const PrimeField f(pbar.x.modulus());
    const std::uint64_t total = std::uint64_t(f.modulus()) * f.modulus() + f.modulus() + 1;

    ProjLine l12 = proj_line_through(ptil, pbar);
    std::uint64_t qi = 0;
    while (qi < total && on_proj_line(scan_point(f, qi), l12)) ++qi;
    if (qi == total) throw InternalCheckError("no point off a line of P^2");
    ProjPoint q = scan_point(f, qi);

    ProjLine l13 = proj_line_through(ptil, q);
    ProjLine l23 = proj_line_through(pbar, q);
    std::uint64_t ui = 0;
    while (ui < total) {
        ProjPoint cand = scan_point(f, ui);
        if (!on_proj_line(cand, l12) && !on_proj_line(cand, l13) &&
            !on_proj_line(cand, l23))
            break;
        ++ui;
    }
    if (ui == total) throw InternalCheckError("no point off three lines of P^2");
    ProjPoint u = scan_point(f, ui);

    // Express u in the basis (ptil, pbar, q): lambda = B^{-1} u, where B has
    // the frame points as columns. All three coordinates are nonzero because
    // u avoids the base lines.
    ProjectiveMap basis;
    basis.m = {ptil.x, pbar.x, q.x, ptil.y, pbar.y, q.y, ptil.z, pbar.z, q.z};
    ProjectiveMap binv = inverse(basis);
    auto mul = [&](int row) {
        return binv.m[3 * row] * u.x + binv.m[3 * row + 1] * u.y +
               binv.m[3 * row + 2] * u.z;
    };
    FieldElement l1 = mul(0), l2 = mul(1), l3 = mul(2);
    if (l1.is_zero() || l2.is_zero() || l3.is_zero())
        throw InternalCheckError("unit point degenerated onto a base line");

    // N sends e1 -> ptil, e2 -> pbar, e3 -> q, (1,1,1) -> u; the frame map
    // is its inverse, so ptil -> [1:0:0] and pbar -> [0:1:0].
    ProjectiveMap n;
    n.m = {l1 * ptil.x, l2 * pbar.x, l3 * q.x,
           l1 * ptil.y, l2 * pbar.y, l3 * q.y,
           l1 * ptil.z, l2 * pbar.z, l3 * q.z};
    return inverse(n);
}

std::vector<ProjPoint> all_proj_points(const PrimeField& f) {
    const std::uint64_t p = f.modulus();
    std::vector<ProjPoint> out;
    out.reserve(p * p + p + 1);
    for (std::uint64_t i = 0; i < p * p + p + 1; ++i)
        out.push_back(scan_point(f, i));
    return out;
}

std::vector<ProjLine> all_proj_lines(const PrimeField& f) {
    const std::uint32_t p = f.modulus();
    std::vector<ProjLine> out;
    out.reserve(std::uint64_t(p) * p + p + 1);
    for (std::uint32_t b = 0; b < p; ++b)
        for (std::uint32_t c = 0; c < p; ++c)
            out.push_back(ProjLine{f.one(), f(b), f(c)});
    for (std::uint32_t c = 0; c < p; ++c)
        out.push_back(ProjLine{f.zero(), f.one(), f(c)});
    out.push_back(ProjLine{f.zero(), f.zero(), f.one()});
    return out;
}

std::vector<Line> all_affine_lines(const PrimeField& f) {
    const std::uint32_t p = f.modulus();
    std::vector<Line> out;
    out.reserve(std::uint64_t(p) * p + p);
    for (std::uint32_t b = 0; b < p; ++b)
        for (std::uint32_t c = 0; c < p; ++c)
            out.push_back(Line{f.one(), f(b), f(c)});
    for (std::uint32_t c = 0; c < p; ++c)
        out.push_back(Line{f.zero(), f.one(), f(c)});
    return out;
}

std::vector<ProjPoint> points_on_proj_line(const ProjLine& l) {
    const PrimeField f(l.a.modulus());
    const std::uint32_t p = f.modulus();
    std::vector<ProjPoint> out;
    out.reserve(p + 1);
    if (!l.a.is_zero()) {
        // x = -(b y + c z); (y, z) ranges over P^1.
        for (std::uint32_t t = 0; t < p; ++t) {
            FieldElement y = f.one(), z = f(t);
            out.push_back(make_proj_point(-(l.b * y + l.c * z), y, z));
        }
        out.push_back(make_proj_point(-l.c, f.zero(), f.one()));
    } else if (!l.b.is_zero()) {
        // y = -c z; (x, z) ranges over P^1.
        for (std::uint32_t t = 0; t < p; ++t) {
            FieldElement x = f.one(), z = f(t);
            out.push_back(make_proj_point(x, -(l.c * z), z));
        }
        out.push_back(make_proj_point(f.zero(), -l.c, f.one()));
    } else {
        // z = 0; (x, y) ranges over P^1.
        for (std::uint32_t t = 0; t < p; ++t)
            out.push_back(make_proj_point(f.one(), f(t), f.zero()));
        out.push_back(make_proj_point(f.zero(), f.one(), f.zero()));
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace pflab
