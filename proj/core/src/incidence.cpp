#include "pflab/incidence.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "pflab/errors.hpp"

namespace pflab {

namespace {

std::uint64_t isqrt64(std::uint64_t n) {
    std::uint64_t r = static_cast<std::uint64_t>(std::sqrt(double(n)));
    while (r > 0 && r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

}  // namespace

AffinePointSet::AffinePointSet(const PrimeField& field, std::vector<AffinePoint> pts)
    : p_(field.modulus()), pts_(std::move(pts)) {
    for (const auto& q : pts_)
        if (q.x.modulus() != p_ || q.y.modulus() != p_)
            throw FieldMismatchError("point outside the set's field");
    std::sort(pts_.begin(), pts_.end());
    pts_.erase(std::unique(pts_.begin(), pts_.end()), pts_.end());
}

AffinePointSet AffinePointSet::grid(const ElementSet& a, const ElementSet& b) {
    if (a.modulus() != b.modulus())
        throw FieldMismatchError("grid factors over different fields");
    PrimeField f(a.modulus());
    std::vector<AffinePoint> pts;
    pts.reserve(a.size() * b.size());
    for (auto x : a.residues())
        for (auto y : b.residues()) pts.push_back(AffinePoint{f(x), f(y)});
    return AffinePointSet(f, std::move(pts));
}

bool AffinePointSet::contains(const AffinePoint& q) const {
    return std::binary_search(pts_.begin(), pts_.end(), q);
}

LineSet::LineSet(const PrimeField& field, std::vector<Line> lines)
    : p_(field.modulus()), lines_(std::move(lines)) {
    for (const auto& l : lines_)
        if (l.a.modulus() != p_)
            throw FieldMismatchError("line outside the set's field");
    std::sort(lines_.begin(), lines_.end());
    lines_.erase(std::unique(lines_.begin(), lines_.end()), lines_.end());
}

bool LineSet::contains(const Line& l) const {
    return std::binary_search(lines_.begin(), lines_.end(), l);
}

ProjPointSet::ProjPointSet(const PrimeField& field, std::vector<ProjPoint> pts)
    : p_(field.modulus()), pts_(std::move(pts)) {
    for (const auto& q : pts_)
        if (q.x.modulus() != p_)
            throw FieldMismatchError("point outside the set's field");
    std::sort(pts_.begin(), pts_.end());
    pts_.erase(std::unique(pts_.begin(), pts_.end()), pts_.end());
}

bool ProjPointSet::contains(const ProjPoint& q) const {
    return std::binary_search(pts_.begin(), pts_.end(), q);
}

ProjLineSet::ProjLineSet(const PrimeField& field, std::vector<ProjLine> lines)
    : p_(field.modulus()), lines_(std::move(lines)) {
    for (const auto& l : lines_)
        if (l.a.modulus() != p_)
            throw FieldMismatchError("line outside the set's field");
    std::sort(lines_.begin(), lines_.end());
    lines_.erase(std::unique(lines_.begin(), lines_.end()), lines_.end());
}

bool ProjLineSet::contains(const ProjLine& l) const {
    return std::binary_search(lines_.begin(), lines_.end(), l);
}

LineMultiplicityMap::LineMultiplicityMap(
    const PrimeField& field, std::vector<std::pair<Line, std::uint32_t>> entries)
    : p_(field.modulus()), entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
}

LineSet LineMultiplicityMap::lines() const {
    std::vector<Line> ls;
    ls.reserve(entries_.size());
    for (const auto& [l, k] : entries_) ls.push_back(l);
    return LineSet(PrimeField(p_), std::move(ls));
}

LineMultiplicityMap spanned_lines(const AffinePointSet& p) {
    if (p.size() < 2)
        throw TooFewPointsError("spanned lines need at least two points");
    const PrimeField f(p.modulus());
    std::unordered_map<std::uint64_t, std::pair<Line, std::uint64_t>> acc;
    const auto& pts = p.points();
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            Line l = line_through(pts[i], pts[j]);
            auto [it, fresh] = acc.try_emplace(l.key(), l, 0);
            ++it->second.second;
        }
    std::vector<std::pair<Line, std::uint32_t>> entries;
    entries.reserve(acc.size());
    for (const auto& [key, lc] : acc) {
        // Unordered pair count u = k(k-1)/2; recover k and re-check.
        std::uint64_t m = 2 * lc.second;
        std::uint64_t k = (1 + isqrt64(1 + 4 * m)) / 2;
        if (k * (k - 1) != m)
            throw InternalCheckError("pair count is not of the form k(k-1)");
        entries.emplace_back(lc.first, static_cast<std::uint32_t>(k));
    }
    return LineMultiplicityMap(f, std::move(entries));
}

std::vector<std::pair<ProjLine, std::uint32_t>> proj_spanned_lines(
    const ProjPointSet& p) {
    if (p.size() < 2)
        throw TooFewPointsError("spanned lines need at least two points");
    std::unordered_map<std::uint64_t, std::pair<ProjLine, std::uint64_t>> acc;
    const auto& pts = p.points();
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            ProjLine l = proj_line_through(pts[i], pts[j]);
            auto [it, fresh] = acc.try_emplace(l.key(), l, 0);
            ++it->second.second;
        }
    std::vector<std::pair<ProjLine, std::uint32_t>> entries;
    entries.reserve(acc.size());
    for (const auto& [key, lc] : acc) {
        std::uint64_t m = 2 * lc.second;
        std::uint64_t k = (1 + isqrt64(1 + 4 * m)) / 2;
        if (k * (k - 1) != m)
            throw InternalCheckError("pair count is not of the form k(k-1)");
        entries.emplace_back(lc.first, static_cast<std::uint32_t>(k));
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return entries;
}

std::uint64_t count_incidences_naive(const AffinePointSet& p, const LineSet& l) {
    if (p.modulus() != l.modulus())
        throw FieldMismatchError("points and lines over different fields");
    std::uint64_t n = 0;
    for (const auto& q : p.points())
        for (const auto& ln : l.lines())
            if (on_line(q, ln)) ++n;
    return n;
}

std::uint64_t count_incidences_bucketed(const AffinePointSet& p, const LineSet& l) {
    if (p.modulus() != l.modulus())
        throw FieldMismatchError("points and lines over different fields");
    const std::uint32_t mod = p.modulus();
    // Bucket lines by direction (a, b); within a bucket a point determines
    // the unique intercept c = -(a x + b y) it could be incident with.
    std::unordered_map<std::uint64_t, std::unordered_map<std::uint32_t, std::uint32_t>>
        buckets;  // (a,b) key -> intercept -> line count (after dedup, 0/1)
    for (const auto& ln : l.lines()) {
        std::uint64_t dir = std::uint64_t(ln.a.value()) * mod + ln.b.value();
        ++buckets[dir][ln.c.value()];
    }
    std::uint64_t n = 0;
    for (const auto& q : p.points())
        for (const auto& [dir, intercepts] : buckets) {
            std::uint32_t a = static_cast<std::uint32_t>(dir / mod);
            std::uint32_t b = static_cast<std::uint32_t>(dir % mod);
            std::uint32_t c = neg_mod(
                add_mod(mul_mod(a, q.x.value(), mod), mul_mod(b, q.y.value(), mod), mod),
                mod);
            auto it = intercepts.find(c);
            if (it != intercepts.end()) n += it->second;
        }
    return n;
}

std::uint64_t count_incidences(const AffinePointSet& p, const LineSet& l) {
    std::uint64_t a = count_incidences_naive(p, l);
    std::uint64_t b = count_incidences_bucketed(p, l);
    if (a != b) throw InternalCheckError("incidence counting algorithms disagree");
    return a;
}

std::uint64_t count_incidences_naive(const ProjPointSet& p, const ProjLineSet& l) {
    if (p.modulus() != l.modulus())
        throw FieldMismatchError("points and lines over different fields");
    std::uint64_t n = 0;
    for (const auto& q : p.points())
        for (const auto& ln : l.lines())
            if (on_proj_line(q, ln)) ++n;
    return n;
}

std::uint64_t count_incidences_bucketed(const ProjPointSet& p, const ProjLineSet& l) {
    if (p.modulus() != l.modulus())
        throw FieldMismatchError("points and lines over different fields");
    // Line-side enumeration: walk the p + 1 points of each line and test
    // membership in a hash of P.
    std::unordered_set<std::uint64_t> members;
    members.reserve(p.size() * 2);
    for (const auto& q : p.points()) members.insert(q.key());
    std::uint64_t n = 0;
    for (const auto& ln : l.lines())
        for (const auto& q : points_on_proj_line(ln))
            if (members.count(q.key())) ++n;
    return n;
}

std::uint64_t count_incidences(const ProjPointSet& p, const ProjLineSet& l) {
    std::uint64_t a = count_incidences_naive(p, l);
    std::uint64_t b = count_incidences_bucketed(p, l);
    if (a != b) throw InternalCheckError("incidence counting algorithms disagree");
    return a;
}

LineSet rich_lines(const AffinePointSet& p, double t) {
    if (t < 2.0) throw InputError("rich-line threshold must be at least 2");
    std::vector<Line> out;
    if (p.size() >= 2) {
        auto census = spanned_lines(p);
        for (const auto& [l, k] : census.entries())
            if (double(k) >= t) out.push_back(l);
    }
    return LineSet(PrimeField(p.modulus()), std::move(out));
}

std::uint64_t collinear_triples_det(const AffinePointSet& p) {
    const auto& pts = p.points();
    const std::uint32_t mod = p.modulus();
    std::uint64_t ordered = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            for (std::size_t k = j + 1; k < pts.size(); ++k) {
                // det of rows (1, x, y) vanishes exactly on collinear triples
                std::uint32_t x1 = pts[i].x.value(), y1 = pts[i].y.value();
                std::uint32_t x2 = pts[j].x.value(), y2 = pts[j].y.value();
                std::uint32_t x3 = pts[k].x.value(), y3 = pts[k].y.value();
                std::uint32_t d = sub_mod(
                    add_mod(add_mod(mul_mod(x2, y3, mod), mul_mod(x3, y1, mod), mod),
                            mul_mod(x1, y2, mod), mod),
                    add_mod(add_mod(mul_mod(x3, y2, mod), mul_mod(x1, y3, mod), mod),
                            mul_mod(x2, y1, mod), mod),
                    mod);
                if (d == 0) ordered += 6;  // all orderings of the triple
            }
    return ordered;
}

std::uint64_t collinear_triples_via_lines(const LineMultiplicityMap& m) {
    std::uint64_t n = 0;
    for (const auto& [l, k] : m.entries())
        n += std::uint64_t(k) * (k - 1) * (k - 2);
    return n;
}

BeckDeltaReport beck_delta_effective(const AffinePointSet& p) {
    std::vector<std::uint32_t> xs, ys;
    for (const auto& q : p.points()) {
        xs.push_back(q.x.value());
        ys.push_back(q.y.value());
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    if (xs.size() != ys.size() || xs.size() * ys.size() != p.size())
        throw NotCartesianError("point set is not a square grid");
    if (xs.size() < 2) throw NotCartesianError("grid side must be at least 2");

    BeckDeltaReport r{};
    r.n = static_cast<std::uint32_t>(xs.size());
    r.line_count = spanned_lines(p).line_count();
    r.delta_eff =
        (std::log(double(r.line_count)) / std::log(double(r.n)) - 2.0) / 2.0;
    r.theorem1_ratio = double(r.line_count) /
                       std::pow(double(p.size()), 1.0 + 1.0 / 267.0);
    r.range_warning = double(r.n) * double(r.n) >= double(p.modulus());
    return r;
}

}  // namespace pflab
