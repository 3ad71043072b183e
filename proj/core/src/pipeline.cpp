#include "pflab/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

#include "pflab/errors.hpp"
#include "pflab/parallel.hpp"

namespace pflab {

namespace {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using u128 = unsigned __int128;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Denominator of the contradiction gap the verdict is evaluated against.
constexpr double kGapDenominator = 267.0;

double nscale(u64 n, double e) { return std::pow(double(n), e); }

StageRecord& push_stage(std::vector<StageRecord>& stages, const char* name,
                        const char* tag) {
    StageRecord& s = stages.emplace_back();
    s.name = name;
    s.tag = tag;
    return s;
}

void finish(StageRecord& s, double measured, double predicted) {
    s.measured = measured;
    s.predicted = predicted;
    s.ratio = (std::isfinite(predicted) && predicted > 0.0) ? measured / predicted
                                                            : kNaN;
}

void check_le(u128 lhs, u128 rhs, const char* what) {
    if (lhs > rhs)
        throw InternalCheckError(std::string("exact inequality failed: ") + what);
}

void check_eq(u64 lhs, u64 rhs, const char* what) {
    if (lhs != rhs)
        throw InternalCheckError(std::string("exact identity failed: ") + what);
}

u64 su(const ElementSet& s) { return s.size(); }

ElementSet sum3(const ElementSet& a, const ElementSet& b, const ElementSet& c) {
    return sumset(sumset(a, b), c);
}

/// #{(x1, x2, y3) in A1^2 x A2 : the point interpolated on column y3 through
/// (x1, y1) and (x2, y2) lands in A1 and differs from both anchors}. Each
/// solution corresponds to one ordered triple of distinct collinear grid
/// points whose first two members sit on rows y1 and y2.
u64 row_pair_solutions_count(const ElementSet& a1, const ElementSet& a2,
                             u32 y1v, u32 y2v) {
    const u32 p = a1.modulus();
    PrimeField f(p);
    const FieldElement y1 = f(y1v), y2 = f(y2v);
    const FieldElement inv_dy = (y2 - y1).inverse();
    u64 count = 0;
    for (u32 y3v : a2.residues()) {
        const FieldElement y3 = f(y3v);
        const u32 lam = ((y2 - y3) * inv_dy).value();
        const u32 mu = ((y3 - y1) * inv_dy).value();
        for (u32 x1v : a1.residues()) {
            const u32 base = mul_mod(lam, x1v, p);
            for (u32 x2v : a1.residues()) {
                const u32 x3 = add_mod(base, mul_mod(mu, x2v, p), p);
                if (!a1.contains(x3)) continue;
                if (x3 == x1v && y3v == y1v) continue;
                if (x3 == x2v && y3v == y2v) continue;
                ++count;
            }
        }
    }
    return count;
}

u64 slope_solutions_count(const ElementSet& a1, u32 bv) {
    const u32 p = a1.modulus();
    PrimeField f(p);
    const ElementSet target = dilate(f(1) + f(bv), a1);
    u64 count = 0;
    for (u32 x1 : a1.residues()) {
        for (u32 x2 : a1.residues()) {
            if (target.contains(add_mod(x1, mul_mod(bv, x2, p), p))) ++count;
        }
    }
    return count;
}

/// Greedy cover of (signed_b * base) by translates of wedge1, together with
/// the unconditional comparisons backing its translate count: the dilated
/// base embeds in a translate of signed_b * ground, and the resulting
/// sumset is controlled through the wedge pair exactly.
struct CoverArtifact {
    CoveringResult cover;
    u32 signed_b = 0;  // the dilation actually applied
};

CoverArtifact cover_with_checks(const ElementSet& base, const ElementSet& ground,
                                FieldElement signed_b, const ElementSet& wedge1,
                                const ElementSet& wedge2, double eps) {
    CoverArtifact out;
    out.signed_b = signed_b.value();
    const ElementSet target = dilate(signed_b, base);
    out.cover = covering_translates(target, wedge1, eps);
    // base is contained in a translate of ground, so the dilated sumsets nest
    const u64 with_base = su(sumset(wedge1, target));
    const u64 with_ground = su(sumset(wedge1, dilate(signed_b, ground)));
    check_le(with_base, with_ground, "cover target exceeds its ground sumset");
    // dummy-set comparison for the ground sumset through the wedge pair
    check_le(u128(with_ground) * su(wedge2),
             u128(su(sumset(wedge1, dilate(signed_b, wedge2)))) *
                 su(sumset(wedge2, ground)),
             "cover ground sumset against wedge pair");
    return out;
}

/// Earliest translate index of the covering that contains value, or SIZE_MAX.
std::size_t cover_index(const CoveringResult& c, const ElementSet& x2, u32 value,
                        u32 p) {
    for (std::size_t i = 0; i < c.offsets.size(); ++i) {
        if (x2.contains(sub_mod(value, c.offsets[i], p))) return i;
    }
    return std::numeric_limits<std::size_t>::max();
}

}  // namespace

std::uint64_t solutions_bssetup(const ElementSet& a1, const ElementSet& a2,
                                FieldElement b) {
    if (a1.modulus() != a2.modulus() || b.modulus() != a1.modulus())
        throw FieldMismatchError("slope count arguments span different fields");
    const u32 p = a1.modulus();
    if (b.value() == 0 || b.value() == p - 1)
        throw BadSlopeError("slope encodes an anchored row");
    return slope_solutions_count(a1, b.value());
}

CaseSplitResult case_split(const ElementSet& y1) {
    if (y1.size() < 2)
        throw TooSmallError("ratio-set dichotomy needs at least two elements");
    const u32 p = y1.modulus();
    PrimeField f(p);
    const ElementSet r = ratio_set(y1);

    CaseSplitResult out;
    out.ratio_set_size = r.size();
    out.ratio_set_is_field = r.size() == p;
    out.y1_squared = u64(y1.size()) * y1.size();

    const auto pair_size = [&](u32 xi) -> u64 {
        if (xi == 0) return y1.size();
        return su(sumset(y1, dilate(f(xi), y1)));
    };

    const bool big_ratio_set =
        out.ratio_set_is_field || u128(r.size()) >= u128(y1.size()) * y1.size();
    const auto& ys = y1.residues();

    if (big_ratio_set) {
        out.case_tag = "CaseI";
        u64 best = 0;
        u32 best_xi = 0;
        for (u32 xi : r.residues()) {
            const u64 m = pair_size(xi);
            if (m > best) {
                best = m;
                best_xi = xi;
            }
        }
        out.xi = best_xi;
        out.certificate_size = best;
        // first quadruple realizing xi = (a - b) / (c - d)
        bool found = false;
        for (u32 a : ys) {
            for (u32 b : ys) {
                for (u32 c : ys) {
                    for (u32 d : ys) {
                        if (c == d) continue;
                        if (sub_mod(a, b, p) ==
                            mul_mod(best_xi, sub_mod(c, d, p), p)) {
                            out.quadruple = {a, b, c, d};
                            found = true;
                        }
                        if (found) break;
                    }
                    if (found) break;
                }
                if (found) break;
            }
            if (found) break;
        }
        if (!found)
            throw InternalCheckError("ratio-set member admits no realization");
        return out;
    }

    out.case_tag = "CaseII";
    // The ratio set is small, hence not shift-invariant: some quadruple's
    // ratio shifted by one escapes it.
    for (u32 a : ys) {
        for (u32 b : ys) {
            for (u32 c : ys) {
                for (u32 d : ys) {
                    if (c == d) continue;
                    const u32 ratio =
                        mul_mod(sub_mod(a, b, p), inv_mod(sub_mod(c, d, p), p), p);
                    const u32 xi = add_mod(ratio, 1, p);
                    if (r.contains(xi)) continue;
                    out.xi = xi;
                    out.quadruple = {a, b, c, d};
                    out.certificate_size = pair_size(xi);
                    // xi avoids every ratio of Y1, so each value y + xi*y'
                    // has exactly one representation.
                    check_eq(out.certificate_size, out.y1_squared,
                             "escaping ratio must give an injective pair sum");
                    return out;
                }
            }
        }
    }
    throw InternalCheckError("small ratio set was shift-invariant");
}

BeckTrace run_beck_pipeline(const ElementSet& a1, const ElementSet& a2,
                            const BeckParams& params, int threads) {
    if (a1.modulus() != a2.modulus())
        throw FieldMismatchError("grid sides live in different fields");
    if (a1.size() != a2.size())
        throw InputError("grid sides must have equal size");
    if (a1.size() < 2) throw TooSmallError("grid side needs at least 2 elements");
    if (!(params.delta > 0.0) || !(params.delta < 1.0))
        throw InputError("exponent gap must lie in (0, 1)");
    if (!(params.c_rich > 0.0) || !(params.c_pop > 0.0))
        throw InputError("threshold multipliers must be positive");
    if (!(params.eps_cover > 0.0) || params.eps_cover > 0.25)
        throw InputError("covering tolerance must lie in (0, 1/4]");
    if (threads < 1) threads = 1;

    const u32 p = a1.modulus();
    PrimeField f(p);
    const u64 n = a1.size();
    const double d = params.delta;

    BeckTrace t;
    t.modulus = p;
    t.n = n;
    t.params = params;
    t.a1 = a1;
    t.a2 = a2;

    const auto truncate = [&](const char* stage) {
        t.empty_stage = stage;
        return t;
    };

    // -- line census over the full grid ------------------------------------
    const AffinePointSet grid = AffinePointSet::grid(a1, a2);
    const LineMultiplicityMap census = spanned_lines(grid);
    const BeckDeltaReport report = beck_delta_effective(grid);
    t.line_count = report.line_count;
    t.delta_eff = report.delta_eff;
    t.range_warning = report.range_warning;
    t.verdict = kGapDenominator * t.delta_eff >= 1.0;
    {
        StageRecord& s = push_stage(t.stages, "line_census", "ctr");
        finish(s, double(report.line_count), nscale(n, 2.0 + 2.0 * d));
        s.payload_sizes.emplace_back("lines", report.line_count);
        s.extras.emplace_back("delta_eff", report.delta_eff);
        s.extras.emplace_back("theorem1_ratio", report.theorem1_ratio);
    }

    // -- rich lines and the triples they carry ------------------------------
    const double rich_threshold = std::max(2.0, params.c_rich * nscale(n, 1.0 - d));
    u64 rich_count = 0, rich_triples = 0;
    for (const auto& [line, k] : census.entries()) {
        if (double(k) < rich_threshold) continue;
        ++rich_count;
        rich_triples += u64(k) * (k - 1) * (k - 2);
    }
    check_eq(rich_count, rich_lines(grid, rich_threshold).size(),
             "rich-line census against the filtered line set");
    {
        StageRecord& s = push_stage(t.stages, "rich_lines", "det");
        finish(s, double(rich_triples), nscale(n, 5.0 - d));
        s.payload_sizes.emplace_back("rich_lines", rich_count);
        s.extras.emplace_back("threshold", rich_threshold);
    }
    if (rich_count == 0) return truncate("rich_lines");

    // -- fix the most productive ordered row pair ---------------------------
    std::vector<std::pair<u32, u32>> row_pairs;
    for (u32 y1v : a2.residues())
        for (u32 y2v : a2.residues())
            if (y1v != y2v) row_pairs.emplace_back(y1v, y2v);
    std::vector<u64> row_counts(row_pairs.size());
    parallel_for(row_pairs.size(), threads, [&](std::size_t i) {
        row_counts[i] =
            row_pair_solutions_count(a1, a2, row_pairs[i].first, row_pairs[i].second);
    });
    std::size_t best_pair = 0;
    for (std::size_t i = 1; i < row_pairs.size(); ++i)
        if (row_counts[i] > row_counts[best_pair]) best_pair = i;
    t.y1 = row_pairs[best_pair].first;
    t.y2 = row_pairs[best_pair].second;
    t.row_pair_solutions = row_counts[best_pair];
    {
        StageRecord& s = push_stage(t.stages, "fix_row_pair", "dett");
        finish(s, double(t.row_pair_solutions), nscale(n, 3.0 - d));
        s.extras.emplace_back("y1", double(t.y1));
        s.extras.emplace_back("y2", double(t.y2));
    }

    // -- normalize the fixed rows to 0 and 1, derive the slope set ----------
    {
        std::vector<u32> mapped;
        mapped.reserve(a2.size());
        for (u32 yv : a2.residues())
            mapped.push_back(affine_normalize(f(yv), f(t.y1), f(t.y2)).value());
        t.a2_norm = ElementSet(f, std::move(mapped));
    }
    check_eq(t.a2_norm->size(), a2.size(), "row normalization must be bijective");
    // The normalizing map rescales every interpolation determinant by a
    // nonzero factor, so the solution count is invariant.
    check_eq(row_pair_solutions_count(a1, *t.a2_norm, 0, 1), t.row_pair_solutions,
             "solution count invariance under row normalization");
    {
        std::vector<u32> slopes;
        for (u32 r : t.a2_norm->residues()) {
            if (r == 0 || r == 1) continue;
            slopes.push_back(mul_mod(r, inv_mod(sub_mod(1, r, p), p), p));
        }
        t.b_set = ElementSet(f, std::move(slopes));
    }
    {
        StageRecord& s = push_stage(t.stages, "normalize_rows", "bssetup");
        finish(s, double(t.b_set->size()), double(n));
        s.payload_sizes.emplace_back("a2_norm", t.a2_norm->size());
        s.payload_sizes.emplace_back("b_slopes", t.b_set->size());
    }
    if (t.b_set->empty()) return truncate("normalize_rows");

    // -- popular slopes ------------------------------------------------------
    const auto& all_b = t.b_set->residues();
    std::vector<u64> slope_counts(all_b.size());
    parallel_for(all_b.size(), threads, [&](std::size_t i) {
        slope_counts[i] = slope_solutions_count(a1, all_b[i]);
    });
    const u64 slope_total = std::accumulate(slope_counts.begin(),
                                            slope_counts.end(), u64{0});
    const double slope_avg = double(slope_total) / double(all_b.size());
    const double slope_cut = params.c_pop * slope_avg;
    std::vector<u32> b1_members;
    u64 min_solutions = 0;
    for (std::size_t i = 0; i < all_b.size(); ++i) {
        if (slope_total == 0 || double(slope_counts[i]) < slope_cut) continue;
        b1_members.push_back(all_b[i]);
        SlopeData sd;
        sd.b = all_b[i];
        sd.solutions = slope_counts[i];
        min_solutions = t.slopes.empty() ? sd.solutions
                                         : std::min(min_solutions, sd.solutions);
        t.slopes.push_back(std::move(sd));
    }
    t.b1 = ElementSet(f, b1_members);
    {
        StageRecord& s = push_stage(t.stages, "popular_slopes", "bssetup");
        finish(s, double(t.b1->size()), nscale(n, 1.0 - d));
        s.payload_sizes.emplace_back("b1", t.b1->size());
        s.extras.emplace_back("avg_solutions", slope_avg);
        s.extras.emplace_back("threshold", slope_cut);
        s.extras.emplace_back("min_solutions", double(min_solutions));
        s.extras.emplace_back("per_slope_scale", nscale(n, 2.0 - d));
    }
    if (t.b1->empty()) return truncate("popular_slopes");

    // -- graph extraction per popular slope ----------------------------------
    parallel_for(t.slopes.size(), threads, [&](std::size_t i) {
        SlopeData& sd = t.slopes[i];
        const FieldElement b = f(sd.b);
        const ElementSet target = dilate(f(1) + b, a1);
        std::vector<std::pair<u32, u32>> edges;
        for (u32 x1v : a1.residues()) {
            for (u32 x2v : a1.residues()) {
                if (target.contains(add_mod(x1v, mul_mod(sd.b, x2v, p), p)))
                    edges.emplace_back(x1v, mul_mod(sd.b, x2v, p));
            }
        }
        PairGraph g(a1, dilate(b, a1), std::move(edges));
        check_eq(g.edges().size(), sd.solutions,
                 "pair-graph edge count against the slope solution count");
        const BsgResult res = bsg_extract(g, params.bsg);
        sd.a1b = res.x_prime;
        sd.a2b = dilate(b.inverse(), res.y_prime);
        sd.bsg_sumset = res.sumset_size;
        sd.doubling_1 = su(sumset(*sd.a1b, *sd.a1b));
        sd.doubling_2 = su(sumset(*sd.a2b, *sd.a2b));
    });
    u64 max_bsg_sumset = 0, min_comp = std::numeric_limits<u64>::max();
    for (const SlopeData& sd : t.slopes) {
        max_bsg_sumset = std::max(max_bsg_sumset, sd.bsg_sumset);
        min_comp = std::min({min_comp, su(*sd.a1b), su(*sd.a2b)});
    }
    {
        StageRecord& s = push_stage(t.stages, "bsg_extraction", "bsest");
        finish(s, double(max_bsg_sumset), nscale(n, 1.0 + 5.0 * d));
        s.payload_sizes.emplace_back("slopes", t.slopes.size());
    }
    {
        StageRecord& s = push_stage(t.stages, "bsg_sizes", "sizes");
        finish(s, double(std::min(min_comp, u64(t.b1->size()))), nscale(n, 1.0 - d));
        s.extras.emplace_back("min_component", double(min_comp));
        s.extras.emplace_back("b1_size", double(t.b1->size()));
    }

    // -- central slope by total rectangle intersection -----------------------
    std::vector<u64> inter_totals(t.slopes.size());
    parallel_for(t.slopes.size(), threads, [&](std::size_t j) {
        const SlopeData& centre = t.slopes[j];
        u64 total = 0;
        for (const SlopeData& sd : t.slopes) {
            total += u64(su(intersect(*sd.a1b, *centre.a1b))) *
                     su(intersect(*sd.a2b, *centre.a2b));
        }
        inter_totals[j] = total;
    });
    std::size_t star_idx = 0;
    for (std::size_t j = 1; j < t.slopes.size(); ++j)
        if (inter_totals[j] > inter_totals[star_idx]) star_idx = j;
    t.b_star = t.slopes[star_idx].b;
    const ElementSet a1_star = *t.slopes[star_idx].a1b;
    const ElementSet a2_star = *t.slopes[star_idx].a2b;
    {
        StageRecord& s = push_stage(t.stages, "central_slope", "inter");
        finish(s, double(inter_totals[star_idx]),
               double(t.b1->size()) * nscale(n, 2.0 - 4.0 * d));
        s.extras.emplace_back("b_star", double(t.b_star));
    }

    // -- slopes with a large meet against the central slope ------------------
    for (SlopeData& sd : t.slopes) {
        sd.intersection = u64(su(intersect(*sd.a1b, a1_star))) *
                          su(intersect(*sd.a2b, a2_star));
    }
    const double inter_avg =
        double(inter_totals[star_idx]) / double(t.slopes.size());
    const double inter_cut = params.c_pop * inter_avg;
    std::vector<u32> b2_members;
    u64 min_inter = std::numeric_limits<u64>::max();
    for (SlopeData& sd : t.slopes) {
        if (double(sd.intersection) < inter_cut) continue;
        sd.in_b2 = true;
        b2_members.push_back(sd.b);
        min_inter = std::min(min_inter, sd.intersection);
    }
    t.b2 = ElementSet(f, b2_members);
    {
        StageRecord& s = push_stage(t.stages, "popular_intersections", "intersect");
        finish(s, t.b2->empty() ? 0.0 : double(min_inter), nscale(n, 2.0 - 4.0 * d));
        s.payload_sizes.emplace_back("b2", t.b2->size());
        s.extras.emplace_back("avg_intersection", inter_avg);
        s.extras.emplace_back("threshold", inter_cut);
    }
    if (t.b2->empty()) return truncate("popular_intersections");
    {
        StageRecord& s = push_stage(t.stages, "slope_set_refined", "btwo");
        finish(s, double(t.b2->size()), nscale(n, 1.0 - 5.0 * d));
    }

    // -- componentwise meets with the central slope ---------------------------
    u64 min_wedge = std::numeric_limits<u64>::max();
    for (SlopeData& sd : t.slopes) {
        if (!sd.in_b2) continue;
        sd.a1_wedge = intersect(*sd.a1b, a1_star);
        sd.a2_wedge = intersect(*sd.a2b, a2_star);
        min_wedge = std::min({min_wedge, su(*sd.a1_wedge), su(*sd.a2_wedge)});
    }
    {
        StageRecord& s = push_stage(t.stages, "component_intersections", "awedge");
        finish(s, double(min_wedge), nscale(n, 1.0 - 4.0 * d));
    }
    if (min_wedge == 0) return truncate("component_intersections");

    // -- doubling of every extracted component --------------------------------
    u64 max_doubling = 0;
    for (const SlopeData& sd : t.slopes) {
        check_le(u128(sd.doubling_1) * su(*sd.a2b),
                 u128(sd.bsg_sumset) * sd.bsg_sumset,
                 "first-component doubling against the extraction sumset");
        check_le(u128(sd.doubling_2) * su(*sd.a1b),
                 u128(sd.bsg_sumset) * sd.bsg_sumset,
                 "second-component doubling against the extraction sumset");
        max_doubling = std::max({max_doubling, sd.doubling_1, sd.doubling_2});
    }
    {
        StageRecord& s = push_stage(t.stages, "doubling_bounds", "sumsetone");
        finish(s, double(max_doubling), nscale(n, 1.0 + 11.0 * d));
    }

    // -- cross sumsets of the central components across slopes ----------------
    const FieldElement bstar = f(t.b_star);
    u64 max_pair_cross = 0, max_central_cross = 0, max_cross = 0;
    for (SlopeData& sd : t.slopes) {
        if (!sd.in_b2) continue;
        const FieldElement b = f(sd.b);
        const ElementSet& w1 = *sd.a1_wedge;
        const ElementSet& w2 = *sd.a2_wedge;
        const u64 s1 = su(sumset(dilate(bstar, *sd.a2b), dilate(b, *sd.a2b)));
        const u64 mid = su(sumset(dilate(bstar, w2), dilate(b, *sd.a2b)));
        check_le(u128(s1) * su(w2), u128(su(sumset(*sd.a2b, w2))) * mid,
                 "cross sumset of one slope through its wedge");
        check_le(u128(mid) * su(w1),
                 u128(su(sumset(w1, dilate(bstar, w2)))) *
                     su(sumset(w1, dilate(b, *sd.a2b))),
                 "wedge cross sumset through the first component");
        const u64 s2 = su(sumset(dilate(bstar, a2_star), dilate(b, *sd.a2b)));
        check_le(u128(s2) * su(w2), u128(su(sumset(a2_star, w2))) * mid,
                 "central-against-slope sumset through the wedge");
        const u64 s3 = su(sumset(dilate(bstar, a2_star), dilate(b, a2_star)));
        sd.cross_sumset = s3;
        check_le(u128(s3) * su(w2),
                 u128(su(sumset(dilate(bstar, a2_star), dilate(b, w2)))) *
                     su(sumset(w2, a2_star)),
                 "central cross sumset through the wedge");
        max_pair_cross = std::max(max_pair_cross, s1);
        max_central_cross = std::max(max_central_cross, s2);
        max_cross = std::max(max_cross, s3);
    }
    {
        StageRecord& s = push_stage(t.stages, "cross_sumsets", "sumsets");
        finish(s, double(max_cross), nscale(n, 1.0 + 59.0 * d));
        s.extras.emplace_back("max_pair_cross", double(max_pair_cross));
        s.extras.emplace_back("max_central_cross", double(max_central_cross));
    }

    // -- dilation census: X = A2_*, Y = (1/b_*) B2 ----------------------------
    t.x_set = a2_star;
    t.y_slopes = dilate(bstar.inverse(), *t.b2);
    const ElementSet& xs = *t.x_set;
    const ElementSet& ys = *t.y_slopes;
    u64 k_value = 0;
    u64 pair_total = 0;
    for (u32 yv : ys.residues()) {
        const auto reps = representation_count(xs, dilate(f(yv), xs));
        u64 energy = 0;
        for (const auto& [sum, r] : reps) energy += r * r;
        pair_total += energy;
        const u64 k_y = reps.size();
        // |X + yX| coincides with the cross sumset of the matching slope
        const u32 b_match = mul_mod(t.b_star, yv, p);
        for (const SlopeData& sd : t.slopes) {
            if (sd.b == b_match && sd.in_b2)
                check_eq(k_y, sd.cross_sumset,
                         "dilation census against the cross sumset");
        }
        k_value = std::max(k_value, k_y);
    }
    t.k_max_sumset = k_value;
    {
        StageRecord& s = push_stage(t.stages, "slope_pair_census", "ka");
        finish(s, double(k_value), nscale(n, 1.0 + 59.0 * d));
        s.payload_sizes.emplace_back("x", xs.size());
        s.payload_sizes.emplace_back("y", ys.size());
    }

    // -- the pair equation: energy summed over the slope set ------------------
    // For each y the solution count is an exact sum of squared representation
    // counts, so the Cauchy-Schwarz floor holds unconditionally.
    check_le(u128(ys.size()) * su(xs) * su(xs) * su(xs) * su(xs),
             u128(pair_total) * k_value, "pair-equation solution floor");
    {
        StageRecord& s = push_stage(t.stages, "pair_equation", "pairs");
        finish(s, double(pair_total),
               double(ys.size()) * nscale(su(xs), 4.0) / double(k_value));
    }

    // -- fix the most productive translation pair -----------------------------
    const auto& xres = xs.residues();
    std::vector<u64> shift_counts(xres.size() * xres.size());
    parallel_for(shift_counts.size(), threads, [&](std::size_t idx) {
        const u32 xt1 = xres[idx / xres.size()];
        const u32 xt2 = xres[idx % xres.size()];
        u64 count = 0;
        for (u32 yv : ys.residues()) {
            for (u32 x1v : xres) {
                const u32 val =
                    add_mod(xt2, mul_mod(yv, sub_mod(x1v, xt1, p), p), p);
                if (xs.contains(val)) ++count;
            }
        }
        shift_counts[idx] = count;
    });
    std::size_t best_shift = 0;
    u64 shift_sum = 0;
    for (std::size_t idx = 0; idx < shift_counts.size(); ++idx) {
        shift_sum += shift_counts[idx];
        if (shift_counts[idx] > shift_counts[best_shift]) best_shift = idx;
    }
    check_eq(shift_sum, pair_total,
             "translation-pair counts must partition the pair equation");
    check_le(pair_total, u128(shift_counts[best_shift]) * xres.size() * xres.size(),
             "translation-pair maximum beats the average");
    t.x_tilde_1 = xres[best_shift / xres.size()];
    t.x_tilde_2 = xres[best_shift % xres.size()];
    t.x1 = translate(-f(t.x_tilde_1), xs);
    t.x2 = translate(-f(t.x_tilde_2), xs);
    {
        StageRecord& s = push_stage(t.stages, "fix_translation_pair", "lines");
        finish(s, double(shift_counts[best_shift]),
               double(ys.size()) * nscale(su(xs), 2.0) / double(k_value));
        s.extras.emplace_back("x_tilde_1", double(t.x_tilde_1));
        s.extras.emplace_back("x_tilde_2", double(t.x_tilde_2));
    }

    // -- rich directions through the origin on the shifted grid ---------------
    const ElementSet& x1s = *t.x1;
    const ElementSet& x2s = *t.x2;
    const double dir_threshold =
        params.c_rich * nscale(su(xs), 2.0) / double(k_value);
    std::vector<u32> rich_dirs;
    u64 rich_hits = 0, all_hits = 0;
    for (u32 yv : ys.residues()) {
        u64 m = 0;
        for (u32 uv : x1s.residues())
            if (x2s.contains(mul_mod(yv, uv, p))) ++m;
        all_hits += m;
        if (double(m) >= dir_threshold) {
            rich_dirs.push_back(yv);
            rich_hits += m;
        }
    }
    check_eq(all_hits, shift_counts[best_shift],
             "origin-direction hits against the fixed translation count");
    t.y_rich = ElementSet(f, rich_dirs);
    {
        StageRecord& s = push_stage(t.stages, "rich_slopes", "lines");
        finish(s, double(t.y_rich->size()),
               double(ys.size()) * double(su(xs)) / double(k_value));
        s.payload_sizes.emplace_back("y_rich", t.y_rich->size());
        s.extras.emplace_back("threshold", dir_threshold);
        s.extras.emplace_back("rich_hits", double(rich_hits));
        s.extras.emplace_back("total_hits", double(all_hits));
    }
    if (t.y_rich->empty()) return truncate("rich_slopes");

    // -- the densest nonzero column ------------------------------------------
    u64 best_cross = 0;
    u32 u_star = 0;
    bool have_u = false;
    for (u32 uv : x1s.residues()) {
        if (uv == 0) continue;
        u64 c = 0;
        for (u32 yv : t.y_rich->residues())
            if (x2s.contains(mul_mod(yv, uv, p))) ++c;
        if (!have_u || c > best_cross) {
            best_cross = c;
            u_star = uv;
            have_u = true;
        }
    }
    if (!have_u) {
        push_stage(t.stages, "vertical_set", "beone");
        return truncate("vertical_set");
    }
    t.u_star = u_star;
    {
        std::vector<u32> members;
        for (u32 yv : t.y_rich->residues()) {
            const u32 val = mul_mod(yv, u_star, p);
            if (x2s.contains(val)) members.push_back(val);
        }
        t.y_one = ElementSet(f, std::move(members));
    }
    check_eq(t.y_one->size(), best_cross,
             "column trace size against the column hit count");
    {
        StageRecord& s = push_stage(t.stages, "vertical_set", "beone");
        finish(s, double(t.y_one->size()),
               double(ys.size()) * double(su(xs)) / double(k_value));
        s.payload_sizes.emplace_back("y_one", t.y_one->size());
        s.extras.emplace_back("u_star", double(u_star));
    }
    if (t.y_one->empty()) return truncate("vertical_set");
    {
        StageRecord& s = push_stage(t.stages, "vertical_set_scale", "e1");
        finish(s, double(t.y_one->size()), nscale(n, 1.0 - 65.0 * d));
    }

    // -- ratio-set dichotomy ---------------------------------------------------
    if (t.y_one->size() < 2) {
        StageRecord& s = push_stage(t.stages, "case_split", "sq");
        s.payload_sizes.emplace_back("y_one", t.y_one->size());
        return truncate("case_split");
    }
    const ElementSet& y_one = *t.y_one;
    t.case_result = case_split(y_one);
    const CaseSplitResult& cs = *t.case_result;
    t.case_tag = cs.case_tag;
    {
        StageRecord& s = push_stage(t.stages, "case_split", "sq");
        finish(s, double(cs.ratio_set_size), double(cs.y1_squared));
        s.payload_sizes.emplace_back("ratio_set", cs.ratio_set_size);
        s.extras.emplace_back("xi", double(cs.xi));
        s.extras.emplace_back("certificate", double(cs.certificate_size));
        s.extras.emplace_back("y1_squared", double(cs.y1_squared));
    }

    // -- coverings driven by the certificate quadruple -------------------------
    // Each quadruple element y corresponds to the slope b_* * y / u_* of the
    // refined slope set.
    const FieldElement inv_u = f(u_star).inverse();
    const auto slope_of = [&](u32 yv) -> u32 {
        return (bstar * inv_u * f(yv)).value();
    };
    const auto wedge_pair = [&](u32 bv) -> const SlopeData& {
        for (const SlopeData& sd : t.slopes)
            if (sd.b == bv && sd.in_b2) return sd;
        throw InternalCheckError("quadruple slope missing from the refined set");
    };
    const u32 bp = slope_of(cs.quadruple[0]);
    const u32 bq = slope_of(cs.quadruple[1]);
    const u32 bs = slope_of(cs.quadruple[2]);
    const u32 bt = slope_of(cs.quadruple[3]);
    const SlopeData& sd_p = wedge_pair(bp);
    const SlopeData& sd_q = wedge_pair(bq);
    const SlopeData& sd_s = wedge_pair(bs);
    const SlopeData& sd_t = wedge_pair(bt);

    const double eps = params.eps_cover;
    const CoverArtifact cov_p = cover_with_checks(
        y_one, x2s, f(bp), *sd_p.a1_wedge, *sd_p.a2_wedge, eps);
    const CoverArtifact cov_q = cover_with_checks(
        y_one, x2s, -f(bq), *sd_q.a1_wedge, *sd_q.a2_wedge, eps);
    const CoverArtifact cov_s = cover_with_checks(
        a2_star, a2_star, f(bs), *sd_s.a1_wedge, *sd_s.a2_wedge, eps);
    const CoverArtifact cov_t = cover_with_checks(
        a2_star, a2_star, -f(bt), *sd_t.a1_wedge, *sd_t.a2_wedge, eps);
    const u64 cover_counts[4] = {
        cov_p.cover.offsets.size(), cov_q.cover.offsets.size(),
        cov_s.cover.offsets.size(), cov_t.cover.offsets.size()};
    {
        StageRecord& s = push_stage(t.stages, "covering", "thot");
        finish(s, double(*std::max_element(cover_counts, cover_counts + 4)),
               nscale(n, 24.0 * d));
        s.payload_sizes.emplace_back("translates_p", cover_counts[0]);
        s.payload_sizes.emplace_back("translates_q", cover_counts[1]);
        s.payload_sizes.emplace_back("translates_s", cover_counts[2]);
        s.payload_sizes.emplace_back("translates_t", cover_counts[3]);
        s.extras.emplace_back("greedy_ratio_p", cov_p.cover.bound_ratio);
        s.extras.emplace_back("greedy_ratio_q", cov_q.cover.bound_ratio);
        s.extras.emplace_back("greedy_ratio_s", cov_s.cover.bound_ratio);
        s.extras.emplace_back("greedy_ratio_t", cov_t.cover.bound_ratio);
    }

    // -- keep the half of each base set covered earliest ------------------------
    const auto select_half = [&](const ElementSet& base, const CoverArtifact& ca,
                                 const ElementSet& ground_a,
                                 const CoverArtifact& cb,
                                 const ElementSet& ground_b) -> ElementSet {
        std::vector<std::pair<std::size_t, u32>> order;
        for (u32 v : base.residues()) {
            const std::size_t ia =
                cover_index(ca.cover, ground_a, mul_mod(ca.signed_b, v, p), p);
            const std::size_t ib =
                cover_index(cb.cover, ground_b, mul_mod(cb.signed_b, v, p), p);
            if (ia == std::numeric_limits<std::size_t>::max() ||
                ib == std::numeric_limits<std::size_t>::max())
                continue;
            order.emplace_back(std::max(ia, ib), v);
        }
        const std::size_t want = (base.size() + 1) / 2;
        if (order.size() < want)
            throw InternalCheckError(
                "covering tolerance cannot miss half of the base set");
        std::sort(order.begin(), order.end());
        std::vector<u32> kept;
        kept.reserve(want);
        for (std::size_t i = 0; i < want; ++i) kept.push_back(order[i].second);
        return ElementSet(f, std::move(kept));
    };
    t.y_one_prime =
        select_half(y_one, cov_p, *sd_p.a1_wedge, cov_q, *sd_q.a1_wedge);
    t.a2_star_half =
        select_half(a2_star, cov_s, *sd_s.a1_wedge, cov_t, *sd_t.a1_wedge);
    const ElementSet& y1p = *t.y_one_prime;
    const ElementSet& a2h = *t.a2_star_half;
    {
        StageRecord& s = push_stage(t.stages, "subset_selection", "that");
        finish(s, double(y1p.size()), 0.5 * double(y_one.size()));
        s.payload_sizes.emplace_back("y_one_prime", y1p.size());
        s.payload_sizes.emplace_back("a2_star_half", a2h.size());
    }

    // -- the closing sumset chain ------------------------------------------------
    const u64 central_sumset = su(sumset(a1_star, dilate(bstar, a2_star)));
    check_eq(central_sumset, t.slopes[star_idx].bsg_sumset,
             "central extraction sumset recomputation");
    const u64 quad_sumset =
        su(sumset(sumset(a1_star, a1_star), sumset(a1_star, a1_star)));
    check_le(u128(quad_sumset) * su(a2_star) * su(a2_star) * su(a2_star),
             u128(central_sumset) * central_sumset * central_sumset *
                 central_sumset,
             "fourfold first-component sumset against the central sumset");

    const FieldElement diff_pq = f(cs.quadruple[0]) - f(cs.quadruple[1]);
    const FieldElement diff_st = f(cs.quadruple[2]) - f(cs.quadruple[3]);
    const FieldElement diff_bpq = f(bp) - f(bq);
    const FieldElement diff_bst = f(bs) - f(bt);
    if (diff_st.is_zero() || diff_bst.is_zero())
        throw InternalCheckError("certificate quadruple has equal denominators");

    const u128 cover_product =
        u128(cover_counts[0]) * cover_counts[1] * cover_counts[2] *
        cover_counts[3] * quad_sumset;

    u64 chain_value = 0;   // the covered mixed sumset
    u64 sq_size = 0;       // |Y1' + xi Y1'|
    if (cs.case_tag == "CaseII") {
        const FieldElement xi = f(cs.xi);
        const FieldElement xi_shift = xi - f(1);  // the certificate ratio itself
        if (xi.is_zero() || xi_shift.is_zero() || diff_pq.is_zero())
            throw InternalCheckError("escaping ratio degenerated");
        sq_size = su(sumset(y1p, dilate(xi, y1p)));
        check_eq(sq_size, u64(y1p.size()) * y1p.size(),
                 "injective pair sums survive on the selected half");
        const u64 shifted = su(sum3(y1p, y1p, dilate(xi_shift, y1p)));
        check_le(sq_size, shifted, "shift embedding of the certificate sumset");
        const u64 left3 = su(sum3(a2h, y1p, y1p));
        const u64 mixed = su(sumset(a2h, dilate(xi_shift, y1p)));
        check_le(u128(shifted) * su(a2h), u128(left3) * mixed,
                 "certificate chain through the selected half");
        const u64 triple_sumset = su(sum3(a2_star, a2_star, a2_star));
        check_le(left3, triple_sumset,
                 "selected-half triple sumset inside the central triple sumset");
        check_le(u128(triple_sumset) * su(a1_star) * su(a1_star),
                 u128(central_sumset) * central_sumset * central_sumset,
                 "threefold central sumset against the extraction sumset");
        const u64 mixed_dil =
            su(sumset(dilate(diff_st, a2h), dilate(diff_pq, y1p)));
        check_eq(mixed, mixed_dil, "mixed sumset dilation identity");
        const u64 mixed_slope =
            su(sumset(dilate(diff_bst, a2h), dilate(diff_bpq, y1p)));
        check_eq(mixed_dil, mixed_slope, "mixed sumset slope identity");
        check_le(mixed_slope, cover_product,
                 "mixed sumset against the covering product");
        chain_value = mixed;
        {
            StageRecord& s = push_stage(t.stages, "final_chain", "thatt");
            finish(s, double(mixed), nscale(n, 1.0 + 119.0 * d));
            s.extras.emplace_back("sq_size", double(sq_size));
            s.extras.emplace_back("shifted_chain", double(shifted));
            s.extras.emplace_back("triple_sumset", double(triple_sumset));
            s.extras.emplace_back("quad_sumset", double(quad_sumset));
            s.extras.emplace_back("cover_product", double(cover_product));
        }
        {
            StageRecord& s = push_stage(t.stages, "exponent_bound", "e3");
            finish(s, double(sq_size), nscale(n, 1.0 + 137.0 * d));
        }
    } else {
        const FieldElement xi = f(cs.xi);
        if (xi.is_zero() || diff_pq.is_zero())
            throw InternalCheckError("maximizing ratio degenerated");
        sq_size = su(sumset(y1p, dilate(xi, y1p)));
        const u64 mixed = su(sumset(a2h, dilate(xi, y1p)));
        const u64 left2 = su(sumset(a2h, y1p));
        check_le(u128(sq_size) * su(a2h), u128(left2) * mixed,
                 "certificate chain through the selected half");
        const u64 double_sumset = su(sumset(a2_star, a2_star));
        check_le(left2, double_sumset,
                 "selected-half sumset inside the central doubling");
        check_le(u128(double_sumset) * su(a1_star),
                 u128(central_sumset) * central_sumset,
                 "central doubling against the extraction sumset");
        const u64 mixed_dil =
            su(sumset(dilate(diff_st, a2h), dilate(diff_pq, y1p)));
        check_eq(mixed, mixed_dil, "mixed sumset dilation identity");
        const u64 mixed_slope =
            su(sumset(dilate(diff_bst, a2h), dilate(diff_bpq, y1p)));
        check_eq(mixed_dil, mixed_slope, "mixed sumset slope identity");
        check_le(mixed_slope, cover_product,
                 "mixed sumset against the covering product");
        chain_value = mixed;
        {
            StageRecord& s = push_stage(t.stages, "final_chain", "thatt");
            finish(s, double(mixed), kNaN);
            s.extras.emplace_back("sq_size", double(sq_size));
            s.extras.emplace_back("double_sumset", double(double_sumset));
            s.extras.emplace_back("quad_sumset", double(quad_sumset));
            s.extras.emplace_back("cover_product", double(cover_product));
        }
        {
            StageRecord& s = push_stage(t.stages, "exponent_bound", "e3");
            finish(s, double(u64(y1p.size()) * y1p.size()), kNaN);
            s.extras.emplace_back("certificate", double(sq_size));
        }
    }
    (void)chain_value;

    {
        StageRecord& s = push_stage(t.stages, "verdict", "ctr");
        finish(s, kGapDenominator * t.delta_eff, 1.0);
    }
    t.completed = true;
    return t;
}

namespace {

std::vector<u64> point_degrees(const std::vector<ProjPoint>& pts,
                               const std::vector<ProjLine>& lines, int threads) {
    std::vector<u64> deg(pts.size(), 0);
    parallel_for(pts.size(), threads, [&](std::size_t i) {
        u64 d = 0;
        for (const ProjLine& l : lines)
            if (on_proj_line(pts[i], l)) ++d;
        deg[i] = d;
    });
    return deg;
}

u64 line_point_count(const ProjLine& l, const std::vector<ProjPoint>& pts) {
    u64 c = 0;
    for (const ProjPoint& q : pts)
        if (on_proj_line(q, l)) ++c;
    return c;
}

}  // namespace

IncidenceTrace run_incidence_pipeline(const ProjPointSet& pset,
                                      const ProjLineSet& lset,
                                      const IncidenceParams& params, int threads) {
    if (pset.modulus() != lset.modulus())
        throw FieldMismatchError("points and lines live in different fields");
    if (pset.size() != lset.size())
        throw InputError("point and line sets must have equal size");
    if (pset.size() < 4)
        throw TooSmallError("incidence chain needs at least 4 points and lines");
    // The merge stage maps eps to a grid exponent gap of 40*eps/(1+2*eps),
    // which must stay below 1.
    if (!(params.epsilon > 0.0) || !(params.epsilon < 1.0 / 38.0))
        throw InputError("exponent gap must lie in (0, 1/38)");
    if (!(params.c_erase > 0.0) || !(params.c_pop > 0.0))
        throw InputError("threshold multipliers must be positive");
    if (params.refine_depth < 1)
        throw InputError("refinement depth must be at least 1");
    if (threads < 1) threads = 1;

    const u32 p = pset.modulus();
    PrimeField f(p);
    const u64 n = pset.size();
    const double e = params.epsilon;

    IncidenceTrace t;
    t.modulus = p;
    t.n = n;
    t.params = params;

    const auto truncate = [&](const char* stage) {
        t.empty_stage = stage;
        return t;
    };

    // -- incidence census ------------------------------------------------------
    t.incidences = count_incidences(pset, lset);
    t.eps_eff = t.incidences > 0
                    ? 1.5 - std::log(double(t.incidences)) / std::log(double(n))
                    : kNaN;
    {
        StageRecord& s = push_stage(t.stages, "incidence_census", "ctr1");
        finish(s, double(t.incidences), nscale(n, 1.5 - e));
        s.extras.emplace_back("eps_eff", t.eps_eff);
    }

    // -- erase points meeting too many lines ------------------------------------
    const std::vector<u64> deg_all = point_degrees(pset.points(), lset.lines(),
                                                   threads);
    const double busy_cut = params.c_erase * nscale(n, 0.5 + e);
    std::vector<ProjPoint> busy, kept;
    u64 busy_incidences = 0;
    for (std::size_t i = 0; i < pset.points().size(); ++i) {
        if (double(deg_all[i]) > busy_cut) {
            busy.push_back(pset.points()[i]);
            busy_incidences += deg_all[i];
        } else {
            kept.push_back(pset.points()[i]);
        }
    }
    t.p_busy = ProjPointSet(f, busy);
    {
        StageRecord& s = push_stage(t.stages, "erase_busy_points", "erase");
        finish(s, double(busy_incidences), nscale(n, 1.5 - e));
        s.payload_sizes.emplace_back("p_busy", t.p_busy->size());
        s.payload_sizes.emplace_back("p_kept", kept.size());
        s.extras.emplace_back("threshold", busy_cut);
    }
    if (kept.empty()) return truncate("erase_busy_points");

    // -- popularity refinement ---------------------------------------------------
    const double pop_cut = params.c_pop * nscale(n, 0.5 - e);
    std::vector<ProjPoint> cur_pts = std::move(kept);
    std::vector<ProjLine> cur_lines = lset.lines();

    const auto popular_points = [&](const std::vector<ProjPoint>& pts,
                                    const std::vector<ProjLine>& lines) {
        const std::vector<u64> deg = point_degrees(pts, lines, threads);
        std::vector<ProjPoint> out;
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (double(deg[i]) >= pop_cut) out.push_back(pts[i]);
        return out;
    };
    const auto popular_lines = [&](const std::vector<ProjLine>& lines,
                                   const std::vector<ProjPoint>& pts) {
        std::vector<u64> cnt(lines.size(), 0);
        parallel_for(lines.size(), threads, [&](std::size_t i) {
            cnt[i] = line_point_count(lines[i], pts);
        });
        std::vector<ProjLine> out;
        for (std::size_t i = 0; i < lines.size(); ++i)
            if (double(cnt[i]) >= pop_cut) out.push_back(lines[i]);
        return out;
    };
    const auto stage_suffix = [](int round) {
        return round == 1 ? std::string() : "_" + std::to_string(round);
    };

    for (int round = 1; round <= params.refine_depth; ++round) {
        cur_pts = popular_points(cur_pts, cur_lines);
        {
            const std::string name = "popular_points" + stage_suffix(round);
            StageRecord& s = push_stage(t.stages, name.c_str(), "pone");
            const u64 refined_inc =
                cur_pts.empty()
                    ? 0
                    : count_incidences(ProjPointSet(f, cur_pts),
                                       ProjLineSet(f, cur_lines));
            finish(s, double(refined_inc), nscale(n, 1.5 - e));
            s.payload_sizes.emplace_back("points", cur_pts.size());
        }
        if (cur_pts.empty())
            return truncate(("popular_points" + stage_suffix(round)).c_str());

        cur_lines = popular_lines(cur_lines, cur_pts);
        {
            const std::string name = "popular_lines" + stage_suffix(round);
            StageRecord& s = push_stage(t.stages, name.c_str(), "lone");
            const u64 refined_inc =
                cur_lines.empty()
                    ? 0
                    : count_incidences(ProjPointSet(f, cur_pts),
                                       ProjLineSet(f, cur_lines));
            finish(s, double(refined_inc), nscale(n, 1.5 - e));
            s.payload_sizes.emplace_back("lines", cur_lines.size());
        }
        if (cur_lines.empty())
            return truncate(("popular_lines" + stage_suffix(round)).c_str());
    }
    t.p1 = ProjPointSet(f, cur_pts);
    t.l1 = ProjLineSet(f, cur_lines);

    const std::vector<ProjPoint> final_pts = popular_points(cur_pts, cur_lines);
    t.p2 = ProjPointSet(f, final_pts);
    {
        StageRecord& s = push_stage(t.stages, "refined_points", "ptwo");
        finish(s, double(t.p2->size()), nscale(n, 1.0 - 2.0 * e));
        s.payload_sizes.emplace_back("points", t.p2->size());
    }
    if (t.p2->size() == 0) return truncate("refined_points");

    // -- neighborhoods inside the refined configuration ---------------------------
    const std::vector<ProjPoint>& base_pts = t.p1->points();
    const std::vector<ProjLine>& base_lines = t.l1->lines();
    const std::size_t words = (base_pts.size() + 63) / 64;
    std::vector<std::vector<u64>> line_masks(base_lines.size(),
                                             std::vector<u64>(words, 0));
    parallel_for(base_lines.size(), threads, [&](std::size_t li) {
        for (std::size_t pi = 0; pi < base_pts.size(); ++pi)
            if (on_proj_line(base_pts[pi], base_lines[li]))
                line_masks[li][pi >> 6] |= u64(1) << (pi & 63);
    });
    const auto point_index = [&](const ProjPoint& q) -> std::size_t {
        const auto it = std::lower_bound(base_pts.begin(), base_pts.end(), q);
        return std::size_t(it - base_pts.begin());
    };
    const std::vector<ProjPoint>& p2_pts = t.p2->points();
    std::vector<std::vector<u64>> hood(p2_pts.size(),
                                       std::vector<u64>(words, 0));
    parallel_for(p2_pts.size(), threads, [&](std::size_t i) {
        const std::size_t self = point_index(p2_pts[i]);
        for (std::size_t li = 0; li < base_lines.size(); ++li) {
            if (!on_proj_line(p2_pts[i], base_lines[li])) continue;
            for (std::size_t w = 0; w < words; ++w) hood[i][w] |= line_masks[li][w];
        }
        if (self < base_pts.size() && base_pts[self] == p2_pts[i])
            hood[i][self >> 6] &= ~(u64(1) << (self & 63));
    });
    const auto popcount = [&](const std::vector<u64>& mask) {
        u64 c = 0;
        for (u64 w : mask) c += std::popcount(w);
        return c;
    };
    u64 min_hood = std::numeric_limits<u64>::max();
    for (const auto& mask : hood) min_hood = std::min(min_hood, popcount(mask));
    {
        StageRecord& s = push_stage(t.stages, "neighborhoods", "pp");
        finish(s, double(min_hood), nscale(n, 1.0 - 2.0 * e));
        s.payload_sizes.emplace_back("points", p2_pts.size());
    }

    // -- the most entangled point pair ----------------------------------------------
    if (p2_pts.size() < 2) {
        push_stage(t.stages, "fix_point_pair", "pthree");
        return truncate("fix_point_pair");
    }
    std::size_t best_i = 0, best_j = 1;
    u64 best_overlap = 0;
    u64 overlap_sum = 0;
    bool have_pair = false;
    for (std::size_t i = 0; i < p2_pts.size(); ++i) {
        for (std::size_t j = i + 1; j < p2_pts.size(); ++j) {
            u64 c = 0;
            for (std::size_t w = 0; w < words; ++w)
                c += std::popcount(hood[i][w] & hood[j][w]);
            overlap_sum += c;
            if (!have_pair || c > best_overlap) {
                best_overlap = c;
                best_i = i;
                best_j = j;
                have_pair = true;
            }
        }
    }
    t.p_bar = p2_pts[best_i];
    t.p_til = p2_pts[best_j];
    std::vector<ProjPoint> p3_pts;
    for (std::size_t pi = 0; pi < base_pts.size(); ++pi) {
        const bool in_both = ((hood[best_i][pi >> 6] >> (pi & 63)) & 1) &&
                             ((hood[best_j][pi >> 6] >> (pi & 63)) & 1);
        if (in_both) p3_pts.push_back(base_pts[pi]);
    }
    t.p3 = ProjPointSet(f, p3_pts);
    {
        StageRecord& s = push_stage(t.stages, "fix_point_pair", "pthree");
        finish(s, double(t.p3->size()), nscale(n, 1.0 - 4.0 * e));
        s.payload_sizes.emplace_back("points", t.p3->size());
        s.extras.emplace_back("overlap_sum", double(overlap_sum));
    }
    if (t.p3->size() == 0) return truncate("fix_point_pair");

    // -- send the fixed pair to infinity, read off the grid ----------------------
    t.chart_map = map_to_infinity(t.p_bar, t.p_til);
    std::vector<u32> xs_res, ys_res;
    t.infinity_exclusions = 0;
    for (const ProjPoint& q : t.p3->points()) {
        const ProjPoint img = apply_map(*t.chart_map, q);
        if (img.z.is_zero()) {
            ++t.infinity_exclusions;
            continue;
        }
        xs_res.push_back((img.x / img.z).value());
        ys_res.push_back((img.y / img.z).value());
    }
    t.grid_a = ElementSet(f, xs_res);
    t.grid_b = ElementSet(f, ys_res);
    // Axis coordinates are intercepts of refined lines through the fixed
    // pair, so the axis sets cannot outnumber those line pencils.
    {
        u64 deg_bar = 0, deg_til = 0;
        for (const ProjLine& l : base_lines) {
            if (on_proj_line(t.p_bar, l)) ++deg_bar;
            if (on_proj_line(t.p_til, l)) ++deg_til;
        }
        check_le(t.grid_a->size(), deg_bar, "x-axis set against the first pencil");
        check_le(t.grid_b->size(), deg_til, "y-axis set against the second pencil");
    }
    {
        StageRecord& s = push_stage(t.stages, "to_infinity", "chart");
        finish(s, double(std::max(t.grid_a->size(), t.grid_b->size())),
               nscale(n, 0.5 + e));
        s.payload_sizes.emplace_back("grid_a", t.grid_a->size());
        s.payload_sizes.emplace_back("grid_b", t.grid_b->size());
        s.extras.emplace_back("infinity_exclusions", double(t.infinity_exclusions));
    }
    if (t.grid_a->empty() || t.grid_b->empty()) return truncate("to_infinity");

    // -- incidences and triples of the entangled set against all input lines -----
    const u64 p3_incidences = count_incidences(*t.p3, lset);
    {
        StageRecord& s = push_stage(t.stages, "grid_incidences", "ib");
        finish(s, double(p3_incidences), nscale(n, 1.5 - 5.0 * e));
    }
    u64 p3_triples = 0;
    for (const ProjLine& l : lset.lines()) {
        const u64 k = line_point_count(l, t.p3->points());
        p3_triples += k * (k - 1) * (k - 2);
    }
    {
        StageRecord& s = push_stage(t.stages, "triple_handoff", "handoff");
        finish(s, double(p3_triples), nscale(n, 2.5 - 15.0 * e));
        const double grid_side = double(std::max(t.grid_a->size(), t.grid_b->size()));
        s.extras.emplace_back(
            "grid_scale", std::pow(grid_side, 5.0 - 40.0 * e / (1.0 + 2.0 * e)));
    }

    // -- hand the trimmed grid to the grid chain ----------------------------------
    t.delta_merge = delta_from_epsilon(e);
    const std::size_t side = std::min(t.grid_a->size(), t.grid_b->size());
    if (side < 2) return truncate("merge");
    const auto take_smallest = [&](const ElementSet& s) {
        std::vector<u32> cut(s.residues().begin(),
                             s.residues().begin() + std::ptrdiff_t(side));
        return ElementSet(f, std::move(cut));
    };
    BeckParams handoff = params.beck;
    handoff.delta = t.delta_merge;
    t.grid_trace = run_beck_pipeline(take_smallest(*t.grid_a),
                                     take_smallest(*t.grid_b), handoff, threads);
    {
        StageRecord& s = push_stage(t.stages, "merge", "merge");
        finish(s, t.grid_trace->delta_eff, t.delta_merge);
        s.payload_sizes.emplace_back("grid_side", side);
        s.payload_sizes.emplace_back("grid_stages", t.grid_trace->stages.size());
        s.extras.emplace_back("grid_verdict", t.grid_trace->verdict ? 1.0 : 0.0);
        s.extras.emplace_back("epsilon_roundtrip", epsilon_from_delta(t.delta_merge));
    }
    t.completed = true;
    return t;
}

double epsilon_from_delta(double delta) {
    if (!(delta > 0.0) || delta > 1.0)
        throw InputError("exponent gap must lie in (0, 1]");
    return delta / (40.0 - 2.0 * delta);
}

std::pair<std::uint64_t, std::uint64_t> epsilon_from_delta_exact(
    std::uint64_t num, std::uint64_t den) {
    if (num == 0 || den == 0 || num > den)
        throw InputError("fraction must satisfy 0 < num <= den");
    if (den > (std::numeric_limits<std::uint64_t>::max() - 2 * num) / 40)
        throw InputError("fraction denominator too large");
    const std::uint64_t g = std::gcd(num, den);
    num /= g;
    den /= g;
    std::uint64_t out_num = num;
    std::uint64_t out_den = 40 * den - 2 * num;
    const std::uint64_t g2 = std::gcd(out_num, out_den);
    return {out_num / g2, out_den / g2};
}

double delta_from_epsilon(double epsilon) {
    if (!(epsilon > 0.0) || epsilon > 1.0)
        throw InputError("exponent gap must lie in (0, 1]");
    return 40.0 * epsilon / (1.0 + 2.0 * epsilon);
}

}  // namespace pflab
