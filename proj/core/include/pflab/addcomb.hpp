#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pflab/field.hpp"

namespace pflab {

/// A finite subset of F_p, stored as strictly increasing canonical residues.
class ElementSet {
public:
    ElementSet(const PrimeField& field, std::vector<std::uint32_t> residues);

    static ElementSet from_integers(const PrimeField& field,
                                    std::span<const std::int64_t> values);

    std::uint32_t modulus() const { return p_; }
    std::size_t size() const { return v_.size(); }
    bool empty() const { return v_.empty(); }
    bool contains(std::uint32_t residue) const;
    const std::vector<std::uint32_t>& residues() const { return v_; }

    friend bool operator==(const ElementSet& a, const ElementSet& b) {
        return a.p_ == b.p_ && a.v_ == b.v_;
    }

private:
    std::uint32_t p_;
    std::vector<std::uint32_t> v_;
};

// Exact set images. Binary operations require both operands to share one
// modulus and throw FieldMismatchError otherwise.
ElementSet sumset(const ElementSet& a, const ElementSet& b);
ElementSet difference_set(const ElementSet& a, const ElementSet& b);
ElementSet product_set(const ElementSet& a, const ElementSet& b);
ElementSet intersect(const ElementSet& a, const ElementSet& b);
ElementSet set_union(const ElementSet& a, const ElementSet& b);

/// b * A elementwise. Throws ZeroDilateError when b = 0.
ElementSet dilate(FieldElement b, const ElementSet& a);
ElementSet translate(FieldElement t, const ElementSet& a);
ElementSet negate(const ElementSet& a);
/// {1/a : a in A}. Throws ZeroElementError when 0 is a member.
ElementSet invert_elements(const ElementSet& a);

/// Representation counts r(s) = #{(a, b) in A x B : a + b = s}, sorted by s.
/// Only sums with r(s) > 0 appear. Counts are tallied in a dense table when
/// p <= 2^20 and in a hash map for larger moduli.
std::vector<std::pair<std::uint32_t, std::uint64_t>> representation_count(
    const ElementSet& a, const ElementSet& b);

/// Additive energy E(A) = sum over s of r_{A+A}(s)^2.
std::uint64_t additive_energy(const ElementSet& a);

/// R = {(a - b) / (c - d) : a, b, c, d in Y, c != d}. Requires |Y| >= 2.
ElementSet ratio_set(const ElementSet& y);

struct SumProductStats {
    std::uint64_t sum_size;
    std::uint64_t product_size;
    std::uint64_t max_size;
    double exponent;  // log max(|A+A|, |A.A|) / log |A|
};

SumProductStats sum_product_stats(const ElementSet& a);

struct PlunneckeCheck {
    std::uint64_t left;        // |X_1 + ... + X_k|
    double right;              // prod |Y + X_i| / |Y|^(k-1)
    bool holds;                // exact integer cross-multiplied comparison
    std::vector<std::uint64_t> summand_sizes;  // |Y + X_i| per i
};

/// Checks |X_1 + ... + X_k| <= prod_i |Y + X_i| / |Y|^(k-1) for a dummy Y.
PlunneckeCheck plunnecke_check(const ElementSet& y,
                               std::span<const ElementSet> xs);

struct PlunneckeWitness {
    ElementSet y_prime;
    std::uint64_t left;   // |Y' + X_1 + ... + X_k|
    double right;         // (prod |Y + X_i| / |Y|^(k-1)) * |Y'|
    bool holds;
};

/// Exhaustive search over nonempty Y' <= Y for the subset minimizing
/// |Y' + X_1 + ... + X_k| / |Y'|; ties prefer larger |Y'|, then the earliest
/// subset in ascending bitmask order over the sorted elements of Y.
/// Requires |Y| <= 12 (SearchTooLargeError otherwise).
PlunneckeWitness plunnecke_witness_search(const ElementSet& y,
                                          std::span<const ElementSet> xs);

struct RuzsaTriangleCheck {
    std::uint64_t d12, d13, d32;
    std::uint64_t x3;
    bool holds;  // |X1 - X2| * |X3| <= |X1 - X3| * |X3 - X2|
};

RuzsaTriangleCheck ruzsa_triangle_check(const ElementSet& x1,
                                        const ElementSet& x2,
                                        const ElementSet& x3);

struct CoveringResult {
    std::vector<std::uint32_t> offsets;  // translate offsets, in greedy order
    std::uint64_t covered;               // elements of X1 covered
    double covered_fraction;
    std::uint64_t min_sumset;            // min(|X1 + X2|, |X1 - X2|)
    double bound_ratio;                  // |offsets| * |X2| / min_sumset
};

/// Greedy almost-covering of X1 by translates of X2: candidate offsets come
/// from X1 - X2, each step takes the offset covering the most uncovered
/// elements (ties: smallest canonical offset), stopping once the uncovered
/// count drops to floor(eps * |X1|). Requires 0 < eps < 1 and nonempty sets.
CoveringResult covering_translates(const ElementSet& x1, const ElementSet& x2,
                                   double eps);

}  // namespace pflab
