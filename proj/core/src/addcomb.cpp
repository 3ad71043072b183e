#include "pflab/addcomb.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "pflab/errors.hpp"

namespace pflab {

namespace {

constexpr std::uint32_t kDenseLimit = 1u << 20;

void check_shared(const ElementSet& a, const ElementSet& b) {
    if (a.modulus() != b.modulus())
        throw FieldMismatchError("sets over different moduli combined");
}

/// Membership and accumulation helper: dense bit table for small moduli,
/// hash set above kDenseLimit.
class ResidueMask {
public:
    explicit ResidueMask(std::uint32_t p) : p_(p) {
        if (p_ <= kDenseLimit) bits_.assign((p_ + 63) / 64, 0);
    }

    void insert(std::uint32_t r) {
        if (!bits_.empty())
            bits_[r >> 6] |= std::uint64_t(1) << (r & 63);
        else
            hash_.insert(r);
    }

    bool contains(std::uint32_t r) const {
        if (!bits_.empty()) return (bits_[r >> 6] >> (r & 63)) & 1;
        return hash_.count(r) != 0;
    }

    std::vector<std::uint32_t> sorted_members() const {
        std::vector<std::uint32_t> out;
        if (!bits_.empty()) {
            for (std::uint32_t w = 0; w < bits_.size(); ++w) {
                std::uint64_t word = bits_[w];
                while (word) {
                    int bit = __builtin_ctzll(word);
                    out.push_back((w << 6) + bit);
                    word &= word - 1;
                }
            }
        } else {
            out.assign(hash_.begin(), hash_.end());
            std::sort(out.begin(), out.end());
        }
        return out;
    }

private:
    std::uint32_t p_;
    std::vector<std::uint64_t> bits_;
    std::unordered_set<std::uint32_t> hash_;
};

ElementSet from_mask(const PrimeField& f, const ResidueMask& m) {
    return ElementSet(f, m.sorted_members());
}

std::uint64_t sumset_size(const ElementSet& a, const ElementSet& b) {
    return sumset(a, b).size();
}

}  // namespace

ElementSet::ElementSet(const PrimeField& field, std::vector<std::uint32_t> residues)
    : p_(field.modulus()), v_(std::move(residues)) {
    for (auto& r : v_) r %= p_;
    std::sort(v_.begin(), v_.end());
    v_.erase(std::unique(v_.begin(), v_.end()), v_.end());
}

ElementSet ElementSet::from_integers(const PrimeField& field,
                                     std::span<const std::int64_t> values) {
    std::vector<std::uint32_t> r;
    r.reserve(values.size());
    for (std::int64_t v : values) r.push_back(field.from_int(v).value());
    return ElementSet(field, std::move(r));
}

bool ElementSet::contains(std::uint32_t residue) const {
    return std::binary_search(v_.begin(), v_.end(), residue);
}

ElementSet sumset(const ElementSet& a, const ElementSet& b) {
    check_shared(a, b);
    PrimeField f(a.modulus());
    ResidueMask m(a.modulus());
    for (auto x : a.residues())
        for (auto y : b.residues()) m.insert(add_mod(x, y, a.modulus()));
    return from_mask(f, m);
}

ElementSet difference_set(const ElementSet& a, const ElementSet& b) {
    check_shared(a, b);
    PrimeField f(a.modulus());
    ResidueMask m(a.modulus());
    for (auto x : a.residues())
        for (auto y : b.residues()) m.insert(sub_mod(x, y, a.modulus()));
    return from_mask(f, m);
}

ElementSet product_set(const ElementSet& a, const ElementSet& b) {
    check_shared(a, b);
    PrimeField f(a.modulus());
    ResidueMask m(a.modulus());
    for (auto x : a.residues())
        for (auto y : b.residues()) m.insert(mul_mod(x, y, a.modulus()));
    return from_mask(f, m);
}

ElementSet intersect(const ElementSet& a, const ElementSet& b) {
    check_shared(a, b);
    std::vector<std::uint32_t> out;
    std::set_intersection(a.residues().begin(), a.residues().end(),
                          b.residues().begin(), b.residues().end(),
                          std::back_inserter(out));
    return ElementSet(PrimeField(a.modulus()), std::move(out));
}

ElementSet set_union(const ElementSet& a, const ElementSet& b) {
    check_shared(a, b);
    std::vector<std::uint32_t> out;
    std::set_union(a.residues().begin(), a.residues().end(),
                   b.residues().begin(), b.residues().end(),
                   std::back_inserter(out));
    return ElementSet(PrimeField(a.modulus()), std::move(out));
}

ElementSet dilate(FieldElement b, const ElementSet& a) {
    if (b.modulus() != a.modulus())
        throw FieldMismatchError("dilation scalar from a different field");
    if (b.is_zero()) throw ZeroDilateError("dilation by zero collapses the set");
    std::vector<std::uint32_t> out;
    out.reserve(a.size());
    for (auto x : a.residues()) out.push_back(mul_mod(b.value(), x, a.modulus()));
    return ElementSet(PrimeField(a.modulus()), std::move(out));
}

ElementSet translate(FieldElement t, const ElementSet& a) {
    if (t.modulus() != a.modulus())
        throw FieldMismatchError("translation scalar from a different field");
    std::vector<std::uint32_t> out;
    out.reserve(a.size());
    for (auto x : a.residues()) out.push_back(add_mod(t.value(), x, a.modulus()));
    return ElementSet(PrimeField(a.modulus()), std::move(out));
}

ElementSet negate(const ElementSet& a) {
    std::vector<std::uint32_t> out;
    out.reserve(a.size());
    for (auto x : a.residues()) out.push_back(neg_mod(x, a.modulus()));
    return ElementSet(PrimeField(a.modulus()), std::move(out));
}

ElementSet invert_elements(const ElementSet& a) {
    if (a.contains(0)) throw ZeroElementError("cannot invert a set containing 0");
    std::vector<std::uint32_t> out;
    out.reserve(a.size());
    for (auto x : a.residues()) out.push_back(inv_mod(x, a.modulus()));
    return ElementSet(PrimeField(a.modulus()), std::move(out));
}

std::vector<std::pair<std::uint32_t, std::uint64_t>> representation_count(
    const ElementSet& a, const ElementSet& b) {
    check_shared(a, b);
    const std::uint32_t p = a.modulus();
    std::vector<std::pair<std::uint32_t, std::uint64_t>> out;
    if (p <= kDenseLimit) {
        std::vector<std::uint64_t> counts(p, 0);
        for (auto x : a.residues())
            for (auto y : b.residues()) ++counts[add_mod(x, y, p)];
        for (std::uint32_t s = 0; s < p; ++s)
            if (counts[s] > 0) out.emplace_back(s, counts[s]);
    } else {
        std::unordered_map<std::uint32_t, std::uint64_t> counts;
        for (auto x : a.residues())
            for (auto y : b.residues()) ++counts[add_mod(x, y, p)];
        out.assign(counts.begin(), counts.end());
        std::sort(out.begin(), out.end());
    }
    return out;
}

std::uint64_t additive_energy(const ElementSet& a) {
    std::uint64_t e = 0;
    for (const auto& [s, r] : representation_count(a, a)) e += r * r;
    return e;
}

ElementSet ratio_set(const ElementSet& y) {
    if (y.size() < 2)
        throw TooSmallError("ratio set needs at least two elements");
    const std::uint32_t p = y.modulus();
    // (a - b)/(c - d) depends only on the two difference values, so the
    // quadruple loop reduces to pairs from the difference set.
    ElementSet diffs = difference_set(y, y);
    ResidueMask m(p);
    for (auto d : diffs.residues()) {
        if (d == 0) continue;
        std::uint32_t dinv = inv_mod(d, p);
        for (auto n : diffs.residues()) m.insert(mul_mod(n, dinv, p));
    }
    return from_mask(PrimeField(p), m);
}

SumProductStats sum_product_stats(const ElementSet& a) {
    if (a.size() < 2)
        throw TooSmallError("sum-product statistics need at least two elements");
    SumProductStats s{};
    s.sum_size = sumset(a, a).size();
    s.product_size = product_set(a, a).size();
    s.max_size = std::max(s.sum_size, s.product_size);
    s.exponent = std::log(double(s.max_size)) / std::log(double(a.size()));
    return s;
}

PlunneckeCheck plunnecke_check(const ElementSet& y,
                               std::span<const ElementSet> xs) {
    if (y.empty()) throw TooSmallError("dummy set must be nonempty");
    if (xs.empty()) throw TooSmallError("need at least one summand");
    for (const auto& x : xs) {
        check_shared(y, x);
        if (x.empty()) throw TooSmallError("summands must be nonempty");
    }
    PlunneckeCheck c{};
    ElementSet acc = xs[0];
    for (std::size_t i = 1; i < xs.size(); ++i) acc = sumset(acc, xs[i]);
    c.left = acc.size();
    unsigned __int128 rhs = 1;
    double right = 1.0;
    for (const auto& x : xs) {
        std::uint64_t s = sumset_size(y, x);
        c.summand_sizes.push_back(s);
        rhs *= s;
        right *= double(s);
    }
    unsigned __int128 lhs = c.left;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        lhs *= y.size();
        right /= double(y.size());
    }
    c.right = right;
    c.holds = lhs <= rhs;
    return c;
}

PlunneckeWitness plunnecke_witness_search(const ElementSet& y,
                                          std::span<const ElementSet> xs) {
    if (y.size() > 12)
        throw SearchTooLargeError("subset search limited to |Y| <= 12, got " +
                                  std::to_string(y.size()));
    if (y.empty()) throw TooSmallError("dummy set must be nonempty");
    if (xs.empty()) throw TooSmallError("need at least one summand");
    for (const auto& x : xs) {
        check_shared(y, x);
        if (x.empty()) throw TooSmallError("summands must be nonempty");
    }
    const PrimeField f(y.modulus());
    ElementSet total = xs[0];
    for (std::size_t i = 1; i < xs.size(); ++i) total = sumset(total, xs[i]);

    const auto& elems = y.residues();
    const std::size_t n = elems.size();
    std::uint64_t best_left = 0, best_size = 0;
    std::uint32_t best_mask = 0;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::vector<std::uint32_t> sub;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) sub.push_back(elems[i]);
        ElementSet yp(f, sub);
        std::uint64_t left = sumset(yp, total).size();
        std::uint64_t size = yp.size();
        // Minimize left/size; ties prefer the larger subset, then the
        // earlier bitmask.
        bool better = best_size == 0 || left * best_size < best_left * size ||
                      (left * best_size == best_left * size && size > best_size);
        if (better) {
            best_left = left;
            best_size = size;
            best_mask = mask;
        }
    }
    std::vector<std::uint32_t> sub;
    for (std::size_t i = 0; i < n; ++i)
        if (best_mask & (1u << i)) sub.push_back(elems[i]);
    PlunneckeWitness w{ElementSet(f, sub), best_left, 0.0, false};

    unsigned __int128 rhs = w.y_prime.size();
    double right = double(w.y_prime.size());
    for (const auto& x : xs) {
        std::uint64_t s = sumset_size(y, x);
        rhs *= s;
        right *= double(s);
    }
    unsigned __int128 lhs = w.left;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        lhs *= y.size();
        right /= double(y.size());
    }
    w.right = right;
    w.holds = lhs <= rhs;
    return w;
}

RuzsaTriangleCheck ruzsa_triangle_check(const ElementSet& x1,
                                        const ElementSet& x2,
                                        const ElementSet& x3) {
    if (x1.empty() || x2.empty() || x3.empty())
        throw TooSmallError("triangle inequality needs nonempty sets");
    check_shared(x1, x2);
    check_shared(x1, x3);
    RuzsaTriangleCheck c{};
    c.d12 = difference_set(x1, x2).size();
    c.d13 = difference_set(x1, x3).size();
    c.d32 = difference_set(x3, x2).size();
    c.x3 = x3.size();
    c.holds = (unsigned __int128)(c.d12)*c.x3 <= (unsigned __int128)(c.d13)*c.d32;
    return c;
}

CoveringResult covering_translates(const ElementSet& x1, const ElementSet& x2,
                                   double eps) {
    if (x1.empty() || x2.empty())
        throw TooSmallError("covering needs nonempty sets");
    check_shared(x1, x2);
    if (!(eps > 0.0 && eps < 1.0))
        throw InputError("covering tolerance must lie in (0, 1)");
    const std::uint32_t p = x1.modulus();

    CoveringResult res{};
    res.min_sumset = std::min<std::uint64_t>(sumset(x1, x2).size(),
                                             difference_set(x1, x2).size());

    std::vector<std::uint32_t> candidates = difference_set(x1, x2).residues();
    const auto& targets = x1.residues();
    std::vector<char> covered(targets.size(), 0);
    std::uint64_t uncovered = targets.size();
    // covered >= (1 - eps)|X1| is equivalent to uncovered <= floor(eps |X1|).
    const std::uint64_t allowed_misses =
        static_cast<std::uint64_t>(eps * double(targets.size()));

    auto index_of = [&targets](std::uint32_t r) -> std::ptrdiff_t {
        auto it = std::lower_bound(targets.begin(), targets.end(), r);
        if (it == targets.end() || *it != r) return -1;
        return it - targets.begin();
    };

    while (uncovered > allowed_misses) {
        std::uint32_t best_t = 0;
        std::uint64_t best_gain = 0;
        for (std::uint32_t t : candidates) {
            std::uint64_t gain = 0;
            for (std::uint32_t x : x2.residues()) {
                std::ptrdiff_t i = index_of(add_mod(t, x, p));
                if (i >= 0 && !covered[i]) ++gain;
            }
            if (gain > best_gain) {  // ties keep the smaller offset
                best_gain = gain;
                best_t = t;
            }
        }
        if (best_gain == 0)
            throw InternalCheckError("covering made no progress");  // unreachable
        res.offsets.push_back(best_t);
        for (std::uint32_t x : x2.residues()) {
            std::ptrdiff_t i = index_of(add_mod(best_t, x, p));
            if (i >= 0 && !covered[i]) {
                covered[i] = 1;
                --uncovered;
            }
        }
    }
    res.covered = targets.size() - uncovered;
    res.covered_fraction = double(res.covered) / double(targets.size());
    res.bound_ratio =
        double(res.offsets.size()) * double(x2.size()) / double(res.min_sumset);
    return res;
}

}  // namespace pflab
