#pragma once

#include <cstdint>

#include "pflab/errors.hpp"

namespace pflab {

/// Deterministic primality test for n < 2^32: trial division below 2^16,
/// Miller-Rabin with witnesses {2, 7, 61} above (exact in that range).
bool is_prime(std::uint64_t n);

// Raw residue arithmetic. Inputs must already lie in [0, p); products are
// formed in 64 bits, which is safe for p < 2^31.
inline std::uint32_t add_mod(std::uint32_t a, std::uint32_t b, std::uint32_t p) {
    std::uint64_t s = std::uint64_t(a) + b;
    if (s >= p) s -= p;
    return static_cast<std::uint32_t>(s);
}

inline std::uint32_t sub_mod(std::uint32_t a, std::uint32_t b, std::uint32_t p) {
    return a >= b ? a - b : static_cast<std::uint32_t>(a + std::uint64_t(p) - b);
}

inline std::uint32_t neg_mod(std::uint32_t a, std::uint32_t p) {
    return a == 0 ? 0 : p - a;
}

inline std::uint32_t mul_mod(std::uint32_t a, std::uint32_t b, std::uint32_t p) {
    return static_cast<std::uint32_t>((std::uint64_t(a) * b) % p);
}

/// Modular inverse by extended Euclid. Throws ZeroInverseError on a = 0.
std::uint32_t inv_mod(std::uint32_t a, std::uint32_t p);

std::uint32_t pow_mod(std::uint32_t base, std::uint64_t exp, std::uint32_t p);

class PrimeField;

/// One residue of a prime field. Carries its modulus so that elements of
/// different fields can never be combined silently.
class FieldElement {
public:
    FieldElement() = default;  // null element; any arithmetic on it throws

    std::uint32_t value() const { return v_; }
    std::uint32_t modulus() const { return p_; }

    friend FieldElement operator+(FieldElement a, FieldElement b) {
        check_same(a, b);
        return FieldElement(add_mod(a.v_, b.v_, a.p_), a.p_);
    }
    friend FieldElement operator-(FieldElement a, FieldElement b) {
        check_same(a, b);
        return FieldElement(sub_mod(a.v_, b.v_, a.p_), a.p_);
    }
    friend FieldElement operator*(FieldElement a, FieldElement b) {
        check_same(a, b);
        return FieldElement(mul_mod(a.v_, b.v_, a.p_), a.p_);
    }
    friend FieldElement operator/(FieldElement a, FieldElement b) {
        check_same(a, b);
        return FieldElement(mul_mod(a.v_, inv_mod(b.v_, b.p_), a.p_), a.p_);
    }
    FieldElement operator-() const {
        require_live();
        return FieldElement(neg_mod(v_, p_), p_);
    }

    FieldElement inverse() const {
        require_live();
        return FieldElement(inv_mod(v_, p_), p_);
    }
    FieldElement pow(std::uint64_t e) const {
        require_live();
        return FieldElement(pow_mod(v_, e, p_), p_);
    }

    bool is_zero() const { return v_ == 0; }

    friend bool operator==(FieldElement a, FieldElement b) {
        return a.p_ == b.p_ && a.v_ == b.v_;
    }
    friend bool operator!=(FieldElement a, FieldElement b) { return !(a == b); }
    /// Canonical order: by residue value. Comparing across fields throws.
    friend bool operator<(FieldElement a, FieldElement b) {
        check_same(a, b);
        return a.v_ < b.v_;
    }

private:
    friend class PrimeField;
    FieldElement(std::uint32_t v, std::uint32_t p) : v_(v), p_(p) {}

    void require_live() const {
        if (p_ == 0) throw FieldMismatchError("operation on null field element");
    }
    static void check_same(FieldElement a, FieldElement b) {
        a.require_live();
        if (a.p_ != b.p_)
            throw FieldMismatchError("elements from different fields combined");
    }

    std::uint32_t v_ = 0;
    std::uint32_t p_ = 0;
};

/// Context for F_p, 3 <= p < 2^31. Construction proves primality; all
/// elements handed out are canonical residues in [0, p).
class PrimeField {
public:
    explicit PrimeField(std::uint64_t p);

    std::uint32_t modulus() const { return p_; }

    /// Reduce an unsigned value into the field.
    FieldElement operator()(std::uint64_t v) const {
        return FieldElement(static_cast<std::uint32_t>(v % p_), p_);
    }
    /// Reduce a signed value into the field (negative values wrap).
    FieldElement from_int(std::int64_t v) const {
        std::int64_t r = v % static_cast<std::int64_t>(p_);
        if (r < 0) r += p_;
        return FieldElement(static_cast<std::uint32_t>(r), p_);
    }
    FieldElement zero() const { return FieldElement(0, p_); }
    FieldElement one() const { return FieldElement(1, p_); }

    friend bool operator==(const PrimeField& a, const PrimeField& b) {
        return a.p_ == b.p_;
    }

private:
    std::uint32_t p_;
};

/// The unique affine map sending y1 -> 0 and y2 -> 1, applied to t:
/// (t - y1) / (y2 - y1). Throws DegenerateMapError when y1 = y2.
FieldElement affine_normalize(FieldElement t, FieldElement y1, FieldElement y2);

}  // namespace pflab
