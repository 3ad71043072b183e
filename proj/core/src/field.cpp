#include "pflab/field.hpp"

#include <string>

namespace pflab {

namespace {

bool miller_rabin_witness(std::uint64_t n, std::uint64_t a, std::uint64_t d, int r) {
    a %= n;
    if (a == 0) return false;
    // n < 2^32, so products fit in unsigned __int128 comfortably; 64-bit
    // squaring would already overflow for n near 2^32.
    auto mulm = [n](std::uint64_t x, std::uint64_t y) {
        return static_cast<std::uint64_t>((unsigned __int128)(x)*y % n);
    };
    std::uint64_t x = 1, base = a, e = d;
    while (e > 0) {
        if (e & 1) x = mulm(x, base);
        base = mulm(base, base);
        e >>= 1;
    }
    if (x == 1 || x == n - 1) return false;
    for (int i = 1; i < r; ++i) {
        x = mulm(x, x);
        if (x == n - 1) return false;
    }
    return true;  // a witnesses compositeness
}

}  // namespace

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    if (n < (1u << 16)) {
        for (std::uint64_t d = 2; d * d <= n; ++d)
            if (n % d == 0) return false;
        return true;
    }
    if (n % 2 == 0) return false;
    std::uint64_t d = n - 1;
    int r = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++r;
    }
    // {2, 7, 61} is exact for all n < 4,759,123,141.
    for (std::uint64_t a : {2ull, 7ull, 61ull})
        if (miller_rabin_witness(n, a, d, r)) return false;
    return true;
}

std::uint32_t inv_mod(std::uint32_t a, std::uint32_t p) {
    if (a == 0) throw ZeroInverseError("inverse of zero in F_" + std::to_string(p));
    std::int64_t t = 0, new_t = 1;
    std::int64_t r = p, new_r = a;
    while (new_r != 0) {
        std::int64_t q = r / new_r;
        std::int64_t tmp = t - q * new_t;
        t = new_t;
        new_t = tmp;
        tmp = r - q * new_r;
        r = new_r;
        new_r = tmp;
    }
    // r = gcd(a, p) = 1 because p is prime and a != 0 mod p.
    if (t < 0) t += p;
    return static_cast<std::uint32_t>(t);
}

std::uint32_t pow_mod(std::uint32_t base, std::uint64_t exp, std::uint32_t p) {
    std::uint64_t acc = 1 % p, b = base % p;
    while (exp > 0) {
        if (exp & 1) acc = acc * b % p;
        b = b * b % p;
        exp >>= 1;
    }
    return static_cast<std::uint32_t>(acc);
}

PrimeField::PrimeField(std::uint64_t p) {
    if (p < 3) throw TooSmallError("modulus must be at least 3, got " + std::to_string(p));
    if (p >= (1ull << 31))
        throw InputError("modulus must be below 2^31, got " + std::to_string(p));
    if (!is_prime(p)) throw NotPrimeError(std::to_string(p) + " is not prime");
    p_ = static_cast<std::uint32_t>(p);
}

FieldElement affine_normalize(FieldElement t, FieldElement y1, FieldElement y2) {
    if (y1 == y2)
        throw DegenerateMapError("affine normalization needs two distinct anchors");
    return (t - y1) / (y2 - y1);
}

}  // namespace pflab
