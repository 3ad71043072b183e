#include "pflab/generator.hpp"

#include <algorithm>
#include <unordered_set>

#include "pflab/errors.hpp"
#include "pflab/field.hpp"
#include "pflab/rng.hpp"

namespace pflab {

namespace {

using u32 = std::uint32_t;
using u64 = std::uint64_t;

std::vector<u64> prime_factors(u64 m) {
    std::vector<u64> out;
    for (u64 q = 2; q * q <= m; ++q) {
        if (m % q) continue;
        out.push_back(q);
        while (m % q == 0) m /= q;
    }
    if (m > 1) out.push_back(m);
    return out;
}

/// Smallest generator of F_p^*.
u32 primitive_root(u32 p) {
    if (p == 3) return 2;
    const std::vector<u64> factors = prime_factors(p - 1);
    for (u32 g = 2; g < p; ++g) {
        bool ok = true;
        for (u64 q : factors) {
            if (pow_mod(g, (p - 1) / q, p) == 1) {
                ok = false;
                break;
            }
        }
        if (ok) return g;
    }
    throw InternalCheckError("prime field without a primitive root");
}

ElementSet generate_random(const PrimeField& f, const GeneratorSpec& spec) {
    const u32 p = f.modulus();
    SplitMix64 rng(spec.seed);
    std::vector<u32> out;
    std::unordered_set<u32> seen;
    out.reserve(spec.n);
    while (out.size() < spec.n) {
        const u32 v = u32(rng.next_below(p));
        if (seen.insert(v).second) out.push_back(v);
    }
    return ElementSet(f, std::move(out));
}

ElementSet generate_geometric(const PrimeField& f, const GeneratorSpec& spec) {
    const u32 p = f.modulus();
    if (spec.n > u64(p) - 1)
        throw SizeExceedsFieldError(
            "geometric progression cannot exceed the multiplicative group");
    const u32 start = u32(spec.start % p);
    if (start == 0)
        throw InputError("geometric progression start must be nonzero mod p");
    u32 r = u32(spec.ratio % p);
    for (u32 attempts = 0; attempts < p; ++attempts, r = (r + 1) % p) {
        if (r == 0) continue;
        std::vector<u32> out;
        std::unordered_set<u32> seen;
        u32 v = start;
        bool collided = false;
        while (out.size() < spec.n) {
            if (!seen.insert(v).second) {
                collided = true;
                break;
            }
            out.push_back(v);
            v = mul_mod(v, r, p);
        }
        if (!collided) return ElementSet(f, std::move(out));
    }
    throw InternalCheckError("no ratio reaches the requested progression size");
}

ElementSet generate_subgroup(const PrimeField& f, const GeneratorSpec& spec) {
    const u32 p = f.modulus();
    if (spec.order == 0 || (u64(p) - 1) % spec.order != 0)
        throw BadSubgroupOrderError("subgroup order must divide p - 1");
    if (spec.n != 0 && spec.n != spec.order)
        throw InputError("declared size disagrees with the subgroup order");
    const u32 g = primitive_root(p);
    const u32 h = u32(pow_mod(g, (u64(p) - 1) / spec.order, p));
    std::vector<u32> out;
    out.reserve(spec.order);
    u32 v = 1;
    for (u64 i = 0; i < spec.order; ++i) {
        out.push_back(v);
        v = mul_mod(v, h, p);
    }
    return ElementSet(f, std::move(out));
}

}  // namespace

const char* generator_kind_name(GeneratorKind kind) {
    switch (kind) {
        case GeneratorKind::Random: return "random";
        case GeneratorKind::Interval: return "interval";
        case GeneratorKind::ArithmeticProgression: return "arithmetic_progression";
        case GeneratorKind::GeometricProgression: return "geometric_progression";
        case GeneratorKind::MultiplicativeSubgroup: return "multiplicative_subgroup";
        case GeneratorKind::Union: return "union";
        case GeneratorKind::Explicit: return "explicit";
    }
    throw InputError("unknown generator kind");
}

GeneratorKind generator_kind_from_name(const std::string& name) {
    if (name == "random") return GeneratorKind::Random;
    if (name == "interval") return GeneratorKind::Interval;
    if (name == "arithmetic_progression") return GeneratorKind::ArithmeticProgression;
    if (name == "geometric_progression") return GeneratorKind::GeometricProgression;
    if (name == "multiplicative_subgroup") return GeneratorKind::MultiplicativeSubgroup;
    if (name == "union") return GeneratorKind::Union;
    if (name == "explicit") return GeneratorKind::Explicit;
    throw InputError("unknown generator kind: " + name);
}

ElementSet generate_set(const GeneratorSpec& spec) {
    const PrimeField f(spec.modulus);
    const u32 p = f.modulus();
    if (spec.n > p)
        throw SizeExceedsFieldError("requested size exceeds the field size");

    switch (spec.kind) {
        case GeneratorKind::Random:
            return generate_random(f, spec);
        case GeneratorKind::Interval: {
            std::vector<u32> out;
            out.reserve(spec.n);
            for (u64 i = 0; i < spec.n; ++i)
                out.push_back(add_mod(u32(spec.start % p), u32(i % p), p));
            return ElementSet(f, std::move(out));
        }
        case GeneratorKind::ArithmeticProgression: {
            const u32 step = u32(spec.step % p);
            if (step == 0 && spec.n > 1)
                throw InputError("progression step must be nonzero mod p");
            std::vector<u32> out;
            out.reserve(spec.n);
            u32 v = u32(spec.start % p);
            for (u64 i = 0; i < spec.n; ++i) {
                out.push_back(v);
                v = add_mod(v, step, p);
            }
            return ElementSet(f, std::move(out));
        }
        case GeneratorKind::GeometricProgression:
            return generate_geometric(f, spec);
        case GeneratorKind::MultiplicativeSubgroup:
            return generate_subgroup(f, spec);
        case GeneratorKind::Union: {
            if (spec.parts.empty())
                throw InputError("union spec needs at least one component");
            std::vector<u32> all;
            for (const GeneratorSpec& part : spec.parts) {
                if (part.modulus != spec.modulus)
                    throw InputError("union components must share the field");
                const ElementSet s = generate_set(part);
                all.insert(all.end(), s.residues().begin(), s.residues().end());
            }
            ElementSet out(f, std::move(all));
            if (spec.n != 0 && out.size() != spec.n)
                throw InputError("declared size disagrees with the union");
            return out;
        }
        case GeneratorKind::Explicit: {
            ElementSet out = ElementSet::from_integers(
                f, std::span<const std::int64_t>(spec.elements));
            if (spec.n != 0 && out.size() != spec.n)
                throw InputError("declared size disagrees with the element list");
            return out;
        }
    }
    throw InputError("unknown generator kind");
}

}  // namespace pflab
