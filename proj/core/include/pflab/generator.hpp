#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pflab/addcomb.hpp"

namespace pflab {

enum class GeneratorKind {
    Random,                  // n distinct uniform residues
    Interval,                // {start, start+1, ..., start+n-1} mod p
    ArithmeticProgression,   // start + i*step, nonzero step
    GeometricProgression,    // start * ratio^i, retries the next ratio on collision
    MultiplicativeSubgroup,  // the subgroup of F_p^* of the given order
    Union,                   // union of component specs over the same field
    Explicit,                // fixed integer list reduced mod p
};

/// Deterministic description of one element-set instance. Generation is a
/// pure function of the spec (the seed is part of it).
struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::Random;
    std::uint32_t modulus = 3;
    std::uint64_t n = 0;     // target size; 0 lets Union/Explicit derive it
    std::uint64_t seed = 0;  // consumed by Random only, carried by all kinds
    std::uint64_t start = 0;
    std::uint64_t step = 1;
    std::uint64_t ratio = 2;
    std::uint64_t order = 0;
    std::vector<GeneratorSpec> parts;      // Union components
    std::vector<std::int64_t> elements;    // Explicit members
};

const char* generator_kind_name(GeneratorKind kind);
GeneratorKind generator_kind_from_name(const std::string& name);

/// Produces exactly the set the spec describes. Size-driving kinds emit n
/// distinct residues; Union and Explicit validate n when it is nonzero.
/// Throws SizeExceedsFieldError when n cannot fit, BadSubgroupOrderError
/// when the requested order does not divide p-1, and InputError on
/// degenerate parameters (zero progression step, zero geometric start,
/// mismatched Union moduli or declared sizes).
ElementSet generate_set(const GeneratorSpec& spec);

}  // namespace pflab
