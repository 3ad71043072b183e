#pragma once

#include <string>

#include "pflab/bsg.hpp"
#include "pflab/generator.hpp"
#include "pflab/incidence.hpp"
#include "pflab/pipeline.hpp"

namespace pflab {

/// Reads a whole file into a string. InputError when the file cannot be read.
std::string read_text_file(const std::string& path);

/// Parses a generator spec from inline JSON text (the --gen form).
/// Unknown fields and schema violations raise SchemaMismatchError; malformed
/// JSON raises CorruptRecordError.
GeneratorSpec generator_spec_from_text(const std::string& text);

/// Parses grid-chain tuning knobs from JSON text. All fields are optional
/// and default as in BeckParams; the nested "bsg" object carries the
/// extraction thresholds. Unknown fields raise SchemaMismatchError.
BeckParams beck_params_from_text(const std::string& text);

/// Loads an element set from a JSON file. Three layouts are accepted:
///   * a bare integer array, reduced mod p:        [3, 5, -1]
///   * a wrapped array:                            {"elements": [3, 5, 7]}
///   * a generator spec:                           {"generator": {...}}
/// A generator spec must agree with the requested field modulus.
ElementSet load_element_set(const PrimeField& f, const std::string& path);

/// Loads projective points from a JSON file: a bare array of coordinate
/// triples [x, y, z], or {"points": [[...], ...]}.
ProjPointSet load_proj_points(const PrimeField& f, const std::string& path);

/// Loads projective lines from a JSON file: a bare array of coefficient
/// triples [a, b, c], or {"lines": [[...], ...]}.
ProjLineSet load_proj_lines(const PrimeField& f, const std::string& path);

/// Loads a bipartite pair-graph instance:
///   {"modulus": p, "x": [...], "y": [...], "edges": [[x, y], ...]}
/// where each edge lists a member of x and a member of y by value
/// (reduced mod p; a non-member endpoint is a schema violation).
PairGraph load_pair_graph(const std::string& path);

}  // namespace pflab
