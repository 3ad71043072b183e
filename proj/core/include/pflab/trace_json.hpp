#pragma once

#include <string>

#include "pflab/pipeline.hpp"

namespace pflab {

/// Canonical JSON rendering of a grid pipeline trace (schema
/// "pflab-beck-trace/1"): two-space indentation, insertion-ordered keys,
/// non-finite numbers serialized as null. Byte-identical for identical
/// traces.
std::string beck_trace_to_json(const BeckTrace& t);

/// Canonical JSON rendering of an incidence pipeline trace (schema
/// "pflab-incidence-trace/1"); the merged grid trace is embedded as a
/// nested object.
std::string incidence_trace_to_json(const IncidenceTrace& t);

}  // namespace pflab
