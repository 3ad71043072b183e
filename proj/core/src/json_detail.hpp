#pragma once

// Internal JSON builders and strict parsers shared by the serialization,
// scanning, and input-loading translation units. Not installed.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string>

#include <nlohmann/json.hpp>

#include "pflab/errors.hpp"
#include "pflab/generator.hpp"
#include "pflab/pipeline.hpp"

namespace pflab::detail {

using json = nlohmann::ordered_json;

inline void require_keys(const json& j, std::initializer_list<const char*> allowed,
                         const char* what) {
    if (!j.is_object())
        throw SchemaMismatchError(std::string(what) + ": expected a JSON object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed) {
            if (item.key() == k) {
                known = true;
                break;
            }
        }
        if (!known)
            throw SchemaMismatchError(std::string(what) + ": unknown field '" +
                                      item.key() + "'");
    }
}

inline std::uint64_t get_u64(const json& j, const char* key, const char* what,
                             bool required = true, std::uint64_t fallback = 0) {
    if (!j.contains(key)) {
        if (required)
            throw SchemaMismatchError(std::string(what) + ": missing field '" +
                                      key + "'");
        return fallback;
    }
    const json& v = j.at(key);
    if (!v.is_number_unsigned() && !v.is_number_integer())
        throw SchemaMismatchError(std::string(what) + ": field '" + key +
                                  "' must be an integer");
    if (v.is_number_integer() && v.get<std::int64_t>() < 0)
        throw SchemaMismatchError(std::string(what) + ": field '" + key +
                                  "' must be nonnegative");
    return v.get<std::uint64_t>();
}

inline double get_double(const json& j, const char* key, const char* what,
                         bool required = true, double fallback = 0.0) {
    if (!j.contains(key)) {
        if (required)
            throw SchemaMismatchError(std::string(what) + ": missing field '" +
                                      key + "'");
        return fallback;
    }
    const json& v = j.at(key);
    if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (!v.is_number())
        throw SchemaMismatchError(std::string(what) + ": field '" + key +
                                  "' must be a number");
    return v.get<double>();
}

inline std::string get_string(const json& j, const char* key, const char* what,
                              bool required = true, std::string fallback = "") {
    if (!j.contains(key)) {
        if (required)
            throw SchemaMismatchError(std::string(what) + ": missing field '" +
                                      key + "'");
        return fallback;
    }
    const json& v = j.at(key);
    if (!v.is_string())
        throw SchemaMismatchError(std::string(what) + ": field '" + key +
                                  "' must be a string");
    return v.get<std::string>();
}

inline bool get_bool(const json& j, const char* key, const char* what,
                     bool required = true, bool fallback = false) {
    if (!j.contains(key)) {
        if (required)
            throw SchemaMismatchError(std::string(what) + ": missing field '" +
                                      key + "'");
        return fallback;
    }
    const json& v = j.at(key);
    if (!v.is_boolean())
        throw SchemaMismatchError(std::string(what) + ": field '" + key +
                                  "' must be a boolean");
    return v.get<bool>();
}

inline json parse_text(const std::string& text, const char* what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw CorruptRecordError(std::string(what) + ": malformed JSON");
    return j;
}

// ---- domain object builders ------------------------------------------------

inline json element_set_json(const ElementSet& s) {
    json arr = json::array();
    for (std::uint32_t v : s.residues()) arr.push_back(v);
    return arr;
}

inline json proj_point_json(const ProjPoint& q) {
    return json::array({q.x.value(), q.y.value(), q.z.value()});
}

inline json proj_line_json(const ProjLine& l) {
    return json::array({l.a.value(), l.b.value(), l.c.value()});
}

inline json proj_point_set_json(const ProjPointSet& s) {
    json arr = json::array();
    for (const ProjPoint& q : s.points()) arr.push_back(proj_point_json(q));
    return arr;
}

inline json proj_line_set_json(const ProjLineSet& s) {
    json arr = json::array();
    for (const ProjLine& l : s.lines()) arr.push_back(proj_line_json(l));
    return arr;
}

inline json stage_json(const StageRecord& s) {
    json j;
    j["stage_name"] = s.name;
    j["tag"] = s.tag;
    j["measured"] = s.measured;
    j["predicted"] = s.predicted;
    j["ratio"] = s.ratio;
    json sizes = json::object();
    for (const auto& [k, v] : s.payload_sizes) sizes[k] = v;
    j["payload_sizes"] = sizes;
    json extras = json::object();
    for (const auto& [k, v] : s.extras) extras[k] = v;
    j["extras"] = extras;
    return j;
}

inline json bsg_config_json(const BsgConfig& c) {
    json j;
    j["popular_frac"] = c.popular_frac;
    j["codeg_frac"] = c.codeg_frac;
    j["bad_frac"] = c.bad_frac;
    j["neighbor_frac"] = c.neighbor_frac;
    j["c_bsg"] = c.c_bsg;
    j["big_c_bsg"] = c.big_c_bsg;
    return j;
}

inline json beck_params_json(const BeckParams& p) {
    json j;
    j["delta"] = p.delta;
    j["c_rich"] = p.c_rich;
    j["c_pop"] = p.c_pop;
    j["eps_cover"] = p.eps_cover;
    j["bsg"] = bsg_config_json(p.bsg);
    return j;
}

json beck_trace_json(const BeckTrace& t);
json incidence_trace_json(const IncidenceTrace& t);

// ---- generator specs --------------------------------------------------------

inline json generator_spec_json(const GeneratorSpec& s) {
    json j;
    j["kind"] = generator_kind_name(s.kind);
    j["modulus"] = s.modulus;
    j["n"] = s.n;
    j["seed"] = s.seed;
    switch (s.kind) {
        case GeneratorKind::Interval:
            j["start"] = s.start;
            break;
        case GeneratorKind::ArithmeticProgression:
            j["start"] = s.start;
            j["step"] = s.step;
            break;
        case GeneratorKind::GeometricProgression:
            j["start"] = s.start;
            j["ratio"] = s.ratio;
            break;
        case GeneratorKind::MultiplicativeSubgroup:
            j["order"] = s.order;
            break;
        case GeneratorKind::Union: {
            json parts = json::array();
            for (const GeneratorSpec& part : s.parts)
                parts.push_back(generator_spec_json(part));
            j["parts"] = parts;
            break;
        }
        case GeneratorKind::Explicit: {
            json elems = json::array();
            for (std::int64_t v : s.elements) elems.push_back(v);
            j["elements"] = elems;
            break;
        }
        case GeneratorKind::Random:
            break;
    }
    return j;
}

inline GeneratorSpec generator_spec_from_json(const json& j) {
    static constexpr const char* what = "generator spec";
    require_keys(j,
                 {"kind", "modulus", "n", "seed", "start", "step", "ratio",
                  "order", "parts", "elements"},
                 what);
    GeneratorSpec s;
    s.kind = generator_kind_from_name(get_string(j, "kind", what));
    const std::uint64_t modulus = get_u64(j, "modulus", what);
    if (modulus < 3 || modulus > 0x7fffffffULL)
        throw SchemaMismatchError("generator spec: modulus out of range");
    s.modulus = std::uint32_t(modulus);
    s.n = get_u64(j, "n", what, false, 0);
    s.seed = get_u64(j, "seed", what, false, 0);
    s.start = get_u64(j, "start", what, false, 0);
    s.step = get_u64(j, "step", what, false, 1);
    s.ratio = get_u64(j, "ratio", what, false, 2);
    s.order = get_u64(j, "order", what, false, 0);
    if (j.contains("parts")) {
        if (!j.at("parts").is_array())
            throw SchemaMismatchError("generator spec: 'parts' must be an array");
        for (const json& part : j.at("parts"))
            s.parts.push_back(generator_spec_from_json(part));
    }
    if (j.contains("elements")) {
        if (!j.at("elements").is_array())
            throw SchemaMismatchError(
                "generator spec: 'elements' must be an array");
        for (const json& v : j.at("elements")) {
            if (!v.is_number_integer() && !v.is_number_unsigned())
                throw SchemaMismatchError(
                    "generator spec: elements must be integers");
            s.elements.push_back(v.get<std::int64_t>());
        }
    }
    return s;
}

}  // namespace pflab::detail
