#include "pflab/io.hpp"

#include <array>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <vector>

#include "json_detail.hpp"
#include "pflab/errors.hpp"

namespace pflab {

namespace {

using detail::json;

std::vector<std::int64_t> integer_array(const json& j, const char* what) {
    if (!j.is_array())
        throw SchemaMismatchError(std::string(what) + ": expected an array");
    std::vector<std::int64_t> out;
    out.reserve(j.size());
    for (const json& v : j) {
        if (!v.is_number_integer() && !v.is_number_unsigned())
            throw SchemaMismatchError(std::string(what) +
                                      ": entries must be integers");
        out.push_back(v.get<std::int64_t>());
    }
    return out;
}

std::vector<std::array<std::int64_t, 3>> triple_array(const json& j,
                                                      const char* what) {
    if (!j.is_array())
        throw SchemaMismatchError(std::string(what) + ": expected an array");
    std::vector<std::array<std::int64_t, 3>> out;
    out.reserve(j.size());
    for (const json& tr : j) {
        if (!tr.is_array() || tr.size() != 3)
            throw SchemaMismatchError(std::string(what) +
                                      ": entries must be coordinate triples");
        std::array<std::int64_t, 3> arr{};
        for (std::size_t i = 0; i < 3; ++i) {
            const json& v = tr[i];
            if (!v.is_number_integer() && !v.is_number_unsigned())
                throw SchemaMismatchError(std::string(what) +
                                          ": coordinates must be integers");
            arr[i] = v.get<std::int64_t>();
        }
        out.push_back(arr);
    }
    return out;
}

json load_json_file(const std::string& path, const char* what) {
    return detail::parse_text(read_text_file(path), what);
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open for reading: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

GeneratorSpec generator_spec_from_text(const std::string& text) {
    return detail::generator_spec_from_json(
        detail::parse_text(text, "generator spec"));
}

BeckParams beck_params_from_text(const std::string& text) {
    const json j = detail::parse_text(text, "pipeline params");
    static constexpr const char* what = "pipeline params";
    detail::require_keys(j, {"delta", "c_rich", "c_pop", "eps_cover", "bsg"},
                         what);
    BeckParams p;
    p.delta = detail::get_double(j, "delta", what, false, p.delta);
    p.c_rich = detail::get_double(j, "c_rich", what, false, p.c_rich);
    p.c_pop = detail::get_double(j, "c_pop", what, false, p.c_pop);
    p.eps_cover = detail::get_double(j, "eps_cover", what, false, p.eps_cover);
    if (j.contains("bsg")) {
        const json& b = j.at("bsg");
        detail::require_keys(b,
                             {"popular_frac", "codeg_frac", "bad_frac",
                              "neighbor_frac", "c_bsg", "big_c_bsg"},
                             "bsg config");
        BsgConfig& c = p.bsg;
        c.popular_frac =
            detail::get_double(b, "popular_frac", what, false, c.popular_frac);
        c.codeg_frac =
            detail::get_double(b, "codeg_frac", what, false, c.codeg_frac);
        c.bad_frac = detail::get_double(b, "bad_frac", what, false, c.bad_frac);
        c.neighbor_frac = detail::get_double(b, "neighbor_frac", what, false,
                                             c.neighbor_frac);
        c.c_bsg = detail::get_double(b, "c_bsg", what, false, c.c_bsg);
        c.big_c_bsg =
            detail::get_double(b, "big_c_bsg", what, false, c.big_c_bsg);
    }
    return p;
}

ElementSet load_element_set(const PrimeField& f, const std::string& path) {
    const json j = load_json_file(path, "element set");
    if (j.is_array()) {
        const auto values = integer_array(j, "element set");
        return ElementSet::from_integers(
            f, std::span<const std::int64_t>(values));
    }
    detail::require_keys(j, {"elements", "generator"}, "element set");
    if (j.contains("elements")) {
        const auto values = integer_array(j.at("elements"), "element set");
        return ElementSet::from_integers(
            f, std::span<const std::int64_t>(values));
    }
    if (j.contains("generator")) {
        const GeneratorSpec spec =
            detail::generator_spec_from_json(j.at("generator"));
        if (spec.modulus != f.modulus())
            throw InputError(
                "generator modulus disagrees with the requested field");
        return generate_set(spec);
    }
    throw SchemaMismatchError(
        "element set: expected an array, 'elements', or 'generator'");
}

ProjPointSet load_proj_points(const PrimeField& f, const std::string& path) {
    json j = load_json_file(path, "point set");
    if (!j.is_array()) {
        detail::require_keys(j, {"points"}, "point set");
        if (!j.contains("points"))
            throw SchemaMismatchError("point set: missing 'points'");
        j = j.at("points");
    }
    std::vector<ProjPoint> pts;
    for (const auto& tr : triple_array(j, "point set"))
        pts.push_back(make_proj_point(f.from_int(tr[0]), f.from_int(tr[1]),
                                      f.from_int(tr[2])));
    return ProjPointSet(f, std::move(pts));
}

ProjLineSet load_proj_lines(const PrimeField& f, const std::string& path) {
    json j = load_json_file(path, "line set");
    if (!j.is_array()) {
        detail::require_keys(j, {"lines"}, "line set");
        if (!j.contains("lines"))
            throw SchemaMismatchError("line set: missing 'lines'");
        j = j.at("lines");
    }
    std::vector<ProjLine> lns;
    for (const auto& tr : triple_array(j, "line set"))
        lns.push_back(make_proj_line(f.from_int(tr[0]), f.from_int(tr[1]),
                                     f.from_int(tr[2])));
    return ProjLineSet(f, std::move(lns));
}

PairGraph load_pair_graph(const std::string& path) {
    const json j = load_json_file(path, "pair graph");
    static constexpr const char* what = "pair graph";
    detail::require_keys(j, {"modulus", "x", "y", "edges"}, what);
    const std::uint64_t modulus = detail::get_u64(j, "modulus", what);
    if (modulus < 3 || modulus > 0x7fffffffULL)
        throw SchemaMismatchError("pair graph: modulus out of range");
    const PrimeField f{std::uint32_t(modulus)};
    if (!j.contains("x") || !j.contains("y"))
        throw SchemaMismatchError("pair graph: missing 'x' or 'y'");
    const auto xs = integer_array(j.at("x"), what);
    const auto ys = integer_array(j.at("y"), what);
    const ElementSet x =
        ElementSet::from_integers(f, std::span<const std::int64_t>(xs));
    const ElementSet y =
        ElementSet::from_integers(f, std::span<const std::int64_t>(ys));
    if (!j.contains("edges") || !j.at("edges").is_array())
        throw SchemaMismatchError("pair graph: missing 'edges'");
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (const json& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 2 ||
            (!e[0].is_number_integer() && !e[0].is_number_unsigned()) ||
            (!e[1].is_number_integer() && !e[1].is_number_unsigned()))
            throw SchemaMismatchError("pair graph: edges must be value pairs");
        const std::uint32_t ex = f.from_int(e[0].get<std::int64_t>()).value();
        const std::uint32_t ey = f.from_int(e[1].get<std::int64_t>()).value();
        if (!x.contains(ex) || !y.contains(ey))
            throw SchemaMismatchError(
                "pair graph: edge endpoint is not a listed vertex");
        edges.emplace_back(ex, ey);
    }
    return PairGraph(x, y, std::move(edges));
}

}  // namespace pflab
