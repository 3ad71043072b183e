#include "pflab/trace_json.hpp"

#include "json_detail.hpp"

namespace pflab {

namespace detail {

json beck_trace_json(const BeckTrace& t) {
    json j;
    j["schema"] = "pflab-beck-trace/1";
    j["modulus"] = t.modulus;
    j["n"] = t.n;
    j["params"] = beck_params_json(t.params);
    j["range_warning"] = t.range_warning;
    j["completed"] = t.completed;
    j["empty_stage"] = t.empty_stage;
    j["delta_eff"] = t.delta_eff;
    j["verdict"] = t.verdict;
    j["case_tag"] = t.case_tag;
    j["line_count"] = t.line_count;
    j["row_pair_solutions"] = t.row_pair_solutions;
    j["k_max_sumset"] = t.k_max_sumset;

    json anchors;
    anchors["y1"] = t.y1;
    anchors["y2"] = t.y2;
    anchors["b_star"] = t.b_star;
    anchors["u_star"] = t.u_star;
    anchors["x_tilde_1"] = t.x_tilde_1;
    anchors["x_tilde_2"] = t.x_tilde_2;
    j["anchors"] = anchors;

    json sets = json::object();
    const auto put_set = [&](const char* key,
                             const std::optional<ElementSet>& s) {
        if (s) sets[key] = element_set_json(*s);
    };
    put_set("a1", t.a1);
    put_set("a2", t.a2);
    put_set("a2_norm", t.a2_norm);
    put_set("b_set", t.b_set);
    put_set("b1", t.b1);
    put_set("b2", t.b2);
    put_set("x_set", t.x_set);
    put_set("y_slopes", t.y_slopes);
    put_set("x1", t.x1);
    put_set("x2", t.x2);
    put_set("y_rich", t.y_rich);
    put_set("y_one", t.y_one);
    put_set("y_one_prime", t.y_one_prime);
    put_set("a2_star_half", t.a2_star_half);
    j["sets"] = sets;

    json slopes = json::array();
    for (const SlopeData& sd : t.slopes) {
        json s;
        s["b"] = sd.b;
        s["solutions"] = sd.solutions;
        s["in_b2"] = sd.in_b2;
        s["bsg_sumset"] = sd.bsg_sumset;
        s["doubling_1"] = sd.doubling_1;
        s["doubling_2"] = sd.doubling_2;
        s["intersection"] = sd.intersection;
        s["cross_sumset"] = sd.cross_sumset;
        if (sd.a1b) s["a1b"] = element_set_json(*sd.a1b);
        if (sd.a2b) s["a2b"] = element_set_json(*sd.a2b);
        if (sd.a1_wedge) s["a1_wedge"] = element_set_json(*sd.a1_wedge);
        if (sd.a2_wedge) s["a2_wedge"] = element_set_json(*sd.a2_wedge);
        slopes.push_back(s);
    }
    j["slopes"] = slopes;

    if (t.case_result) {
        const CaseSplitResult& c = *t.case_result;
        json cj;
        cj["case_tag"] = c.case_tag;
        cj["ratio_set_size"] = c.ratio_set_size;
        cj["ratio_set_is_field"] = c.ratio_set_is_field;
        cj["xi"] = c.xi;
        cj["quadruple"] = json::array(
            {c.quadruple[0], c.quadruple[1], c.quadruple[2], c.quadruple[3]});
        cj["certificate_size"] = c.certificate_size;
        cj["y1_squared"] = c.y1_squared;
        j["case_result"] = cj;
    }

    json stages = json::array();
    for (const StageRecord& s : t.stages) stages.push_back(stage_json(s));
    j["stages"] = stages;
    return j;
}

json incidence_trace_json(const IncidenceTrace& t) {
    json j;
    j["schema"] = "pflab-incidence-trace/1";
    j["modulus"] = t.modulus;
    j["n"] = t.n;
    {
        json pj;
        pj["epsilon"] = t.params.epsilon;
        pj["c_erase"] = t.params.c_erase;
        pj["c_pop"] = t.params.c_pop;
        pj["refine_depth"] = t.params.refine_depth;
        pj["beck"] = beck_params_json(t.params.beck);
        j["params"] = pj;
    }
    j["completed"] = t.completed;
    j["empty_stage"] = t.empty_stage;
    j["eps_eff"] = t.eps_eff;
    j["delta_merge"] = t.delta_merge;
    j["incidences"] = t.incidences;
    j["infinity_exclusions"] = t.infinity_exclusions;

    json sets = json::object();
    if (t.p_busy) sets["p_busy"] = proj_point_set_json(*t.p_busy);
    if (t.p1) sets["p1"] = proj_point_set_json(*t.p1);
    if (t.l1) sets["l1"] = proj_line_set_json(*t.l1);
    if (t.p2) sets["p2"] = proj_point_set_json(*t.p2);
    if (t.p3) sets["p3"] = proj_point_set_json(*t.p3);
    if (t.grid_a) sets["grid_a"] = element_set_json(*t.grid_a);
    if (t.grid_b) sets["grid_b"] = element_set_json(*t.grid_b);
    j["sets"] = sets;

    if (t.p3) {
        json anchors;
        anchors["p_bar"] = proj_point_json(t.p_bar);
        anchors["p_til"] = proj_point_json(t.p_til);
        j["anchors"] = anchors;
    }
    if (t.chart_map) {
        json m = json::array();
        for (const FieldElement& e : t.chart_map->m) m.push_back(e.value());
        j["chart_map"] = m;
    }
    if (t.grid_trace) j["grid_trace"] = beck_trace_json(*t.grid_trace);

    json stages = json::array();
    for (const StageRecord& s : t.stages) stages.push_back(stage_json(s));
    j["stages"] = stages;
    return j;
}

}  // namespace detail

std::string beck_trace_to_json(const BeckTrace& t) {
    return detail::beck_trace_json(t).dump(2);
}

std::string incidence_trace_to_json(const IncidenceTrace& t) {
    return detail::incidence_trace_json(t).dump(2);
}

}  // namespace pflab
