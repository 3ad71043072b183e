#include "pflab/scan.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <sstream>
#include <unordered_set>

#include "json_detail.hpp"
#include "pflab/errors.hpp"
#include "pflab/incidence.hpp"
#include "pflab/parallel.hpp"
#include "pflab/pipeline.hpp"
#include "pflab/rng.hpp"
#include "pflab/trace_json.hpp"

namespace pflab {

namespace {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using detail::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr const char* kConfigSchema = "pflab-scan-config/1";
constexpr const char* kRunSchema = "pflab-run/1";
constexpr u64 kMaxExhaustive = 2000000;

u64 binomial_capped(u64 n, u64 k, u64 cap) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    u64 result = 1;
    for (u64 i = 1; i <= k; ++i) {
        // exact at every step: result * (n - k + i) is divisible by i
        if (result > cap * i / (n - k + i) + 1) return cap + 1;
        result = result * (n - k + i) / i;
        if (result > cap) return cap + 1;
    }
    return result;
}

std::string join_residues(const std::vector<u32>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(v[i]);
    }
    return out;
}

std::string indexed_key(const char* prefix, u64 index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s:%07llu", prefix,
                  (unsigned long long)index);
    return buf;
}

// ---- instance computations ---------------------------------------------------

void run_extremal_instance(const ScanConfig& config, const ElementSet& a,
                           ScanInstanceRecord& rec) {
    rec.metrics.emplace_back("set_size", double(a.size()));
    const AffinePointSet grid = AffinePointSet::grid(a, a);
    const BeckDeltaReport report = beck_delta_effective(grid);
    rec.metrics.emplace_back("line_count", double(report.line_count));
    rec.metrics.emplace_back("delta_eff", report.delta_eff);
    rec.metrics.emplace_back("theorem1_ratio", report.theorem1_ratio);
    rec.metrics.emplace_back("range_warning", report.range_warning ? 1.0 : 0.0);
    const SumProductStats sp = sum_product_stats(a);
    rec.metrics.emplace_back("sum_size", double(sp.sum_size));
    rec.metrics.emplace_back("product_size", double(sp.product_size));
    rec.metrics.emplace_back("sp_exponent", sp.exponent);
    if (config.trace) {
        BeckParams params;
        params.delta = config.delta;
        const BeckTrace trace = run_beck_pipeline(a, a, params, 1);
        rec.case_tag = trace.case_tag;
        rec.metrics.emplace_back("trace_completed", trace.completed ? 1.0 : 0.0);
        rec.metrics.emplace_back("trace_verdict", trace.verdict ? 1.0 : 0.0);
        rec.trace = beck_trace_to_json(trace);
    }
}

void run_incidence_instance(const ScanConfig& config, const ProjPointSet& pts,
                            const ProjLineSet& lns, ScanInstanceRecord& rec,
                            bool pencil_check) {
    const u64 n = pts.size();
    rec.metrics.emplace_back("n", double(n));
    const u64 incidences = count_incidences(pts, lns);
    rec.metrics.emplace_back("incidences", double(incidences));
    const double ratio =
        double(incidences) / std::pow(double(n), 1.5 - config.epsilon);
    rec.metrics.emplace_back("incidence_ratio", ratio);
    if (pencil_check) {
        rec.metrics.emplace_back("expected_incidences", double(n));
        if (incidences != n) {
            rec.status = "error";
            rec.error = "pencil census disagrees with the hand count";
            return;
        }
    }
    if (config.trace) {
        IncidenceParams params;
        params.epsilon = config.epsilon;
        const IncidenceTrace trace = run_incidence_pipeline(pts, lns, params, 1);
        rec.case_tag = trace.grid_trace ? trace.grid_trace->case_tag : "";
        rec.metrics.emplace_back("trace_completed", trace.completed ? 1.0 : 0.0);
        rec.trace = incidence_trace_to_json(trace);
    }
}

// ---- reduction -----------------------------------------------------------------

double find_metric(const ScanInstanceRecord& rec, const std::string& name) {
    for (const auto& [k, v] : rec.metrics)
        if (k == name) return v;
    return kNaN;
}

void reduce_record(RunRecord& record, bool minimize) {
    record.min_value = kNaN;
    record.max_value = kNaN;
    record.mean_value = kNaN;
    double sum = 0.0;
    for (const ScanInstanceRecord& rec : record.instances) {
        if (rec.status == "timeout") {
            ++record.timeout_count;
            continue;
        }
        if (rec.status != "ok") {
            ++record.error_count;
            continue;
        }
        ++record.ok_count;
        const double v = find_metric(rec, record.primary_metric);
        sum += v;
        if (std::isnan(record.min_value) || v < record.min_value ||
            (v == record.min_value && rec.key < record.min_key)) {
            record.min_value = v;
            record.min_key = rec.key;
        }
        if (std::isnan(record.max_value) || v > record.max_value ||
            (v == record.max_value && rec.key < record.max_key)) {
            record.max_value = v;
            record.max_key = rec.key;
        }
    }
    if (record.ok_count > 0) record.mean_value = sum / double(record.ok_count);
    if (record.ok_count == 0) {
        record.verdict = "empty scan";
    } else if (minimize) {
        record.verdict = record.min_value >= 1.0
                             ? "no instance below the census exponent"
                             : "instance below the census exponent found";
    } else {
        record.verdict = record.max_value <= 1.0
                             ? "no instance above the incidence exponent"
                             : "instance above the incidence exponent found";
    }
}

template <typename Fn>
void run_instances(std::vector<ScanInstanceRecord>& out, u64 count, int threads,
                   u64 budget_ms, Fn&& fill) {
    out.resize(count);
    parallel_for(count, threads, [&](std::size_t i) {
        ScanInstanceRecord& rec = out[i];
        rec.status = "ok";
        const auto start = std::chrono::steady_clock::now();
        try {
            fill(i, rec);
        } catch (const std::exception& e) {
            rec.status = "error";
            rec.error = e.what();
        }
        if (budget_ms > 0 && rec.status == "ok") {
            const auto elapsed =
                std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - start)
                    .count();
            if (u64(elapsed) > budget_ms) rec.status = "timeout";
        }
    });
}

}  // namespace

// ---- config parsing ---------------------------------------------------------

ScanConfig parse_scan_config(const std::string& text) {
    const json j = detail::parse_text(text, "scan config");
    static constexpr const char* what = "scan config";
    detail::require_keys(j,
                         {"schema", "mode", "family", "modulus", "set_size", "n",
                          "count", "template", "sets", "configurations", "trace",
                          "budget_ms", "delta", "epsilon"},
                         what);
    const std::string schema = detail::get_string(j, "schema", what);
    if (schema != kConfigSchema)
        throw SchemaMismatchError("scan config: schema '" + schema +
                                  "' not supported (expected " + kConfigSchema +
                                  ")");
    ScanConfig c;
    c.mode = detail::get_string(j, "mode", what);
    if (c.mode != "extremal" && c.mode != "incidence")
        throw SchemaMismatchError("scan config: mode must be extremal|incidence");
    c.family = detail::get_string(j, "family", what);
    const u64 modulus = detail::get_u64(j, "modulus", what);
    if (modulus < 3 || modulus > 0x7fffffffULL)
        throw SchemaMismatchError("scan config: modulus out of range");
    c.modulus = u32(modulus);
    c.set_size = detail::get_u64(j, "set_size", what, false, 0);
    c.n = detail::get_u64(j, "n", what, false, 0);
    c.count = detail::get_u64(j, "count", what, false, 0);
    c.trace = detail::get_bool(j, "trace", what, false, false);
    c.budget_ms = detail::get_u64(j, "budget_ms", what, false, 0);
    c.delta = detail::get_double(j, "delta", what, false, 1.0 / 267);
    c.epsilon = detail::get_double(j, "epsilon", what, false, 1.0 / 10678);
    if (!(c.delta > 0.0) || !(c.delta < 1.0))
        throw SchemaMismatchError("scan config: delta must lie in (0, 1)");
    if (!(c.epsilon > 0.0) || !(c.epsilon < 1.0))
        throw SchemaMismatchError("scan config: epsilon must lie in (0, 1)");
    if (j.contains("template")) {
        c.tmpl = detail::generator_spec_from_json(j.at("template"));
        c.has_template = true;
        if (c.tmpl.modulus != c.modulus)
            throw SchemaMismatchError(
                "scan config: template modulus disagrees with the scan modulus");
    }
    if (j.contains("sets")) {
        const json& sets = j.at("sets");
        if (!sets.is_array())
            throw SchemaMismatchError("scan config: 'sets' must be an array");
        for (const json& s : sets) {
            if (!s.is_array())
                throw SchemaMismatchError(
                    "scan config: each set must be an array of integers");
            std::vector<std::int64_t> members;
            for (const json& v : s) {
                if (!v.is_number_integer() && !v.is_number_unsigned())
                    throw SchemaMismatchError(
                        "scan config: set members must be integers");
                members.push_back(v.get<std::int64_t>());
            }
            c.explicit_sets.push_back(std::move(members));
        }
    }
    if (j.contains("configurations")) {
        const json& cfgs = j.at("configurations");
        if (!cfgs.is_array())
            throw SchemaMismatchError(
                "scan config: 'configurations' must be an array");
        for (const json& e : cfgs) {
            detail::require_keys(e, {"points", "lines"}, "configuration");
            ExplicitConfiguration ec;
            const auto read_triples =
                [&](const char* key,
                    std::vector<std::array<std::int64_t, 3>>& out) {
                    if (!e.contains(key) || !e.at(key).is_array())
                        throw SchemaMismatchError(
                            std::string("configuration: '") + key +
                            "' must be an array");
                    for (const json& tr : e.at(key)) {
                        if (!tr.is_array() || tr.size() != 3)
                            throw SchemaMismatchError(
                                std::string("configuration: each entry of '") +
                                key + "' must be a coordinate triple");
                        std::array<std::int64_t, 3> arr{};
                        for (int i = 0; i < 3; ++i) {
                            const json& v = tr[std::size_t(i)];
                            if (!v.is_number_integer() && !v.is_number_unsigned())
                                throw SchemaMismatchError(
                                    "configuration: coordinates must be integers");
                            arr[std::size_t(i)] = v.get<std::int64_t>();
                        }
                        out.push_back(arr);
                    }
                };
            read_triples("points", ec.points);
            read_triples("lines", ec.lines);
            c.explicit_configurations.push_back(std::move(ec));
        }
    }

    // family/mode coherence
    if (c.mode == "extremal") {
        if (c.family != "exhaustive" && c.family != "generated" &&
            c.family != "explicit")
            throw SchemaMismatchError(
                "scan config: extremal family must be exhaustive|generated|explicit");
        if (c.family == "exhaustive" &&
            (c.set_size == 0 || c.set_size > c.modulus))
            throw SchemaMismatchError(
                "scan config: exhaustive family needs 1 <= set_size <= p");
        if (c.family == "generated" && !c.has_template)
            throw SchemaMismatchError(
                "scan config: generated family needs a template");
    } else {
        if (c.family != "random" && c.family != "pencil" && c.family != "explicit")
            throw SchemaMismatchError(
                "scan config: incidence family must be random|pencil|explicit");
        if ((c.family == "random" || c.family == "pencil") && c.n == 0)
            throw SchemaMismatchError("scan config: family needs n >= 1");
    }
    return c;
}

std::string scan_config_to_json(const ScanConfig& c) {
    json j;
    j["schema"] = kConfigSchema;
    j["mode"] = c.mode;
    j["family"] = c.family;
    j["modulus"] = c.modulus;
    if (c.set_size) j["set_size"] = c.set_size;
    if (c.n) j["n"] = c.n;
    if (c.count) j["count"] = c.count;
    if (c.has_template) j["template"] = detail::generator_spec_json(c.tmpl);
    if (!c.explicit_sets.empty()) {
        json sets = json::array();
        for (const auto& s : c.explicit_sets) {
            json arr = json::array();
            for (std::int64_t v : s) arr.push_back(v);
            sets.push_back(arr);
        }
        j["sets"] = sets;
    }
    if (!c.explicit_configurations.empty()) {
        json cfgs = json::array();
        for (const auto& e : c.explicit_configurations) {
            json ej;
            const auto triples =
                [](const std::vector<std::array<std::int64_t, 3>>& v) {
                    json arr = json::array();
                    for (const auto& tr : v)
                        arr.push_back(json::array({tr[0], tr[1], tr[2]}));
                    return arr;
                };
            ej["points"] = triples(e.points);
            ej["lines"] = triples(e.lines);
            cfgs.push_back(ej);
        }
        j["configurations"] = cfgs;
    }
    j["trace"] = c.trace;
    j["budget_ms"] = c.budget_ms;
    j["delta"] = c.delta;
    j["epsilon"] = c.epsilon;
    return j.dump(2);
}

// ---- scans --------------------------------------------------------------------

RunRecord extremal_scan(const ScanConfig& config, std::uint64_t master_seed,
                        int threads, const std::string& timestamp) {
    if (config.mode != "extremal")
        throw InputError("extremal_scan requires an extremal config");
    const PrimeField f(config.modulus);
    RunRecord record;
    record.timestamp = timestamp;
    record.mode = config.mode;
    record.config = scan_config_to_json(config);
    record.master_seed = master_seed;
    record.primary_metric = "theorem1_ratio";

    if (config.family == "exhaustive") {
        const u64 total =
            binomial_capped(config.modulus, config.set_size, kMaxExhaustive);
        if (total > kMaxExhaustive)
            throw InputError("exhaustive family too large to enumerate");
        std::vector<std::vector<u32>> subsets;
        subsets.reserve(total);
        std::vector<u32> idx(config.set_size);
        for (u64 i = 0; i < config.set_size; ++i) idx[i] = u32(i);
        const u32 p = config.modulus;
        const u32 k = u32(config.set_size);
        while (true) {
            subsets.push_back(idx);
            // next lexicographic combination
            int pos = int(k) - 1;
            while (pos >= 0 && idx[std::size_t(pos)] == p - k + u32(pos)) --pos;
            if (pos < 0) break;
            ++idx[std::size_t(pos)];
            for (u32 q = u32(pos) + 1; q < k; ++q)
                idx[q] = idx[q - 1] + 1;
        }
        run_instances(record.instances, subsets.size(), threads,
                      config.budget_ms, [&](std::size_t i,
                                            ScanInstanceRecord& rec) {
                          rec.key = "set:" + join_residues(subsets[i]);
                          run_extremal_instance(config,
                                                ElementSet(f, subsets[i]), rec);
                      });
    } else if (config.family == "generated") {
        run_instances(
            record.instances, config.count, threads, config.budget_ms,
            [&](std::size_t i, ScanInstanceRecord& rec) {
                GeneratorSpec spec = config.tmpl;
                spec.seed = mix_seed(master_seed, i);
                const ElementSet a = generate_set(spec);
                rec.key = indexed_key("gen", i) + ":" + join_residues(a.residues());
                run_extremal_instance(config, a, rec);
            });
    } else {
        run_instances(
            record.instances, config.explicit_sets.size(), threads,
            config.budget_ms, [&](std::size_t i, ScanInstanceRecord& rec) {
                const ElementSet a = ElementSet::from_integers(
                    f, std::span<const std::int64_t>(config.explicit_sets[i]));
                rec.key =
                    indexed_key("explicit", i) + ":" + join_residues(a.residues());
                run_extremal_instance(config, a, rec);
            });
    }
    reduce_record(record, /*minimize=*/true);
    return record;
}

RunRecord incidence_scan(const ScanConfig& config, std::uint64_t master_seed,
                         int threads, const std::string& timestamp) {
    if (config.mode != "incidence")
        throw InputError("incidence_scan requires an incidence config");
    const PrimeField f(config.modulus);
    RunRecord record;
    record.timestamp = timestamp;
    record.mode = config.mode;
    record.config = scan_config_to_json(config);
    record.master_seed = master_seed;
    record.primary_metric = "incidence_ratio";

    if (config.family == "random") {
        const std::vector<ProjPoint> all_pts = all_proj_points(f);
        const std::vector<ProjLine> all_lns = all_proj_lines(f);
        if (config.n > all_pts.size())
            throw InputError("instance size exceeds the projective plane");
        run_instances(
            record.instances, config.count, threads, config.budget_ms,
            [&](std::size_t i, ScanInstanceRecord& rec) {
                rec.key = indexed_key("random", i);
                SplitMix64 rng(mix_seed(master_seed, i));
                const auto sample = [&](std::size_t total) {
                    std::vector<u64> picked;
                    std::unordered_set<u64> seen;
                    while (picked.size() < config.n) {
                        const u64 r = rng.next_below(total);
                        if (seen.insert(r).second) picked.push_back(r);
                    }
                    return picked;
                };
                std::vector<ProjPoint> pts;
                for (u64 r : sample(all_pts.size()))
                    pts.push_back(all_pts[std::size_t(r)]);
                std::vector<ProjLine> lns;
                for (u64 r : sample(all_lns.size()))
                    lns.push_back(all_lns[std::size_t(r)]);
                run_incidence_instance(config, ProjPointSet(f, std::move(pts)),
                                       ProjLineSet(f, std::move(lns)), rec,
                                       false);
            });
    } else if (config.family == "pencil") {
        run_instances(
            record.instances, 1, threads, config.budget_ms,
            [&](std::size_t, ScanInstanceRecord& rec) {
                rec.key = "pencil:n=" + std::to_string(config.n);
                if (config.n > u64(config.modulus) + 1)
                    throw InputError("pencil needs n <= p + 1 lines");
                const std::vector<ProjPoint> all_pts = all_proj_points(f);
                const std::vector<ProjLine> all_lns = all_proj_lines(f);
                const ProjPoint centre = all_pts.front();
                std::vector<ProjLine> lns;
                for (const ProjLine& l : all_lns) {
                    if (lns.size() == config.n) break;
                    if (on_proj_line(centre, l)) lns.push_back(l);
                }
                std::vector<ProjPoint> pts{centre};
                for (const ProjPoint& q : all_pts) {
                    if (pts.size() == config.n) break;
                    if (q == centre) continue;
                    bool on_any = false;
                    for (const ProjLine& l : lns) {
                        if (on_proj_line(q, l)) {
                            on_any = true;
                            break;
                        }
                    }
                    if (!on_any) pts.push_back(q);
                }
                if (pts.size() < config.n)
                    throw InputError(
                        "plane too small for an off-pencil point set");
                run_incidence_instance(config, ProjPointSet(f, std::move(pts)),
                                       ProjLineSet(f, std::move(lns)), rec,
                                       true);
            });
    } else {
        run_instances(
            record.instances, config.explicit_configurations.size(), threads,
            config.budget_ms, [&](std::size_t i, ScanInstanceRecord& rec) {
                rec.key = indexed_key("config", i);
                const ExplicitConfiguration& e = config.explicit_configurations[i];
                std::vector<ProjPoint> pts;
                for (const auto& tr : e.points)
                    pts.push_back(make_proj_point(f.from_int(tr[0]),
                                                  f.from_int(tr[1]),
                                                  f.from_int(tr[2])));
                std::vector<ProjLine> lns;
                for (const auto& tr : e.lines)
                    lns.push_back(make_proj_line(f.from_int(tr[0]),
                                                 f.from_int(tr[1]),
                                                 f.from_int(tr[2])));
                run_incidence_instance(config, ProjPointSet(f, std::move(pts)),
                                       ProjLineSet(f, std::move(lns)), rec,
                                       false);
            });
    }
    reduce_record(record, /*minimize=*/false);
    return record;
}

// ---- record serialization -------------------------------------------------------

std::string run_record_to_json(const RunRecord& record) {
    json j;
    j["schema"] = kRunSchema;
    j["timestamp"] = record.timestamp;
    j["mode"] = record.mode;
    j["config"] = detail::parse_text(record.config, "run record config");
    j["master_seed"] = record.master_seed;
    j["primary_metric"] = record.primary_metric;
    json red;
    red["min_key"] = record.min_key;
    red["min_value"] = record.min_value;
    red["max_key"] = record.max_key;
    red["max_value"] = record.max_value;
    red["mean_value"] = record.mean_value;
    red["ok_count"] = record.ok_count;
    red["error_count"] = record.error_count;
    red["timeout_count"] = record.timeout_count;
    red["verdict"] = record.verdict;
    j["reduction"] = red;
    json instances = json::array();
    for (const ScanInstanceRecord& rec : record.instances) {
        json ij;
        ij["key"] = rec.key;
        ij["status"] = rec.status;
        ij["error"] = rec.error;
        ij["case_tag"] = rec.case_tag;
        json metrics = json::object();
        for (const auto& [k, v] : rec.metrics) metrics[k] = v;
        ij["metrics"] = metrics;
        if (!rec.trace.empty())
            ij["trace"] = detail::parse_text(rec.trace, "run record trace");
        instances.push_back(ij);
    }
    j["instances"] = instances;
    return j.dump(2);
}

RunRecord run_record_from_json(const std::string& text) {
    const json j = detail::parse_text(text, "run record");
    static constexpr const char* what = "run record";
    detail::require_keys(j,
                         {"schema", "timestamp", "mode", "config", "master_seed",
                          "primary_metric", "reduction", "instances"},
                         what);
    RunRecord record;
    record.schema = detail::get_string(j, "schema", what);
    if (record.schema != kRunSchema)
        throw SchemaMismatchError("run record: schema '" + record.schema +
                                  "' not supported (expected " + kRunSchema +
                                  ")");
    record.timestamp = detail::get_string(j, "timestamp", what);
    record.mode = detail::get_string(j, "mode", what);
    if (!j.contains("config") || !j.at("config").is_object())
        throw SchemaMismatchError("run record: missing config object");
    record.config = j.at("config").dump(2);
    record.master_seed = detail::get_u64(j, "master_seed", what);
    record.primary_metric = detail::get_string(j, "primary_metric", what);
    if (!j.contains("reduction"))
        throw SchemaMismatchError("run record: missing reduction");
    const json& red = j.at("reduction");
    detail::require_keys(red,
                         {"min_key", "min_value", "max_key", "max_value",
                          "mean_value", "ok_count", "error_count",
                          "timeout_count", "verdict"},
                         "run record reduction");
    record.min_key = detail::get_string(red, "min_key", what);
    record.min_value = detail::get_double(red, "min_value", what);
    record.max_key = detail::get_string(red, "max_key", what);
    record.max_value = detail::get_double(red, "max_value", what);
    record.mean_value = detail::get_double(red, "mean_value", what);
    record.ok_count = detail::get_u64(red, "ok_count", what);
    record.error_count = detail::get_u64(red, "error_count", what);
    record.timeout_count = detail::get_u64(red, "timeout_count", what);
    record.verdict = detail::get_string(red, "verdict", what);
    if (!j.contains("instances") || !j.at("instances").is_array())
        throw SchemaMismatchError("run record: missing instances array");
    for (const json& ij : j.at("instances")) {
        detail::require_keys(
            ij, {"key", "status", "error", "case_tag", "metrics", "trace"},
            "run record instance");
        ScanInstanceRecord rec;
        rec.key = detail::get_string(ij, "key", what);
        rec.status = detail::get_string(ij, "status", what);
        rec.error = detail::get_string(ij, "error", what);
        rec.case_tag = detail::get_string(ij, "case_tag", what);
        if (!ij.contains("metrics") || !ij.at("metrics").is_object())
            throw SchemaMismatchError("run record: instance without metrics");
        for (const auto& item : ij.at("metrics").items()) {
            const json& v = item.value();
            if (v.is_null()) {
                rec.metrics.emplace_back(item.key(), kNaN);
            } else if (v.is_number()) {
                rec.metrics.emplace_back(item.key(), v.get<double>());
            } else {
                throw SchemaMismatchError(
                    "run record: metric values must be numbers");
            }
        }
        if (ij.contains("trace")) {
            if (!ij.at("trace").is_object())
                throw SchemaMismatchError("run record: trace must be an object");
            rec.trace = ij.at("trace").dump(2);
        }
        record.instances.push_back(std::move(rec));
    }
    return record;
}

void write_run_record(const RunRecord& record, const std::string& path) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot open for writing: " + tmp.string());
        out << run_record_to_json(record) << '\n';
        if (!out.flush())
            throw InputError("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

RunRecord read_run_record(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open for reading: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return run_record_from_json(buf.str());
}

void export_csv(const RunRecord& record, const std::string& path) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    std::ofstream out(target, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open for writing: " + path);

    std::vector<std::string> columns;
    for (const ScanInstanceRecord& rec : record.instances) {
        for (const auto& [k, v] : rec.metrics) {
            if (std::find(columns.begin(), columns.end(), k) == columns.end())
                columns.push_back(k);
        }
    }
    const auto quote = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char ch : s) {
            if (ch == '"') q += '"';
            q += ch;
        }
        q += '"';
        return q;
    };
    out << "key,status,error,case_tag";
    for (const std::string& col : columns) out << ',' << quote(col);
    out << '\n';
    for (const ScanInstanceRecord& rec : record.instances) {
        out << quote(rec.key) << ',' << quote(rec.status) << ','
            << quote(rec.error) << ',' << quote(rec.case_tag);
        for (const std::string& col : columns) {
            out << ',';
            const double v = find_metric(rec, col);
            if (!std::isnan(v)) out << json(v).dump();
        }
        out << '\n';
    }
    if (!out.flush()) throw InputError("write failed: " + path);
}

}  // namespace pflab
