#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "pflab/addcomb.hpp"
#include "pflab/errors.hpp"
#include "pflab/field.hpp"
#include "pflab/generator.hpp"
#include "pflab/incidence.hpp"
#include "pflab/io.hpp"
#include "pflab/pipeline.hpp"
#include "pflab/scan.hpp"
#include "pflab/trace_json.hpp"

namespace {

using json = nlohmann::ordered_json;

json residues_json(const pflab::ElementSet& s) {
    json arr = json::array();
    for (std::uint32_t r : s.residues()) arr.push_back(r);
    return arr;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw pflab::InputError("cannot open for writing: " + path);
    out << text;
    if (!out.flush()) throw pflab::InputError("write failed: " + path);
}

pflab::PrimeField field_of(std::uint64_t prime) {
    if (prime < 3 || prime > 0x7fffffffULL)
        throw pflab::InputError("--prime must lie in [3, 2^31)");
    return pflab::PrimeField{std::uint32_t(prime)};
}

pflab::ElementSet load_set_or_gen(const pflab::PrimeField& f,
                                  const std::string& set_file,
                                  const std::string& gen_spec) {
    if (!set_file.empty()) return pflab::load_element_set(f, set_file);
    const pflab::GeneratorSpec spec = pflab::generator_spec_from_text(gen_spec);
    if (spec.modulus != f.modulus())
        throw pflab::InputError(
            "generator modulus disagrees with the requested field");
    return pflab::generate_set(spec);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "pflab: exact-arithmetic census and contradiction-chain replays over "
        "prime fields"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    int threads = 1;
    std::string csv_path, timestamp;
    app.add_option("--seed", seed, "master seed for scan families");
    app.add_option("--threads", threads, "worker threads (results identical)")
        ->check(CLI::Range(1, 1024));
    app.add_option("--csv", csv_path, "also flatten the scan record to CSV");
    app.add_option("--timestamp", timestamp,
                   "timestamp string stored in run records (default empty "
                   "keeps records byte-reproducible)");

    // lines
    auto* lines_cmd =
        app.add_subcommand("lines", "census of the lines spanned by A x A");
    std::uint64_t lines_prime = 0;
    std::string lines_set, lines_gen, lines_json;
    lines_cmd->add_option("--prime", lines_prime, "field modulus")->required();
    auto* lines_set_opt = lines_cmd->add_option("--set", lines_set,
                                                "element set file (JSON)");
    auto* lines_gen_opt =
        lines_cmd->add_option("--gen", lines_gen, "inline generator spec JSON");
    lines_set_opt->excludes(lines_gen_opt);
    lines_cmd->add_option("--json", lines_json, "write the census as JSON");

    // incidences
    auto* inc_cmd = app.add_subcommand(
        "incidences", "point-line incidence count in the projective plane");
    std::uint64_t inc_prime = 0;
    std::string inc_points, inc_lines;
    inc_cmd->add_option("--prime", inc_prime, "field modulus")->required();
    inc_cmd->add_option("--points", inc_points, "point file (JSON triples)")
        ->required();
    inc_cmd->add_option("--lines", inc_lines, "line file (JSON triples)")
        ->required();

    // sum-product
    auto* sp_cmd =
        app.add_subcommand("sum-product", "sumset and product-set census");
    std::uint64_t sp_prime = 0;
    std::string sp_set;
    sp_cmd->add_option("--prime", sp_prime, "field modulus")->required();
    sp_cmd->add_option("--set", sp_set, "element set file (JSON)")->required();

    // beck-pipeline
    auto* beck_cmd = app.add_subcommand(
        "beck-pipeline", "replay the grid line-count contradiction chain");
    std::uint64_t beck_prime = 0;
    std::string beck_a, beck_b, beck_params_file;
    double beck_delta = 1.0 / 267;
    beck_cmd->add_option("--prime", beck_prime, "field modulus")->required();
    beck_cmd->add_option("--set-a", beck_a, "first side (JSON)")->required();
    beck_cmd->add_option("--set-b", beck_b, "second side (JSON)")->required();
    beck_cmd->add_option("--delta", beck_delta, "exponent gap under test");
    beck_cmd->add_option("--params", beck_params_file,
                         "tuning knobs file (JSON; --delta wins if both)");

    // incidence-pipeline
    auto* ip_cmd = app.add_subcommand(
        "incidence-pipeline", "replay the incidence contradiction chain");
    std::uint64_t ip_prime = 0;
    std::string ip_points, ip_lines;
    double ip_epsilon = 1.0 / 10678;
    ip_cmd->add_option("--prime", ip_prime, "field modulus")->required();
    ip_cmd->add_option("--points", ip_points, "point file (JSON triples)")
        ->required();
    ip_cmd->add_option("--lines", ip_lines, "line file (JSON triples)")
        ->required();
    ip_cmd->add_option("--epsilon", ip_epsilon, "incidence exponent gap");

    // bsg
    auto* bsg_cmd = app.add_subcommand(
        "bsg", "run the graph-refinement extraction on a pair graph");
    std::string bsg_instance;
    bsg_cmd->add_option("--instance", bsg_instance, "pair graph file (JSON)")
        ->required();

    // scan
    auto* scan_cmd =
        app.add_subcommand("scan", "run a configured instance family");
    std::string scan_config, scan_out;
    scan_cmd->add_option("--config", scan_config, "scan config file (JSON)")
        ->required();
    scan_cmd->add_option("--out", scan_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (lines_cmd->parsed()) {
            if (lines_set.empty() && lines_gen.empty())
                throw pflab::InputError("lines needs --set or --gen");
            const pflab::PrimeField f = field_of(lines_prime);
            const pflab::ElementSet a = load_set_or_gen(f, lines_set, lines_gen);
            const pflab::AffinePointSet grid = pflab::AffinePointSet::grid(a, a);
            const pflab::BeckDeltaReport rep = pflab::beck_delta_effective(grid);
            std::printf(
                "modulus=%u set_size=%zu line_count=%llu delta_eff=%.6f "
                "theorem1_ratio=%.6f range_warning=%d\n",
                f.modulus(), a.size(), (unsigned long long)rep.line_count,
                rep.delta_eff, rep.theorem1_ratio, rep.range_warning ? 1 : 0);
            if (!lines_json.empty()) {
                json j;
                j["modulus"] = f.modulus();
                j["set"] = residues_json(a);
                j["line_count"] = rep.line_count;
                j["delta_eff"] = rep.delta_eff;
                j["theorem1_ratio"] = rep.theorem1_ratio;
                j["range_warning"] = rep.range_warning;
                write_text(lines_json, j.dump(2) + "\n");
            }
        } else if (inc_cmd->parsed()) {
            const pflab::PrimeField f = field_of(inc_prime);
            const pflab::ProjPointSet p = pflab::load_proj_points(f, inc_points);
            const pflab::ProjLineSet l = pflab::load_proj_lines(f, inc_lines);
            const std::uint64_t naive = pflab::count_incidences_naive(p, l);
            const std::uint64_t bucketed = pflab::count_incidences_bucketed(p, l);
            if (naive != bucketed)
                throw pflab::InternalCheckError(
                    "incidence counting routes disagree");
            std::printf("points=%zu lines=%zu incidences=%llu naive=%llu "
                        "bucketed=%llu\n",
                        p.size(), l.size(), (unsigned long long)naive,
                        (unsigned long long)naive, (unsigned long long)bucketed);
        } else if (sp_cmd->parsed()) {
            const pflab::PrimeField f = field_of(sp_prime);
            const pflab::ElementSet a = pflab::load_element_set(f, sp_set);
            const pflab::SumProductStats st = pflab::sum_product_stats(a);
            std::printf(
                "set_size=%zu sum_size=%llu product_size=%llu max_size=%llu "
                "exponent=%.6f\n",
                a.size(), (unsigned long long)st.sum_size,
                (unsigned long long)st.product_size,
                (unsigned long long)st.max_size, st.exponent);
        } else if (beck_cmd->parsed()) {
            const pflab::PrimeField f = field_of(beck_prime);
            const pflab::ElementSet a1 = pflab::load_element_set(f, beck_a);
            const pflab::ElementSet a2 = pflab::load_element_set(f, beck_b);
            pflab::BeckParams params;
            if (!beck_params_file.empty())
                params =
                    pflab::beck_params_from_text(pflab::read_text_file(beck_params_file));
            if (beck_cmd->count("--delta")) params.delta = beck_delta;
            const pflab::BeckTrace t =
                pflab::run_beck_pipeline(a1, a2, params, threads);
            std::printf("%s\n", pflab::beck_trace_to_json(t).c_str());
            const std::string status =
                t.completed ? "completed" : "truncated at " + t.empty_stage;
            std::fprintf(stderr,
                         "%s delta_eff=%.6f verdict=%d case=%s stages=%zu\n",
                         status.c_str(), t.delta_eff, t.verdict ? 1 : 0,
                         t.case_tag.c_str(), t.stages.size());
        } else if (ip_cmd->parsed()) {
            const pflab::PrimeField f = field_of(ip_prime);
            const pflab::ProjPointSet p = pflab::load_proj_points(f, ip_points);
            const pflab::ProjLineSet l = pflab::load_proj_lines(f, ip_lines);
            pflab::IncidenceParams params;
            params.epsilon = ip_epsilon;
            const pflab::IncidenceTrace t =
                pflab::run_incidence_pipeline(p, l, params, threads);
            std::printf("%s\n", pflab::incidence_trace_to_json(t).c_str());
            const std::string status =
                t.completed ? "completed" : "truncated at " + t.empty_stage;
            std::fprintf(stderr, "%s eps_eff=%.6f incidences=%llu stages=%zu\n",
                         status.c_str(), t.eps_eff,
                         (unsigned long long)t.incidences, t.stages.size());
        } else if (bsg_cmd->parsed()) {
            const pflab::PairGraph g = pflab::load_pair_graph(bsg_instance);
            const pflab::BsgResult r = pflab::bsg_extract(g);
            json j;
            j["modulus"] = g.modulus();
            j["alpha"] = r.alpha;
            j["x_prime"] = residues_json(r.x_prime);
            j["y_prime"] = residues_json(r.y_prime);
            j["sumset_size"] = r.sumset_size;
            j["pivot"] = r.pivot;
            j["x_ratio"] = r.x_ratio;
            j["y_ratio"] = r.y_ratio;
            j["sumset_ratio"] = r.sumset_ratio;
            j["meets_size_bound"] = r.meets_size_bound;
            j["meets_sumset_bound"] = r.meets_sumset_bound;
            std::printf("%s\n", j.dump(2).c_str());
        } else if (scan_cmd->parsed()) {
            const pflab::ScanConfig cfg =
                pflab::parse_scan_config(pflab::read_text_file(scan_config));
            const pflab::RunRecord record =
                cfg.mode == "extremal"
                    ? pflab::extremal_scan(cfg, seed, threads, timestamp)
                    : pflab::incidence_scan(cfg, seed, threads, timestamp);
            const std::filesystem::path out_dir(scan_out);
            std::filesystem::create_directories(out_dir);
            const std::string record_path = (out_dir / "run.json").string();
            pflab::write_run_record(record, record_path);
            if (!csv_path.empty()) pflab::export_csv(record, csv_path);
            std::printf(
                "wrote %s: %zu instances (ok=%llu error=%llu timeout=%llu) "
                "min=%.6f max=%.6f verdict=\"%s\"\n",
                record_path.c_str(), record.instances.size(),
                (unsigned long long)record.ok_count,
                (unsigned long long)record.error_count,
                (unsigned long long)record.timeout_count, record.min_value,
                record.max_value, record.verdict.c_str());
        }
    } catch (const pflab::SchemaMismatchError& e) {
        std::fprintf(stderr, "input schema error: %s\n", e.what());
        return 2;
    } catch (const pflab::CorruptRecordError& e) {
        std::fprintf(stderr, "input schema error: %s\n", e.what());
        return 2;
    } catch (const pflab::InputError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
