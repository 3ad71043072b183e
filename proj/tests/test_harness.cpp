#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pflab/errors.hpp"
#include "pflab/generator.hpp"
#include "pflab/io.hpp"
#include "pflab/scan.hpp"

using namespace pflab;

namespace {

double metric(const ScanInstanceRecord& rec, const std::string& name) {
    for (const auto& [k, v] : rec.metrics)
        if (k == name) return v;
    return std::numeric_limits<double>::quiet_NaN();
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

}  // namespace

TEST_CASE("interval generator produces the initial segment") {
    GeneratorSpec s;
    s.kind = GeneratorKind::Interval;
    s.modulus = 101;
    s.n = 5;
    CHECK(generate_set(s).residues() ==
          std::vector<std::uint32_t>{0, 1, 2, 3, 4});
}

TEST_CASE("multiplicative subgroup of order 3 mod 7") {
    GeneratorSpec s;
    s.kind = GeneratorKind::MultiplicativeSubgroup;
    s.modulus = 7;
    s.order = 3;
    CHECK(generate_set(s).residues() == std::vector<std::uint32_t>{1, 2, 4});
    s.order = 5;  // 5 does not divide 6
    CHECK_THROWS_AS(generate_set(s), BadSubgroupOrderError);
}

TEST_CASE("random generator is a pure function of spec and seed") {
    GeneratorSpec s;
    s.kind = GeneratorKind::Random;
    s.modulus = 101;
    s.n = 6;
    s.seed = 42;
    const ElementSet a = generate_set(s);
    const ElementSet b = generate_set(s);
    CHECK(a.residues() == b.residues());
    CHECK(a.size() == 6);
    s.seed = 43;
    CHECK(generate_set(s).residues() != a.residues());
}

TEST_CASE("every generator yields exactly n distinct residues") {
    const auto check_distinct = [](const GeneratorSpec& s, std::size_t n) {
        const ElementSet a = generate_set(s);
        CHECK(a.size() == n);
        const std::set<std::uint32_t> uniq(a.residues().begin(),
                                           a.residues().end());
        CHECK(uniq.size() == n);
    };
    GeneratorSpec ap;
    ap.kind = GeneratorKind::ArithmeticProgression;
    ap.modulus = 97;
    ap.n = 10;
    ap.start = 3;
    ap.step = 7;
    check_distinct(ap, 10);

    // a geometric progression that wraps and collides retries the next ratio
    GeneratorSpec gp;
    gp.kind = GeneratorKind::GeometricProgression;
    gp.modulus = 31;
    gp.n = 12;
    gp.start = 1;
    gp.ratio = 2;  // orbit of 2 mod 31 has size 5, forcing retries
    check_distinct(gp, 12);

    GeneratorSpec un;
    un.kind = GeneratorKind::Union;
    un.modulus = 97;
    GeneratorSpec left = ap;
    GeneratorSpec right;
    right.kind = GeneratorKind::Interval;
    right.modulus = 97;
    right.n = 4;
    un.parts = {left, right};
    const ElementSet u = generate_set(un);
    CHECK(u.size() >= 10);
    CHECK(u.contains(0));
    CHECK(u.contains(3));

    GeneratorSpec ex;
    ex.kind = GeneratorKind::Explicit;
    ex.modulus = 11;
    ex.elements = {-1, 5, 16, 5};
    const ElementSet e = generate_set(ex);
    CHECK(e.residues() == std::vector<std::uint32_t>{5, 10});
}

TEST_CASE("generators refuse sets larger than the field") {
    GeneratorSpec s;
    s.kind = GeneratorKind::Interval;
    s.modulus = 7;
    s.n = 8;
    CHECK_THROWS_AS(generate_set(s), SizeExceedsFieldError);
    s.kind = GeneratorKind::GeometricProgression;
    s.n = 7;  // nonzero values only: at most p - 1 distinct
    s.start = 1;
    CHECK_THROWS_AS(generate_set(s), SizeExceedsFieldError);
}

TEST_CASE("exhaustive extremal scan over F_11 triples") {
    ScanConfig c;
    c.mode = "extremal";
    c.family = "exhaustive";
    c.modulus = 11;
    c.set_size = 3;
    const RunRecord r = extremal_scan(c, 7, 2, "fixed");
    CHECK(r.instances.size() == 165);
    CHECK(r.ok_count == 165);
    CHECK(r.error_count == 0);
    CHECK(r.primary_metric == "theorem1_ratio");
    CHECK(r.min_value >= 1.0);
    CHECK(r.min_value == doctest::Approx(2.204010).epsilon(1e-4));
    CHECK(r.min_key == "set:0;1;10");
    CHECK(r.verdict == "no instance below the census exponent");
}

TEST_CASE("scan records are byte-identical across worker counts") {
    ScanConfig c;
    c.mode = "extremal";
    c.family = "exhaustive";
    c.modulus = 11;
    c.set_size = 3;
    const std::string j1 = run_record_to_json(extremal_scan(c, 7, 1, "fixed"));
    const std::string j8 = run_record_to_json(extremal_scan(c, 7, 8, "fixed"));
    CHECK(j1 == j8);

    ScanConfig ic;
    ic.mode = "incidence";
    ic.family = "random";
    ic.modulus = 499;
    ic.n = 10;
    ic.count = 12;
    const std::string i1 = run_record_to_json(incidence_scan(ic, 5, 1, "fixed"));
    const std::string i8 = run_record_to_json(incidence_scan(ic, 5, 8, "fixed"));
    CHECK(i1 == i8);
}

TEST_CASE("empty scan family yields a valid zero-instance record") {
    ScanConfig c;
    c.mode = "extremal";
    c.family = "explicit";
    c.modulus = 11;
    const RunRecord r = extremal_scan(c, 0, 1, "fixed");
    CHECK(r.instances.empty());
    CHECK(r.ok_count == 0);
    CHECK(r.verdict == "empty scan");
    CHECK(std::isnan(r.min_value));
    const std::string js = run_record_to_json(r);
    CHECK(run_record_to_json(run_record_from_json(js)) == js);
}

TEST_CASE("per-instance failures are recorded and the scan continues") {
    ScanConfig c;
    c.mode = "extremal";
    c.family = "explicit";
    c.modulus = 11;
    c.explicit_sets = {{0, 1, 2}, {4}, {5, 6}};  // singleton cannot be censused
    const RunRecord r = extremal_scan(c, 0, 1, "fixed");
    CHECK(r.instances.size() == 3);
    CHECK(r.ok_count == 2);
    CHECK(r.error_count == 1);
    CHECK(r.instances[1].status == "error");
    CHECK_FALSE(r.instances[1].error.empty());
}

TEST_CASE("pencil family reproduces the hand census exactly") {
    ScanConfig c;
    c.mode = "incidence";
    c.family = "pencil";
    c.modulus = 31;
    c.n = 20;
    const RunRecord r = incidence_scan(c, 0, 1, "fixed");
    REQUIRE(r.instances.size() == 1);
    CHECK(r.instances[0].status == "ok");
    CHECK(metric(r.instances[0], "incidences") == 20.0);
    CHECK(metric(r.instances[0], "expected_incidences") == 20.0);
}

TEST_CASE("single point against a single line") {
    ScanConfig c;
    c.mode = "incidence";
    c.family = "random";
    c.modulus = 11;
    c.n = 1;
    c.count = 8;
    const RunRecord r = incidence_scan(c, 3, 1, "fixed");
    CHECK(r.ok_count == 8);
    for (const auto& inst : r.instances) {
        const double inc = metric(inst, "incidences");
        CHECK((inc == 0.0 || inc == 1.0));
    }
}

TEST_CASE("run records survive a lossless round trip") {
    ScanConfig c;
    c.mode = "extremal";
    c.family = "generated";
    c.modulus = 101;
    c.count = 3;
    c.has_template = true;
    c.tmpl.kind = GeneratorKind::Random;
    c.tmpl.modulus = 101;
    c.tmpl.n = 5;
    c.trace = true;  // embedded traces must round-trip as well
    const RunRecord r = extremal_scan(c, 99, 2, "fixed");
    const std::string js = run_record_to_json(r);
    const RunRecord back = run_record_from_json(js);
    CHECK(run_record_to_json(back) == js);
    CHECK(back.instances.size() == r.instances.size());
    CHECK(back.master_seed == 99);
}

TEST_CASE("record files are written atomically and read back verbatim") {
    ScanConfig c;
    c.mode = "extremal";
    c.family = "exhaustive";
    c.modulus = 7;
    c.set_size = 2;
    const RunRecord r = extremal_scan(c, 1, 1, "fixed");
    const auto path = temp_file("pflab_test_run.json");
    write_run_record(r, path.string());
    CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
    const RunRecord back = read_run_record(path.string());
    CHECK(run_record_to_json(back) == run_record_to_json(r));

    const auto csv = temp_file("pflab_test_run.csv");
    export_csv(r, csv.string());
    const std::string text = slurp(csv);
    CHECK(text.rfind("key,status,error,case_tag,", 0) == 0);
    CHECK(text.find("set:0;1") != std::string::npos);
    std::filesystem::remove(path);
    std::filesystem::remove(csv);
}

TEST_CASE("future or foreign schemas are rejected with a versioned error") {
    ScanConfig c;
    c.mode = "extremal";
    c.family = "exhaustive";
    c.modulus = 7;
    c.set_size = 2;
    std::string js = run_record_to_json(extremal_scan(c, 1, 1, "fixed"));

    // version bump
    std::string bumped = js;
    const auto pos = bumped.find("pflab-run/1");
    REQUIRE(pos != std::string::npos);
    bumped.replace(pos, 11, "pflab-run/2");
    bool threw = false;
    try {
        static_cast<void>(run_record_from_json(bumped));
    } catch (const SchemaMismatchError& e) {
        threw = true;
        // the error names the supported version
        CHECK(std::string(e.what()).find("pflab-run/1") != std::string::npos);
    }
    CHECK(threw);

    // unknown future top-level field
    std::string extended = js;
    extended.insert(extended.find("\"timestamp\""), "\"future_field\": 1, ");
    CHECK_THROWS_AS(static_cast<void>(run_record_from_json(extended)),
                    SchemaMismatchError);

    // malformed text
    CHECK_THROWS_AS(static_cast<void>(run_record_from_json("{ nope")),
                    CorruptRecordError);
    CHECK_THROWS_AS(static_cast<void>(run_record_from_json("")),
                    CorruptRecordError);
}

TEST_CASE("scan configs parse strictly") {
    ScanConfig c;
    c.mode = "incidence";
    c.family = "random";
    c.modulus = 499;
    c.n = 10;
    c.count = 4;
    const std::string js = scan_config_to_json(c);
    const ScanConfig back = parse_scan_config(js);
    CHECK(scan_config_to_json(back) == js);
    CHECK(back.n == 10);
    CHECK(back.count == 4);

    CHECK_THROWS_AS(parse_scan_config("{\"schema\":\"pflab-scan-config/9\"}"),
                    SchemaMismatchError);
    CHECK_THROWS_AS(
        parse_scan_config(
            "{\"schema\":\"pflab-scan-config/1\",\"mode\":\"extremal\","
            "\"family\":\"exhaustive\",\"modulus\":11,\"set_size\":3,"
            "\"mystery\":true}"),
        SchemaMismatchError);
    CHECK_THROWS_AS(parse_scan_config("not json"), CorruptRecordError);
}

TEST_CASE("input files load in all accepted layouts") {
    const PrimeField f(11);
    const auto path = temp_file("pflab_test_set.json");

    spit(path, "[3, 5, -1, 14]");
    CHECK(load_element_set(f, path.string()).residues() ==
          std::vector<std::uint32_t>{3, 5, 10});

    spit(path, "{\"elements\": [1, 2]}");
    CHECK(load_element_set(f, path.string()).residues() ==
          std::vector<std::uint32_t>{1, 2});

    spit(path,
         "{\"generator\": {\"kind\": \"interval\", \"modulus\": 11, \"n\": 3}}");
    CHECK(load_element_set(f, path.string()).residues() ==
          std::vector<std::uint32_t>{0, 1, 2});

    spit(path, "{\"generator\": {\"kind\": \"interval\", \"modulus\": 13, "
               "\"n\": 3}}");
    CHECK_THROWS_AS(load_element_set(f, path.string()), InputError);

    spit(path, "{\"elements\": [1], \"stray\": 0}");
    CHECK_THROWS_AS(load_element_set(f, path.string()), SchemaMismatchError);

    spit(path, "{\"points\": [[1, 0, 0], [0, 1, 0]]}");
    CHECK(load_proj_points(f, path.string()).size() == 2);
    spit(path, "[[1, 0, 0], [0, 0, 1]]");
    CHECK(load_proj_lines(f, path.string()).size() == 2);

    spit(path,
         "{\"modulus\": 11, \"x\": [1, 2, 3], \"y\": [4, 5, 6], "
         "\"edges\": [[1, 4], [2, 6], [3, 5]]}");
    const PairGraph g = load_pair_graph(path.string());
    CHECK(g.x().size() == 3);
    CHECK(g.edges().size() == 3);
    spit(path,
         "{\"modulus\": 11, \"x\": [1], \"y\": [2], \"edges\": [[1, 5]]}");
    CHECK_THROWS_AS(load_pair_graph(path.string()), SchemaMismatchError);

    std::filesystem::remove(path);
}

TEST_CASE("per-instance time budgets mark stragglers without aborting") {
    ScanConfig c;
    c.mode = "extremal";
    c.family = "exhaustive";
    c.modulus = 11;
    c.set_size = 3;
    c.budget_ms = 0;  // disabled: statuses must all stay ok
    const RunRecord r = extremal_scan(c, 7, 2, "fixed");
    CHECK(r.timeout_count == 0);
    CHECK(r.ok_count == 165);
}
