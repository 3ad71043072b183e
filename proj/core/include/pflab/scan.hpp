#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pflab/generator.hpp"

namespace pflab {

/// One explicit projective configuration inside a scan config.
struct ExplicitConfiguration {
    std::vector<std::array<std::int64_t, 3>> points;
    std::vector<std::array<std::int64_t, 3>> lines;
};

/// Parsed scan configuration (schema "pflab-scan-config/1").
///
/// mode "extremal" walks element sets A and measures the line census of the
/// grid A x A; families: "exhaustive" (all size-k subsets of F_p),
/// "generated" (count instances from a generator template, per-instance
/// seeds derived from the master seed), "explicit" (listed sets).
///
/// mode "incidence" walks (points, lines) configurations in the projective
/// plane; families: "random" (count instances of n uniform points and n
/// uniform lines), "pencil" (n lines through one marked point plus n-1
/// points off those lines), "explicit".
struct ScanConfig {
    std::string mode;    // "extremal" | "incidence"
    std::string family;  // see above
    std::uint32_t modulus = 3;
    std::uint64_t set_size = 0;  // extremal: |A|
    std::uint64_t n = 0;         // incidence: |P| = |L|
    std::uint64_t count = 0;     // generated/random instance count
    GeneratorSpec tmpl;          // family "generated"
    bool has_template = false;
    std::vector<std::vector<std::int64_t>> explicit_sets;
    std::vector<ExplicitConfiguration> explicit_configurations;
    bool trace = false;          // attach the full pipeline trace per instance
    std::uint64_t budget_ms = 0; // 0 disables the per-instance budget
    double delta = 1.0 / 267;    // extremal exponent gap (ratio + trace)
    double epsilon = 1.0 / 10678;  // incidence exponent gap (ratio + trace)
};

/// Strict parser: unknown fields, wrong types, or a wrong schema string
/// throw SchemaMismatchError; malformed JSON throws CorruptRecordError.
ScanConfig parse_scan_config(const std::string& text);
/// Canonical JSON echo of a config (what RunRecord.config stores).
std::string scan_config_to_json(const ScanConfig& config);

/// Outcome of one scan instance. Metrics are flat name/value pairs in a
/// fixed per-mode order; values are exact when integral.
struct ScanInstanceRecord {
    std::string key;     // canonical instance identity
    std::string status;  // "ok" | "error" | "timeout"
    std::string error;   // diagnostic when status == "error"
    std::string case_tag;  // pipeline case tag when traced
    std::vector<std::pair<std::string, double>> metrics;
    std::string trace;   // canonical trace JSON when tracing, else empty
};

/// Persistent result of one scan (schema "pflab-run/1").
struct RunRecord {
    std::string schema = "pflab-run/1";
    std::string timestamp;  // supplied by the caller; "" is valid
    std::string mode;       // "extremal" | "incidence"
    std::string config;     // canonical config JSON text
    std::uint64_t master_seed = 0;
    std::string primary_metric;  // reduced metric name
    std::vector<ScanInstanceRecord> instances;
    // Reduction over instances with status "ok" (ties on value resolve to
    // the smaller instance key):
    std::string min_key, max_key;
    double min_value, max_value, mean_value;  // NaN when no instance is ok
    std::uint64_t ok_count = 0, error_count = 0, timeout_count = 0;
    std::string verdict;  // one-line summary
};

/// Grid line-census scan. Per-instance failures are recorded with status
/// "error" and the scan continues; config-level errors throw. The primary
/// metric is theorem1_ratio, minimized.
RunRecord extremal_scan(const ScanConfig& config, std::uint64_t master_seed,
                        int threads = 1, const std::string& timestamp = "");

/// Projective incidence scan. The primary metric is incidence_ratio
/// I / n^(3/2 - epsilon), maximized.
RunRecord incidence_scan(const ScanConfig& config, std::uint64_t master_seed,
                         int threads = 1, const std::string& timestamp = "");

/// Canonical JSON of a record: two-space indent, insertion-ordered keys,
/// byte-identical for identical records.
std::string run_record_to_json(const RunRecord& record);
/// Strict inverse: wrong schema version or unknown fields throw
/// SchemaMismatchError; malformed JSON throws CorruptRecordError.
RunRecord run_record_from_json(const std::string& text);

/// Atomic persistence: writes to a sibling temporary file and renames, so
/// an interrupted run leaves no record behind.
void write_run_record(const RunRecord& record, const std::string& path);
RunRecord read_run_record(const std::string& path);

/// Flat per-instance table: key,status,error,case_tag followed by the
/// union of metric columns in first-appearance order.
void export_csv(const RunRecord& record, const std::string& path);

}  // namespace pflab
