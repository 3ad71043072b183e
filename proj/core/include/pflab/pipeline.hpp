#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pflab/addcomb.hpp"
#include "pflab/bsg.hpp"
#include "pflab/geometry.hpp"
#include "pflab/incidence.hpp"

namespace pflab {

/// One refinement stage of a replayed argument chain: the exactly measured
/// quantity, the scale the argument predicts for it at the configured
/// exponent gap, and their ratio. Predicted scales are soft comparisons
/// only (absolute constants are not reproducible at desk scale); a stage
/// whose chain commits to no scale carries NaN, serialized as null.
/// Inequalities that are theorems at every scale are enforced separately
/// inside the pipeline with exact integer arithmetic and throw
/// InternalCheckError on violation.
struct StageRecord {
    std::string name;  // stable stage identifier
    std::string tag;   // short mnemonic for the bound the stage replays
    double measured = std::numeric_limits<double>::quiet_NaN();
    double predicted = std::numeric_limits<double>::quiet_NaN();
    double ratio = std::numeric_limits<double>::quiet_NaN();
    /// Cardinalities of the artifacts this stage produced, in fixed order.
    std::vector<std::pair<std::string, std::uint64_t>> payload_sizes;
    /// Auxiliary measured values: thresholds, chain intermediates.
    std::vector<std::pair<std::string, double>> extras;
};

/// Tuning knobs of the grid chain. All thresholds are multiplicative;
/// popularity cuts are taken against the average share, with the
/// theoretical scale recorded alongside in the stage extras.
struct BeckParams {
    double delta = 1.0 / 267;  // exponent gap under test
    double c_rich = 1.0;       // line-richness threshold multiplier
    double c_pop = 1.0;        // popularity cut as a multiple of the average
    double eps_cover = 0.01;   // covering tolerance; must stay in (0, 1/4]
                               // so that the selected halves below exist
    BsgConfig bsg{};           // extraction thresholds for per-slope graphs
};

/// Artifacts of the extraction loop for one slope b (members of B1, kept
/// in ascending residue order).
struct SlopeData {
    std::uint32_t b = 0;
    std::uint64_t solutions = 0;  // #{(x1,x2) in A1^2 : x1 + b*x2 in (1+b)A1}
    std::optional<ElementSet> a1b, a2b;  // extracted subsets of A1
    std::uint64_t bsg_sumset = 0;        // |A1_b + b*A2_b|
    std::uint64_t doubling_1 = 0;        // |A1_b + A1_b|
    std::uint64_t doubling_2 = 0;        // |A2_b + A2_b|
    std::uint64_t intersection = 0;      // |A1_b ^ A1_*| * |A2_b ^ A2_*|
    bool in_b2 = false;                  // survived the intersection cut
    std::optional<ElementSet> a1_wedge, a2_wedge;  // meets with the central slope
    std::uint64_t cross_sumset = 0;      // |b_* A2_* + b A2_*| (B2 members)
};

/// Ratio-set dichotomy certificate for a refined set Y1.
///
/// CaseI: the ratio set R = {(a-b)/(c-d)} is large (|R| >= |Y1|^2, or R is
/// the whole field); xi is the member of R maximizing |Y1 + xi*Y1| (ties:
/// smallest residue) and `quadruple` is the first (a,b,c,d) in ascending
/// residue order realizing xi = (a-b)/(c-d).
///
/// CaseII: R is small; xi = (a-b)/(c-d) + 1 for the first quadruple in
/// ascending order whose shifted ratio escapes R. Every such xi admits only
/// one representation y + xi*y', so |Y1 + xi*Y1| = |Y1|^2 exactly; this is
/// recomputed and enforced (InternalCheckError on failure).
struct CaseSplitResult {
    std::string case_tag;               // "CaseI" or "CaseII"
    std::uint64_t ratio_set_size = 0;   // |R|
    bool ratio_set_is_field = false;    // R = F_p
    std::uint32_t xi = 0;               // distinguished dilation ratio
    std::array<std::uint32_t, 4> quadruple{};  // (a, b, c, d) as residues
    std::uint64_t certificate_size = 0;        // |Y1 + xi*Y1|
    std::uint64_t y1_squared = 0;              // |Y1|^2
};

/// Full record of one grid run of the line-count contradiction chain.
/// Stage records carry the measured/predicted comparisons; the materialized
/// sets stay in memory so invariants (subset chains, recomputed counts) can
/// be checked without reparsing.
struct BeckTrace {
    std::uint32_t modulus = 0;
    std::uint64_t n = 0;  // common size of the two sides
    BeckParams params;
    bool range_warning = false;  // n^2 >= p: outside the intended regime
    bool completed = false;
    std::string empty_stage;  // first stage whose output emptied, when truncated
    double delta_eff = std::numeric_limits<double>::quiet_NaN();
    bool verdict = false;  // 267 * delta_eff >= 1
    std::string case_tag;  // dichotomy branch taken, when reached
    std::vector<StageRecord> stages;

    // Materialized artifacts, populated as stages complete.
    std::optional<ElementSet> a1, a2;  // inputs
    std::uint64_t line_count = 0;      // |L(A1 x A2)|
    std::uint32_t y1 = 0, y2 = 0;      // fixed row pair (argmax)
    std::uint64_t row_pair_solutions = 0;
    std::optional<ElementSet> a2_norm;         // A2 mapped by (y1,y2) -> (0,1)
    std::optional<ElementSet> b_set, b1, b2;   // slope sets
    std::vector<SlopeData> slopes;             // one entry per member of B1
    std::uint32_t b_star = 0;                  // central slope
    std::optional<ElementSet> x_set, y_slopes; // X = A2_*, Y = (1/b_*) B2
    std::uint64_t k_max_sumset = 0;            // K = max_y |X + yX|
    std::uint32_t x_tilde_1 = 0, x_tilde_2 = 0;
    std::optional<ElementSet> x1, x2;          // X - x_tilde_i
    std::optional<ElementSet> y_rich;          // slopes rich on the X1 x X2 grid
    std::uint32_t u_star = 0;                  // nonzero column maximizing hits
    std::optional<ElementSet> y_one;           // Y1 = X2 ^ u_* Y_rich
    std::optional<CaseSplitResult> case_result;
    std::optional<ElementSet> y_one_prime;     // covering-selected half of Y1
    std::optional<ElementSet> a2_star_half;    // covering-selected half of A2_*
};

/// #{(x1, x2) in A1^2 : x1 + b*x2 in (1+b)*A1}. The slope b encodes the
/// third-row parameter t = b/(1+b); b = 0 and b = -1 correspond to the two
/// anchored rows and throw BadSlopeError. The donor set a2 only fixes the
/// modulus (membership of the encoded row value is deliberately not
/// enforced, so slope families can be probed directly).
std::uint64_t solutions_bssetup(const ElementSet& a1, const ElementSet& a2,
                                FieldElement b);

/// Ratio-set dichotomy on y1 (|Y1| >= 2, TooSmallError otherwise). See
/// CaseSplitResult for the branch semantics and certificates.
CaseSplitResult case_split(const ElementSet& y1);

/// Replays the grid contradiction chain on A1 x A2 (equal sizes, n >= 2).
/// The run never fails on adversarial inputs: a stage whose output empties
/// truncates the trace with `empty_stage` set. Predicted scales use
/// params.delta; internal inequalities that hold unconditionally are
/// enforced exactly and throw InternalCheckError if violated (which would
/// indicate a defect, not bad data). `threads` only fans out candidate
/// scans; results are identical for every thread count.
BeckTrace run_beck_pipeline(const ElementSet& a1, const ElementSet& a2,
                            const BeckParams& params = {}, int threads = 1);

/// Tuning knobs of the incidence chain.
struct IncidenceParams {
    double epsilon = 1.0 / 10678;  // incidence exponent gap, in (0, 1/38)
    double c_erase = 1.0;   // erasure threshold multiplier on n^{1/2+eps}
    double c_pop = 1.0;     // popularity threshold multiplier on n^{1/2-eps}
    int refine_depth = 1;   // point/line popularity rounds before the final cut
    BeckParams beck{};      // forwarded to the grid handoff (delta is derived)
};

/// Full record of one run of the incidence contradiction chain on (P, L)
/// in the projective plane.
struct IncidenceTrace {
    std::uint32_t modulus = 0;
    std::uint64_t n = 0;  // |P| = |L|
    IncidenceParams params;
    bool completed = false;
    std::string empty_stage;
    double eps_eff = std::numeric_limits<double>::quiet_NaN();
    double delta_merge = std::numeric_limits<double>::quiet_NaN();
    std::vector<StageRecord> stages;

    std::uint64_t incidences = 0;  // I(P, L)
    std::optional<ProjPointSet> p_busy;  // erased high-degree points
    std::optional<ProjPointSet> p1, p2, p3;
    std::optional<ProjLineSet> l1;
    ProjPoint p_bar{}, p_til{};  // fixed point pair (valid once p3 exists)
    std::optional<ProjectiveMap> chart_map;
    std::uint64_t infinity_exclusions = 0;  // P3 images falling on z = 0
    std::optional<ElementSet> grid_a, grid_b;
    std::optional<BeckTrace> grid_trace;  // the handoff run on the trimmed grid
};

/// Replays the incidence chain: census, busy-point erasure, popularity
/// refinement, neighborhood intersection, chart change placing the fixed
/// pair at infinity, grid extraction, and the handoff to the grid chain
/// with delta = 40*eps / (1 + 2*eps). Preconditions: |P| = |L| = n >= 4,
/// matching moduli. Truncation semantics match run_beck_pipeline.
IncidenceTrace run_incidence_pipeline(const ProjPointSet& p,
                                      const ProjLineSet& l,
                                      const IncidenceParams& params = {},
                                      int threads = 1);

/// Exponent relation between the grid gap delta and the incidence gap
/// epsilon: eps = delta / (40 - 2*delta). Requires 0 < delta <= 1.
double epsilon_from_delta(double delta);
/// The same relation on exact rationals: delta = num/den (0 < num <= den)
/// maps to the reduced fraction eps = num / (40*den - 2*num).
std::pair<std::uint64_t, std::uint64_t> epsilon_from_delta_exact(
    std::uint64_t num, std::uint64_t den);
/// Inverse relation: delta = 40*eps / (1 + 2*eps). Requires 0 < eps <= 1.
double delta_from_epsilon(double epsilon);

}  // namespace pflab
