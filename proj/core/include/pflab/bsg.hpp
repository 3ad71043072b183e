#pragma once

#include <cstdint>
#include <vector>

#include "pflab/addcomb.hpp"

namespace pflab {

/// Bipartite pair graph on X x Y with edge density alpha = |E| / (|X||Y|).
class PairGraph {
public:
    PairGraph(ElementSet x, ElementSet y,
              std::vector<std::pair<std::uint32_t, std::uint32_t>> edges);

    const ElementSet& x() const { return x_; }
    const ElementSet& y() const { return y_; }
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges() const {
        return edges_;
    }
    std::uint32_t modulus() const { return x_.modulus(); }
    double alpha() const {
        return double(edges_.size()) / (double(x_.size()) * double(y_.size()));
    }

private:
    ElementSet x_, y_;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges_;  // sorted, deduped
};

/// Internal refinement thresholds. All multiplicative; the defaults follow
/// the usual dependent-random-choice bookkeeping.
struct BsgConfig {
    double popular_frac = 0.5;    // popular sums: r(s) >= popular_frac * alpha * n
    double codeg_frac = 0.125;    // useful co-degree: >= codeg_frac * alpha^2 * n
    double bad_frac = 0.25;       // drop x with more than bad_frac*|X0| weak partners
    double neighbor_frac = 0.25;  // keep y with |N(y) & X'| >= neighbor_frac*alpha*|X'|
    double c_bsg = 1.0 / 16;      // size guarantee constant
    double big_c_bsg = 1024.0;    // sumset guarantee constant (2^10)
};

struct BsgResult {
    ElementSet x_prime, y_prime;
    std::uint64_t sumset_size;  // |X' + Y'| over the full rectangle
    double alpha;
    std::uint32_t pivot;        // pivot y0 finally kept
    double x_ratio;             // |X'| / (alpha n)
    double y_ratio;             // |Y'| / (alpha n)
    double sumset_ratio;        // |X' + Y'| / (alpha^-5 n)
    bool meets_size_bound;      // min(|X'|, |Y'|) >= c_bsg * alpha * n
    bool meets_sumset_bound;    // |X' + Y'| <= big_c_bsg * alpha^-5 * n
};

/// Balog-Szemeredi-Gowers extraction, derandomized: edges are restricted to
/// popular sums, then every pivot y0 in Y is tried as the neighborhood seed
/// of a path-of-length-2 refinement, and the best (X', Y') is kept
/// (maximal min size; ties prefer the smaller restricted sumset, then the
/// smallest pivot). Requires |X| = |Y| = n >= 2 and at least one edge, and
/// that x + y takes at most n distinct values on E (HypothesisViolatedError
/// otherwise).
BsgResult bsg_extract(const PairGraph& g, const BsgConfig& cfg = {});

/// Ground truth for tiny instances (n <= 8, SearchTooLargeError above):
/// exhaustive search over all nonempty subset pairs, maximizing
/// min(|X'|, |Y'|) subject to |X' + Y'| <= alpha^-5 n; ties prefer larger
/// |X'| + |Y'|, then the earliest pair in ascending bitmask order.
BsgResult bsg_oracle(const PairGraph& g);

}  // namespace pflab
