#include "pflab/bsg.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "pflab/errors.hpp"

namespace pflab {

namespace {

using Bits = std::vector<std::uint64_t>;

Bits make_bits(std::size_t n) { return Bits((n + 63) / 64, 0); }
void set_bit(Bits& b, std::size_t i) { b[i >> 6] |= std::uint64_t(1) << (i & 63); }
bool test_bit(const Bits& b, std::size_t i) {
    return (b[i >> 6] >> (i & 63)) & 1;
}
std::size_t and_popcount(const Bits& a, const Bits& b) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        n += __builtin_popcountll(a[i] & b[i]);
    return n;
}
std::size_t popcount(const Bits& a) {
    std::size_t n = 0;
    for (auto w : a) n += __builtin_popcountll(w);
    return n;
}

std::uint64_t rect_sumset_size(const std::vector<std::uint32_t>& xs,
                               const std::vector<std::uint32_t>& ys,
                               std::uint32_t p) {
    std::unordered_set<std::uint32_t> sums;
    sums.reserve(xs.size() * ys.size());
    for (auto x : xs)
        for (auto y : ys) sums.insert(add_mod(x, y, p));
    return sums.size();
}

std::vector<std::uint32_t> collect(const std::vector<std::uint32_t>& universe,
                                   const Bits& mask) {
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < universe.size(); ++i)
        if (test_bit(mask, i)) out.push_back(universe[i]);
    return out;
}

void check_hypothesis(const PairGraph& g) {
    std::unordered_set<std::uint32_t> sums;
    for (const auto& [x, y] : g.edges()) sums.insert(add_mod(x, y, g.modulus()));
    if (sums.size() > g.x().size())
        throw HypothesisViolatedError(
            "x + y takes " + std::to_string(sums.size()) +
            " values on E, more than n = " + std::to_string(g.x().size()));
}

}  // namespace

PairGraph::PairGraph(ElementSet x, ElementSet y,
                     std::vector<std::pair<std::uint32_t, std::uint32_t>> edges)
    : x_(std::move(x)), y_(std::move(y)), edges_(std::move(edges)) {
    if (x_.modulus() != y_.modulus())
        throw FieldMismatchError("graph sides over different fields");
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    for (const auto& [ex, ey] : edges_)
        if (!x_.contains(ex) || !y_.contains(ey))
            throw InputError("edge endpoint outside the graph's vertex sets");
    if (edges_.empty()) throw TooSmallError("pair graph needs at least one edge");
}

BsgResult bsg_extract(const PairGraph& g, const BsgConfig& cfg) {
    const std::size_t n = g.x().size();
    if (n < 2 || g.y().size() != n)
        throw TooSmallError("extraction needs |X| = |Y| = n >= 2");
    check_hypothesis(g);

    const std::uint32_t p = g.modulus();
    const double alpha = g.alpha();
    const auto& xs = g.x().residues();
    const auto& ys = g.y().residues();

    auto xindex = [&xs](std::uint32_t v) {
        return std::size_t(std::lower_bound(xs.begin(), xs.end(), v) - xs.begin());
    };
    auto yindex = [&ys](std::uint32_t v) {
        return std::size_t(std::lower_bound(ys.begin(), ys.end(), v) - ys.begin());
    };

    // Restrict to edges whose sum is popular; at least half the edges
    // survive because the unpopular sums carry less than n * threshold.
    std::unordered_map<std::uint32_t, std::uint32_t> rep;
    for (const auto& [x, y] : g.edges()) ++rep[add_mod(x, y, p)];
    const double t_pop = cfg.popular_frac * alpha * double(n);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> e2;
    for (const auto& [x, y] : g.edges())
        if (double(rep[add_mod(x, y, p)]) >= t_pop) e2.emplace_back(x, y);
    if (e2.empty()) e2 = g.edges();  // every sum unpopular only when t_pop > max r

    std::vector<Bits> nx(n, make_bits(n));  // x-index -> mask over y-indices
    std::vector<Bits> ny(n, make_bits(n));  // y-index -> mask over x-indices
    for (const auto& [x, y] : e2) {
        set_bit(nx[xindex(x)], yindex(y));
        set_bit(ny[yindex(y)], xindex(x));
    }

    const double t_codeg = cfg.codeg_frac * alpha * alpha * double(n);
    bool have_best = false;
    std::size_t best_min = 0;
    std::uint64_t best_sumset = 0;
    std::uint32_t best_pivot = 0;
    std::vector<std::uint32_t> best_x, best_y;

    for (std::size_t y0 = 0; y0 < n; ++y0) {
        const Bits& x0 = ny[y0];
        const std::size_t x0_size = popcount(x0);
        if (x0_size == 0) continue;

        // Drop x whose co-degree with too many members of X0 is weak.
        Bits xp = make_bits(n);
        std::size_t xp_size = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!test_bit(x0, i)) continue;
            std::size_t weak = 0;
            for (std::size_t j = 0; j < n; ++j)
                if (test_bit(x0, j) &&
                    double(and_popcount(nx[i], nx[j])) < t_codeg)
                    ++weak;
            if (double(weak) <= cfg.bad_frac * double(x0_size)) {
                set_bit(xp, i);
                ++xp_size;
            }
        }
        if (xp_size == 0) continue;

        // Keep y well-connected to the refined X'.
        const double t_nbr = cfg.neighbor_frac * alpha * double(xp_size);
        std::vector<std::uint32_t> ycand;
        for (std::size_t j = 0; j < n; ++j)
            if (double(and_popcount(ny[j], xp)) >= std::max(t_nbr, 1.0))
                ycand.push_back(ys[j]);
        if (ycand.empty()) continue;

        std::vector<std::uint32_t> xcand = collect(xs, xp);
        std::uint64_t ss = rect_sumset_size(xcand, ycand, p);
        std::size_t mn = std::min(xcand.size(), ycand.size());
        bool better = !have_best || mn > best_min ||
                      (mn == best_min && ss < best_sumset);
        if (better) {
            have_best = true;
            best_min = mn;
            best_sumset = ss;
            best_pivot = ys[y0];
            best_x = std::move(xcand);
            best_y = std::move(ycand);
        }
    }

    if (!have_best) {
        // Degenerate instance: fall back to the first edge as singletons.
        const auto& [x, y] = e2.front();
        best_x = {x};
        best_y = {y};
        best_sumset = 1;
        best_pivot = y;
    }

    const PrimeField f(p);
    BsgResult r{ElementSet(f, best_x), ElementSet(f, best_y), best_sumset,
                alpha, best_pivot, 0, 0, 0, false, false};
    const double an = alpha * double(n);
    const double cap = std::pow(alpha, -5.0) * double(n);
    r.x_ratio = double(r.x_prime.size()) / an;
    r.y_ratio = double(r.y_prime.size()) / an;
    r.sumset_ratio = double(r.sumset_size) / cap;
    const double min_size = double(std::min(r.x_prime.size(), r.y_prime.size()));
    r.meets_size_bound = min_size + 1e-9 >= cfg.c_bsg * an;
    r.meets_sumset_bound = double(r.sumset_size) <= cfg.big_c_bsg * cap + 1e-9;
    return r;
}

BsgResult bsg_oracle(const PairGraph& g) {
    const std::size_t n = g.x().size();
    if (n < 2 || g.y().size() != n)
        throw TooSmallError("oracle needs |X| = |Y| = n >= 2");
    if (n > 8)
        throw SearchTooLargeError("oracle limited to n <= 8, got " +
                                  std::to_string(n));
    check_hypothesis(g);

    const std::uint32_t p = g.modulus();
    const double alpha = g.alpha();
    const double cap = std::pow(alpha, -5.0) * double(n);
    const auto& xs = g.x().residues();
    const auto& ys = g.y().residues();

    std::size_t best_min = 0, best_total = 0;
    std::uint64_t best_sumset = 0;
    std::uint32_t best_mx = 0, best_my = 0;
    for (std::uint32_t mx = 1; mx < (1u << n); ++mx) {
        std::vector<std::uint32_t> sx;
        for (std::size_t i = 0; i < n; ++i)
            if (mx & (1u << i)) sx.push_back(xs[i]);
        for (std::uint32_t my = 1; my < (1u << n); ++my) {
            std::vector<std::uint32_t> sy;
            for (std::size_t i = 0; i < n; ++i)
                if (my & (1u << i)) sy.push_back(ys[i]);
            std::uint64_t ss = rect_sumset_size(sx, sy, p);
            if (double(ss) > cap) continue;
            std::size_t mn = std::min(sx.size(), sy.size());
            std::size_t tot = sx.size() + sy.size();
            if (mn > best_min || (mn == best_min && tot > best_total)) {
                best_min = mn;
                best_total = tot;
                best_sumset = ss;
                best_mx = mx;
                best_my = my;
            }
        }
    }
    if (best_min == 0)
        throw InternalCheckError("oracle found no feasible pair");  // singletons always fit

    std::vector<std::uint32_t> sx, sy;
    for (std::size_t i = 0; i < n; ++i) {
        if (best_mx & (1u << i)) sx.push_back(xs[i]);
        if (best_my & (1u << i)) sy.push_back(ys[i]);
    }
    const PrimeField f(p);
    BsgResult r{ElementSet(f, sx), ElementSet(f, sy), best_sumset,
                alpha, 0, 0, 0, 0, false, false};
    const double an = alpha * double(n);
    r.x_ratio = double(r.x_prime.size()) / an;
    r.y_ratio = double(r.y_prime.size()) / an;
    r.sumset_ratio = double(r.sumset_size) / cap;
    r.meets_size_bound = double(best_min) + 1e-9 >= an;
    r.meets_sumset_bound = double(r.sumset_size) <= cap + 1e-9;
    return r;
}

}  // namespace pflab
