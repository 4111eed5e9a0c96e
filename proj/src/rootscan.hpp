#pragma once

// Scalar root finding shared by the equilibrium and bifurcation searches.

#include <algorithm>
#include <cmath>
#include <vector>

namespace qmem::detail {

/// Root of g on [a, b] given g(a), g(b) of opposite sign. g(x) returns an indexable
/// pair {g, g'}. Bisection to ~1e-10, then Newton kept inside the bracket.
template <class G>
double bracketed_root(const G& g, double a, double b, double target, double& residual) {
    double ga = g(a)[0];
    double lo = a, hi = b;
    for (int it = 0; it < 60 && (hi - lo) > 1e-10 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid)[0];
        if (gm == 0.0) {
            residual = 0.0;
            return mid;
        }
        if ((gm < 0.0) == (ga < 0.0)) {
            lo = mid;
            ga = gm;
        } else {
            hi = mid;
        }
    }
    double x = 0.5 * (lo + hi);
    auto val = g(x);
    for (int it = 0; it < 30 && std::abs(val[0]) > target; ++it) {
        if (val[1] == 0.0) break;
        const double next = x - val[0] / val[1];
        if (!(next > lo && next < hi)) break;
        x = next;
        val = g(x);
    }
    residual = std::abs(val[0]);
    return x;
}

struct ScanRoot {
    double x = 0.0;
    double residual = 0.0;
    bool tangent = false;
};

/// Sign changes of g over n uniform cells on [a, b], each refined.
template <class G>
std::vector<ScanRoot> sign_change_roots(const G& g, double a, double b, int n, double target) {
    std::vector<ScanRoot> out;
    double prev_x = a;
    double prev = g(a)[0];
    for (int i = 1; i <= n; ++i) {
        const double x = (i == n) ? b : a + (b - a) * static_cast<double>(i) / n;
        const double cur = g(x)[0];
        if (cur == 0.0) {
            out.push_back({x, 0.0, false});
        } else if (prev != 0.0 && (cur < 0.0) != (prev < 0.0)) {
            ScanRoot r;
            r.x = bracketed_root(g, prev_x, x, target, r.residual);
            out.push_back(r);
        }
        prev_x = x;
        prev = cur;
    }
    return out;
}

/// All roots of g on [a, b]. Critical points of g (roots of dg, found by scan) cut the
/// interval into monotone pieces so that close root pairs are not lost inside one scan
/// cell; a critical point where |g| <= tangent_tol is reported as a tangent root.
/// Roots closer than merge_distance are merged and flagged tangent.
template <class G, class DG>
std::vector<ScanRoot> monotone_piece_roots(const G& g, const DG& dg, double a, double b, int n, double target,
                                           double tangent_tol, double merge_distance) {
    std::vector<double> cuts{a};
    for (const auto& c : sign_change_roots(dg, a, b, n, 1e-14))
        if (c.x > a && c.x < b) cuts.push_back(c.x);
    cuts.push_back(b);

    std::vector<ScanRoot> roots;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double lo = cuts[k], hi = cuts[k + 1];
        if (!(hi > lo)) continue;
        const double glo = g(lo)[0];
        const double ghi = g(hi)[0];
        if (glo == 0.0 && k == 0) roots.push_back({lo, 0.0, false});
        if (ghi == 0.0) {
            roots.push_back({hi, 0.0, false});
            continue;
        }
        if (glo != 0.0 && (glo < 0.0) != (ghi < 0.0)) {
            ScanRoot r;
            r.x = bracketed_root(g, lo, hi, target, r.residual);
            roots.push_back(r);
        }
    }
    for (std::size_t k = 1; k + 1 < cuts.size(); ++k) {
        const double gc = g(cuts[k])[0];
        if (gc != 0.0 && std::abs(gc) <= tangent_tol) roots.push_back({cuts[k], std::abs(gc), true});
    }
    std::sort(roots.begin(), roots.end(), [](const ScanRoot& x, const ScanRoot& y) { return x.x < y.x; });

    std::vector<ScanRoot> merged;
    for (const auto& r : roots) {
        if (!merged.empty() && std::abs(r.x - merged.back().x) < merge_distance) {
            merged.back().tangent = true;
            if (r.residual < merged.back().residual) {
                merged.back().x = r.x;
                merged.back().residual = r.residual;
            }
            continue;
        }
        merged.push_back(r);
    }
    return merged;
}

}  // namespace qmem::detail
