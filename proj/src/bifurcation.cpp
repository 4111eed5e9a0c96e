#include "qmem/bifurcation.hpp"

#include "qmem/errors.hpp"
#include "rootscan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qmem {

namespace {

Model scan_model(const DeviceParams& dev, double r_n) { return Model(dev, CircuitParams{r_n, 0.0}); }

void check_scan(const VoltageScan& scan) {
    if (!(scan.v_lo < scan.v_hi) || scan.n_scan < 16) throw DomainError("voltage scan: need v_lo < v_hi and n_scan >= 16");
}

}  // namespace

std::vector<CuspPoint> find_cusp(const DeviceParams& dev, const VoltageScan& scan) {
    return find_cusp(scan_model(dev, 1.0), scan);
}

std::vector<CuspPoint> find_cusp(const Model& model, const VoltageScan& scan) {
    check_scan(scan);
    const BalanceFunction f(model);
    // D_V^2 f = -(R_n/2) h with h = 2 S' + V S''; D_V^3 f = -(R_n/2) h'.
    const auto h = [&](double v) {
        const auto s = f.occupation(v, 3);
        return std::array<double, 2>{2.0 * s[1] + v * s[2], 3.0 * s[2] + v * s[3]};
    };
    std::vector<CuspPoint> out;
    for (const auto& r : detail::sign_change_roots(h, scan.v_lo, scan.v_hi, scan.n_scan, 1e-14)) {
        const double v = r.x;
        const auto s = f.occupation(v, 1);
        const double denom = s[0] + v * s[1];
        if (!(denom < 0.0)) continue;  // would need R_n <= 0
        const double r_n = -2.0 / denom;
        if (!(h(v)[1] * r_n > 0.0)) continue;  // D_V f must peak here (D_V^3 f < 0)
        out.push_back({v, r_n, (1.0 + 0.5 * r_n * s[0]) * v});
    }
    return out;
}

std::vector<SaddleNodePoint> find_saddle_nodes(const DeviceParams& dev, double r_n, const VoltageScan& scan) {
    return find_saddle_nodes(scan_model(dev, r_n), r_n, scan);
}

std::vector<SaddleNodePoint> find_saddle_nodes(const Model& model, double r_n, const VoltageScan& scan) {
    check_scan(scan);
    if (!(r_n >= 0.0)) throw DomainError("find_saddle_nodes: R_n must be nonnegative");
    const Model m = model.with_circuit({r_n, 0.0});
    const BalanceFunction f(m);
    const auto df = [&](double v) {
        const auto d = f.derivatives(v, 2);
        return std::array<double, 2>{d[1], d[2]};
    };
    const auto d2f = [&](double v) {
        const auto d = f.derivatives(v, 3);
        return std::array<double, 2>{d[2], d[3]};
    };
    std::vector<SaddleNodePoint> out;
    for (const auto& r : detail::monotone_piece_roots(df, d2f, scan.v_lo, scan.v_hi, scan.n_scan, 1e-14, 1e-9, 1e-6)) {
        const double s0 = f.occupation(r.x, 0)[0];
        const SaddleNodePoint p{r.x, (1.0 + 0.5 * r_n * s0) * r.x, r_n};
        out.push_back(p);
        if (r.tangent) out.push_back(p);  // coincident fold pair at the cusp
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

struct PairProbe {
    double v_star = 0.0;
    bool has_pair = false;
    double re = 0.0;
    double im = 0.0;
};

PairProbe probe(const Model& m, double v_star) {
    PairProbe p;
    p.v_star = v_star;
    const auto ea = eigenvalues_and_classify(jacobian_at(v_star, m));
    std::complex<double> pair;
    p.has_pair = leading_complex_pair(ea.eigenvalues, pair);
    if (p.has_pair) {
        p.re = pair.real();
        p.im = pair.imag();
    }
    return p;
}

// Equilibrium near `guess` by safeguarded Newton; falls back to a full root scan.
double equilibrium_near(const Model& m, double guess) {
    const BalanceFunction f(m);
    double v = guess;
    const double tol = 1e-13 * std::max(1.0, std::abs(m.circuit().v_n));
    for (int it = 0; it < 50; ++it) {
        const auto d = f.derivatives(v, 1);
        if (std::abs(d[0]) <= tol) return v;
        if (d[1] == 0.0) break;
        const double step = d[0] / d[1];
        v -= step;
        if (!std::isfinite(v) || std::abs(v - guess) > 0.5) break;
    }
    double best = guess;
    double dist = std::numeric_limits<double>::infinity();
    for (const auto& r : find_roots(m)) {
        if (std::abs(r.v - guess) < dist) {
            dist = std::abs(r.v - guess);
            best = r.v;
        }
    }
    return best;
}

std::size_t nearest_index(const std::vector<Root>& roots, double v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < roots.size(); ++i)
        if (std::abs(roots[i].v - v) < std::abs(roots[best].v - v)) best = i;
    return best;
}

}  // namespace

std::vector<BranchSample> track_equilibrium_branch(const Model& model, const HopfOptions& opt) {
    if (opt.n_grid < 16) throw DomainError("find_hopf: n_grid must be >= 16");
    if (!(opt.v_n_lo < opt.v_n_hi)) throw DomainError("find_hopf: empty V_n range");
    const double r_n = model.circuit().r_n;

    std::vector<BranchSample> samples;
    std::vector<Root> prev;
    std::size_t tracked = 0;
    int segment = 0;
    for (int i = 0; i < opt.n_grid; ++i) {
        const double vn = opt.v_n_lo + (opt.v_n_hi - opt.v_n_lo) * i / (opt.n_grid - 1);
        const Model m = model.with_circuit({r_n, vn});
        const auto roots = find_roots(m);
        if (prev.empty()) {
            tracked = 0;
        } else if (roots.size() == prev.size()) {
            tracked = std::min(tracked, roots.size() - 1);
        } else if (prev.size() == 3 && roots.size() == 1) {
            const bool lower_pair_gone = std::abs(roots[0].v - prev[2].v) < std::abs(roots[0].v - prev[0].v);
            const bool lost = lower_pair_gone ? tracked <= 1 : tracked >= 1;
            if (lost) ++segment;
            tracked = 0;
        } else {
            tracked = nearest_index(roots, prev[tracked].v);
        }
        const PairProbe p = probe(m, roots[tracked].v);
        samples.push_back({vn, p.v_star, p.has_pair, p.re, p.im, segment});
        prev = roots;
    }
    return samples;
}

std::vector<HopfPoint> find_hopf(const DeviceParams& dev, double r_n, const HopfOptions& opt) {
    return find_hopf(Model(dev, CircuitParams{r_n, opt.v_n_lo}), opt);
}

std::vector<HopfPoint> find_hopf(const Model& model, const HopfOptions& opt) {
    const auto samples = track_equilibrium_branch(model, opt);
    const double r_n = model.circuit().r_n;
    std::vector<HopfPoint> out;
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        const auto& a = samples[i];
        const auto& b = samples[i + 1];
        if (a.segment != b.segment || !a.has_pair || !b.has_pair) continue;
        if ((a.pair_re < 0.0) == (b.pair_re < 0.0)) continue;

        double lo = a.v_n, hi = b.v_n;
        double re_lo = a.pair_re;
        PairProbe best{a.v_star, true, a.pair_re, a.pair_im};
        double best_vn = a.v_n;
        if (std::abs(b.pair_re) < std::abs(best.re)) {
            best = {b.v_star, true, b.pair_re, b.pair_im};
            best_vn = b.v_n;
        }
        for (int it = 0; it < 100 && std::abs(best.re) > opt.re_tolerance && hi - lo > 1e-14; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double guess = a.v_star + (b.v_star - a.v_star) * (mid - a.v_n) / (b.v_n - a.v_n);
            const Model m = model.with_circuit({r_n, mid});
            const PairProbe p = probe(m, equilibrium_near(m, guess));
            if (!p.has_pair) break;
            if (std::abs(p.re) < std::abs(best.re)) {
                best = p;
                best_vn = mid;
            }
            if ((p.re < 0.0) == (re_lo < 0.0)) {
                lo = mid;
                re_lo = p.re;
            } else {
                hi = mid;
            }
        }
        HopfPoint hp;
        hp.v_n_hopf = best_vn;
        hp.v_star = best.v_star;
        hp.omega_hopf = std::abs(best.im);
        hp.re_residual = std::abs(best.re);
        hp.onset = a.pair_re < 0.0;
        hp.segment = a.segment;
        out.push_back(hp);
    }
    return out;
}

double reduced_frequency(const DeviceParams& dev) { return std::sqrt(dev.omega * dev.omega + dev.gamma * dev.gamma); }

}  // namespace qmem
