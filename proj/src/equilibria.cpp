#include "qmem/equilibria.hpp"

#include "qmem/errors.hpp"
#include "rootscan.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qmem {

std::array<double, 4> BalanceFunction::occupation(double v, int max_order) const {
    const auto& dev = model_.device();
    const OverlapJet jet = model_.overlap().evaluate(model_.x_v(v), max_order);
    const double c = -dev.geom.l * std::numbers::sqrt2;  // dx_V/dV
    std::array<double, 4> s{};
    double chain = 1.0;
    for (int k = 0; k <= max_order; ++k) {
        s[k] = chain * ((1.0 + dev.z_t) * jet.d[k].f00 + (1.0 - dev.z_t) * jet.d[k].f11);
        chain *= c;
    }
    return s;
}

std::array<double, 4> BalanceFunction::derivatives(double v, int max_order) const {
    const double half_r = 0.5 * model_.circuit().r_n;
    const auto s = occupation(v, max_order);
    std::array<double, 4> f{};
    f[0] = model_.circuit().v_n - (1.0 + half_r * s[0]) * v;
    if (max_order >= 1) f[1] = -1.0 - half_r * (s[0] + v * s[1]);
    if (max_order >= 2) f[2] = -half_r * (2.0 * s[1] + v * s[2]);
    if (max_order >= 3) f[3] = -half_r * (3.0 * s[2] + v * s[3]);
    return f;
}

double f_of_v(double v, const DeviceParams& dev, const CircuitParams& circ) {
    const Model model(dev, circ);
    return BalanceFunction(model).value(v);
}

std::string_view to_string(Stability s) {
    switch (s) {
    case Stability::StableNodeFocus: return "stable";
    case Stability::Saddle: return "saddle";
    case Stability::UnstableFocus: return "unstable-focus";
    case Stability::CenterMarginal: return "center-marginal";
    }
    return "?";
}

std::vector<Root> find_roots(const Model& model, const EquilibriumOptions& opt) {
    if (opt.n_scan < 16) throw DomainError("find_equilibria: n_scan must be >= 16");
    const double vn = model.circuit().v_n;
    if (vn == 0.0) return {{0.0, 0.0, false}};

    const BalanceFunction f(model);
    const auto fv = [&](double v) { return f.derivatives(v, 1); };
    const auto dfv = [&](double v) {
        const auto d = f.derivatives(v, 2);
        return std::array<double, 2>{d[1], d[2]};
    };
    const auto found = detail::monotone_piece_roots(fv, dfv, std::min(0.0, vn), std::max(0.0, vn), opt.n_scan,
                                                    opt.residual_target, 1e-10, opt.merge_distance);
    if (found.empty())
        throw NumericalError("find_equilibria: no root found although f(0) and f(V_n) differ in sign");
    std::vector<Root> out;
    out.reserve(found.size());
    for (const auto& r : found) out.push_back({r.x, r.residual, r.tangent});
    return out;
}

std::vector<Equilibrium> find_equilibria(const Model& model, const EquilibriumOptions& opt) {
    std::vector<Equilibrium> out;
    for (const auto& r : find_roots(model, opt)) {
        Equilibrium e;
        e.v_star = r.v;
        e.residual = r.residual;
        e.near_saddle_node = r.near_saddle_node;
        const auto ea = eigenvalues_and_classify(jacobian_at(r.v, model));
        e.eigenvalues = ea.eigenvalues;
        e.stability = ea.stability;
        out.push_back(e);
    }
    return out;
}

Eigen::Matrix4d jacobian_at(double v_star, const Model& model) {
    const auto& dev = model.device();
    const auto& circ = model.circuit();
    const double l = dev.geom.l;
    const double zt = dev.z_t;
    const double rn = circ.r_n;
    const OverlapJet jet = model.overlap().evaluate(model.x_v(v_star), 1);
    const OverlapTriple& f = jet.d[0];
    const OverlapTriple& fp = jet.d[1];
    const double s2l = std::numbers::sqrt2 * l;

    const double dvdot_dv =
        -(1.0 + 0.5 * rn * ((1.0 + zt) * (f.f00 - s2l * fp.f00 * v_star) + (1.0 - zt) * (f.f11 - s2l * fp.f11 * v_star)));
    const double dvdot_dz = 0.5 * rn * (f.f11 - f.f00) * v_star;
    const double dvdot_dx = -rn * f.f01 * v_star;

    Eigen::Matrix4d j;
    // clang-format off
    j << dvdot_dv,            dvdot_dz,             dvdot_dx,                     0.0,
         0.0,                 -dev.alpha * dev.gamma, 0.0,                        0.0,
         2.0 * zt * dvdot_dv, 2.0 * zt * dvdot_dz,  2.0 * zt * dvdot_dx - dev.gamma, dev.omega,
         0.0,                 0.0,                  -dev.omega,                   -dev.gamma;
    // clang-format on
    return j;
}

EigenAnalysis eigenvalues_and_classify(const Eigen::Matrix4d& m) {
    if (!m.allFinite()) throw DomainError("eigenvalues: matrix has non-finite entries");
    Eigen::EigenSolver<Eigen::Matrix4d> es(m, false);
    if (es.info() != Eigen::Success) throw NumericalError("eigenvalues: QR iteration did not converge");
    EigenAnalysis out;
    for (int i = 0; i < 4; ++i) out.eigenvalues[i] = es.eigenvalues()[i];
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });

    bool marginal = false;
    bool unstable_real = false;
    bool unstable_complex = false;
    for (const auto& ev : out.eigenvalues) {
        if (std::abs(ev.real()) <= kStabilityMargin) marginal = true;
        else if (ev.real() > 0.0) {
            if (std::abs(ev.imag()) > kStabilityMargin) unstable_complex = true;
            else unstable_real = true;
        }
    }
    if (unstable_real) out.stability = Stability::Saddle;
    else if (unstable_complex) out.stability = Stability::UnstableFocus;
    else if (marginal) out.stability = Stability::CenterMarginal;
    else out.stability = Stability::StableNodeFocus;
    return out;
}

bool leading_complex_pair(const Eigenvalues& ev, std::complex<double>& out, double im_tol) {
    bool found = false;
    for (const auto& e : ev) {
        if (e.imag() > im_tol && (!found || e.imag() > out.imag())) {
            out = e;
            found = true;
        }
    }
    return found;
}

}  // namespace qmem
