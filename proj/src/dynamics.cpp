#include "qmem/dynamics.hpp"

#include "qmem/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace qmem {

namespace {

using Vec = std::array<double, 4>;

// Dormand–Prince 5(4) tableau, with Hairer's dense-output coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

bool all_finite(const Vec& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double purity(const Vec& y) { return y[0] * y[0] + y[1] * y[1] + y[2] * y[2]; }

class DormandPrince {
public:
    DormandPrince(const Model& m, const IntegrateOptions& opt) : model_(m), opt_(opt) {}

    Trajectory run(const State& s0, double t_end) {
        Trajectory traj;
        traj.sample_dt = opt_.sample_dt;
        const auto n_samples = static_cast<std::size_t>(std::floor(t_end / opt_.sample_dt + 1e-9)) + 1;
        traj.t.reserve(n_samples);
        traj.states.reserve(n_samples);

        Vec y = s0.to_array();
        if (!all_finite(y)) throw DomainError("integrate: initial state must be finite");
        double t = 0.0;
        eval(y, k1_);
        traj.stats.max_purity = purity(y);
        traj.t.push_back(0.0);
        traj.states.push_back(s0);
        std::size_t next = 1;

        double h = initial_step(y, t_end);
        int nan_retries = 0;
        while (t < t_end) {
            if (t + 1.01 * h >= t_end) h = t_end - t;
            const double h_min = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
            if (h < h_min) {
                std::ostringstream msg;
                msg << "integrate: step size underflow at t = " << t;
                throw StiffnessError(msg.str(), t);
            }
            const double err = attempt(y, h);
            if (!std::isfinite(err) || !all_finite(y_new_)) {
                if (++nan_retries > 30) {
                    std::ostringstream msg;
                    msg << "integrate: non-finite state at t = " << t;
                    throw NumericalError(msg.str());
                }
                ++traj.stats.rejected;
                h *= 0.1;
                continue;
            }
            nan_retries = 0;
            if (err > 1.0) {
                ++traj.stats.rejected;
                h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
                continue;
            }

            // Accepted: emit samples inside (t, t + h].
            const double t_new = (h == t_end - t) ? t_end : t + h;
            prepare_dense(y, h);
            while (next < n_samples) {
                const double ts = static_cast<double>(next) * opt_.sample_dt;
                if (ts > t_new + 1e-12 * std::max(1.0, t_new)) break;
                const double theta = std::min(1.0, (ts - t) / h);
                traj.t.push_back(ts);
                traj.states.push_back(State::from_array(dense(theta)));
                ++next;
            }
            ++traj.stats.steps;
            y = y_new_;
            k1_ = k7_;
            t = t_new;
            const double p = purity(y);
            traj.stats.max_purity = std::max(traj.stats.max_purity, p);
            if (p > kPurityWarnLevel) traj.stats.purity_warning = true;

            const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            h *= fac;
        }
        traj.stats.rhs_evaluations = evaluations_;
        return traj;
    }

private:
    void eval(const Vec& y, Vec& dy) {
        model_.rhs(y, dy);
        ++evaluations_;
    }

    double norm(const Vec& v, const Vec& ref) const {
        double acc = 0.0;
        for (int i = 0; i < 4; ++i) {
            const double sc = opt_.abs_tol + opt_.rel_tol * std::abs(ref[i]);
            acc += (v[i] / sc) * (v[i] / sc);
        }
        return std::sqrt(acc / 4.0);
    }

    double initial_step(const Vec& y0, double t_end) {
        const double d0 = norm(y0, y0);
        const double d1n = norm(k1_, y0);
        double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
        h0 = std::min(h0, t_end);
        Vec y1{}, f1{};
        for (int i = 0; i < 4; ++i) y1[i] = y0[i] + h0 * k1_[i];
        eval(y1, f1);
        Vec df{};
        for (int i = 0; i < 4; ++i) df[i] = f1[i] - k1_[i];
        const double d2 = norm(df, y0) / h0;
        const double h1 = std::max(d1n, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                     : std::pow(0.01 / std::max(d1n, d2), 0.2);
        return std::min({100.0 * h0, h1, t_end});
    }

    double attempt(const Vec& y, double h) {
        Vec tmp{};
        for (int i = 0; i < 4; ++i) tmp[i] = y[i] + h * a21 * k1_[i];
        eval(tmp, k2_);
        for (int i = 0; i < 4; ++i) tmp[i] = y[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
        eval(tmp, k3_);
        for (int i = 0; i < 4; ++i) tmp[i] = y[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
        eval(tmp, k4_);
        for (int i = 0; i < 4; ++i)
            tmp[i] = y[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
        eval(tmp, k5_);
        for (int i = 0; i < 4; ++i)
            tmp[i] = y[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i]);
        eval(tmp, k6_);
        for (int i = 0; i < 4; ++i)
            y_new_[i] = y[i] + h * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] + a76 * k6_[i]);
        if (!all_finite(y_new_)) return std::numeric_limits<double>::quiet_NaN();
        eval(y_new_, k7_);
        Vec e{};
        Vec ref{};
        for (int i = 0; i < 4; ++i) {
            e[i] = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] + e7 * k7_[i]);
            ref[i] = std::max(std::abs(y[i]), std::abs(y_new_[i]));
        }
        return norm(e, ref);
    }

    void prepare_dense(const Vec& y, double h) {
        for (int i = 0; i < 4; ++i) {
            const double ydiff = y_new_[i] - y[i];
            const double bspl = h * k1_[i] - ydiff;
            r1_[i] = y[i];
            r2_[i] = ydiff;
            r3_[i] = bspl;
            r4_[i] = ydiff - h * k7_[i] - bspl;
            r5_[i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] + d6 * k6_[i] + d7 * k7_[i]);
        }
    }

    Vec dense(double theta) const {
        const double theta1 = 1.0 - theta;
        Vec out{};
        for (int i = 0; i < 4; ++i)
            out[i] = r1_[i] + theta * (r2_[i] + theta1 * (r3_[i] + theta * (r4_[i] + theta1 * r5_[i])));
        return out;
    }

    const Model& model_;
    IntegrateOptions opt_;
    std::size_t evaluations_ = 0;
    Vec k1_{}, k2_{}, k3_{}, k4_{}, k5_{}, k6_{}, k7_{}, y_new_{};
    Vec r1_{}, r2_{}, r3_{}, r4_{}, r5_{};
};

}  // namespace

Trajectory integrate(const Model& model, const State& s0, double t_end, const IntegrateOptions& opt) {
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw DomainError("integrate: t_end must be positive");
    if (!(opt.rel_tol > 0.0 && opt.rel_tol <= 1e-2) || !(opt.abs_tol > 0.0 && opt.abs_tol <= 1e-2))
        throw DomainError("integrate: tolerances must lie in (0, 1e-2]");
    if (!(opt.sample_dt > 0.0) || opt.sample_dt > t_end) throw DomainError("integrate: sample_dt must lie in (0, t_end]");
    return DormandPrince(model, opt).run(s0, t_end);
}

SpanResult steady_span(const Trajectory& traj, double settle_fraction, double reference_omega,
                       double span_threshold) {
    if (!(settle_fraction > 0.0 && settle_fraction < 1.0))
        throw DomainError("steady_span: settle_fraction must lie in (0, 1)");
    if (traj.size() < 2) throw InsufficientDataError("steady_span: trajectory is empty");
    const double t0 = traj.t.front();
    const double t1 = traj.t.back();
    const double t_cut = t0 + settle_fraction * (t1 - t0);
    const double min_window = 20.0 * 2.0 * 3.14159265358979323846 / reference_omega;
    if (t1 - t_cut < min_window * (1.0 - 1e-9))
        throw InsufficientDataError("steady_span: retained window shorter than 20 oscillation periods");

    auto first = std::lower_bound(traj.t.begin(), traj.t.end(), t_cut);
    const auto start = static_cast<std::size_t>(first - traj.t.begin());
    SpanResult r;
    r.v_min = traj.states[start].v;
    r.v_max = r.v_min;
    for (std::size_t i = start; i < traj.size(); ++i) {
        r.v_min = std::min(r.v_min, traj.states[i].v);
        r.v_max = std::max(r.v_max, traj.states[i].v);
    }
    r.span = r.v_max - r.v_min;
    r.oscillating = r.span > span_threshold;
    return r;
}

}  // namespace qmem
