#include "qmem/dynamics.hpp"
#include "qmem/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

namespace qmem {

namespace {

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

Spectrum power_spectrum(const std::vector<double>& signal, double dt) {
    const std::size_t n = signal.size();
    if (n < 64) throw InsufficientDataError("power_spectrum: need at least 64 samples");
    if (!(dt > 0.0)) throw DomainError("power_spectrum: dt must be positive");

    double mean = 0.0;
    for (double v : signal) mean += v;
    mean /= static_cast<double>(n);

    std::vector<double> in(n);
    double wsum2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double w = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n - 1)));
        in[k] = w * (signal[k] - mean);
        wsum2 += w * w;
    }
    const std::size_t m = n / 2 + 1;
    fftw_complex* out = fftw_alloc_complex(m);
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), out, FFTW_ESTIMATE);
    }
    fftw_execute(plan);

    Spectrum s;
    s.omega.resize(m);
    s.power.resize(m);
    const double d_omega = 2.0 * std::numbers::pi / (static_cast<double>(n) * dt);
    const double norm = dt / (2.0 * std::numbers::pi * wsum2);
    for (std::size_t k = 0; k < m; ++k) {
        s.omega[k] = d_omega * static_cast<double>(k);
        double p = norm * (out[k][0] * out[k][0] + out[k][1] * out[k][1]);
        if (k != 0 && !(n % 2 == 0 && k == m - 1)) p *= 2.0;  // one-sided
        s.power[k] = p;
    }
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(out);

    // Dominant peak, skipping DC, refined by a parabola through log power.
    std::size_t k = 1;
    for (std::size_t j = 2; j < m; ++j)
        if (s.power[j] > s.power[k]) k = j;
    s.peak = {s.omega[k], s.power[k]};
    if (k > 1 && k + 1 < m && s.power[k - 1] > 0.0 && s.power[k + 1] > 0.0 && s.power[k] > 0.0) {
        const double a = std::log(s.power[k - 1]);
        const double b = std::log(s.power[k]);
        const double c = std::log(s.power[k + 1]);
        const double denom = a - 2.0 * b + c;
        if (denom < 0.0) {
            const double delta = 0.5 * (a - c) / denom;
            s.peak.omega = (static_cast<double>(k) + delta) * d_omega;
            s.peak.power = std::exp(b - 0.25 * (a - c) * delta);
        }
    }
    return s;
}

Spectrum power_spectrum(const Trajectory& traj, double settle_fraction) {
    if (!(settle_fraction >= 0.0 && settle_fraction < 1.0))
        throw DomainError("power_spectrum: settle_fraction must lie in [0, 1)");
    if (traj.size() < 2 || !(traj.sample_dt > 0.0)) throw InsufficientDataError("power_spectrum: trajectory is empty");
    const auto start = static_cast<std::size_t>(std::floor(settle_fraction * static_cast<double>(traj.size() - 1)));
    std::vector<double> v;
    v.reserve(traj.size() - start);
    for (std::size_t i = start; i < traj.size(); ++i) v.push_back(traj.states[i].v);
    return power_spectrum(v, traj.sample_dt);
}

double noise_floor(const Spectrum& s) {
    std::vector<double> p(s.power.begin() + 1, s.power.end());
    if (p.empty()) return 0.0;
    auto mid = p.begin() + static_cast<std::ptrdiff_t>(p.size() / 2);
    std::nth_element(p.begin(), mid, p.end());
    return *mid;
}

double harmonic_level_db(const Spectrum& s, int multiple) {
    if (s.omega.size() < 2) return -INFINITY;
    const double d_omega = s.omega[1] - s.omega[0];
    const double target = multiple * s.peak.omega;
    const auto centre = static_cast<std::ptrdiff_t>(std::llround(target / d_omega));
    double best = 0.0;
    for (std::ptrdiff_t k = centre - 3; k <= centre + 3; ++k)
        if (k >= 1 && k < static_cast<std::ptrdiff_t>(s.power.size())) best = std::max(best, s.power[static_cast<std::size_t>(k)]);
    const double floor = noise_floor(s);
    if (best <= 0.0) return -INFINITY;
    if (floor <= 0.0) return INFINITY;
    return 10.0 * std::log10(best / floor);
}

}  // namespace qmem
