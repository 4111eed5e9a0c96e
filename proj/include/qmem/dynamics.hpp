#pragma once

#include "qmem/model.hpp"

#include <cstddef>
#include <vector>

namespace qmem {

struct IntegratorStats {
    std::size_t steps = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evaluations = 0;
    double max_purity = 0.0;
    bool purity_warning = false;  ///< purity exceeded 1 + 1e-6 at some accepted step
};

/// Samples on a uniform time grid t_k = k * sample_dt.
struct Trajectory {
    std::vector<double> t;
    std::vector<State> states;
    double sample_dt = 0.0;
    IntegratorStats stats;

    std::size_t size() const { return t.size(); }
    const State& back() const { return states.back(); }
};

struct IntegrateOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double sample_dt = 0.01;
};

inline constexpr double kPurityWarnLevel = 1.0 + 1e-6;

/// Dormand–Prince 5(4) with error control and dense output at sample_dt.
/// Throws StiffnessError on step-size underflow, NumericalError on NaN.
Trajectory integrate(const Model& model, const State& s0, double t_end, const IntegrateOptions& opt = {});

struct SpanResult {
    double v_min = 0.0;
    double v_max = 0.0;
    double span = 0.0;
    bool oscillating = false;
};

inline constexpr double kSpanThreshold = 1e-3;
inline constexpr double kDefaultSettleFraction = 0.6;
inline constexpr double kDefaultTEnd = 600.0;

/// Long-term V range after discarding the first settle_fraction of the record.
/// The retained window must cover 20 periods at reference_omega.
SpanResult steady_span(const Trajectory& traj, double settle_fraction = kDefaultSettleFraction,
                       double reference_omega = 7.0, double span_threshold = kSpanThreshold);

struct SpectralPeak {
    double omega = 0.0;
    double power = 0.0;
};

struct Spectrum {
    std::vector<double> omega;  ///< angular frequency, ascending from 0
    std::vector<double> power;
    SpectralPeak peak;
};

/// Hann-windowed periodogram of V over the trailing (1 - settle_fraction) of the record.
Spectrum power_spectrum(const Trajectory& traj, double settle_fraction = kDefaultSettleFraction);
/// Same, for a raw uniformly sampled signal.
Spectrum power_spectrum(const std::vector<double>& signal, double dt);

/// Median of the power values; a robust noise-floor estimate.
double noise_floor(const Spectrum& s);
/// Largest power within +/-3 bins of multiple * peak.omega, relative to the noise floor, in dB.
double harmonic_level_db(const Spectrum& s, int multiple);

}  // namespace qmem
