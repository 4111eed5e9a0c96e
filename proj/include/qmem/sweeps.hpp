#pragma once

#include "qmem/dynamics.hpp"
#include "qmem/model.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qmem {

enum class SweepDirection { Up, Down };
std::string_view to_string(SweepDirection d);

struct SweepEntry {
    SweepDirection direction = SweepDirection::Up;
    double v_n = 0.0;
    double v_low = 0.0;   ///< settled V, or lower edge of the oscillation band
    double v_high = 0.0;
    bool oscillating = false;
    bool flagged = false;  ///< step neither settled nor reached a bounded oscillation
};

struct SweepResult {
    std::vector<SweepEntry> entries;
};

struct SweepOptions {
    double t_relax = 200.0;
    double settle_fraction = 0.5;
    IntegrateOptions integrate{};
    State initial = kDefaultInitialState;
};

/// V_n path from `from` to `to` and back in steps of `step`.
std::vector<double> up_down_path(double from, double to, double step);

/// Continuation sweep: each step starts from the final state of the previous one.
SweepResult hysteresis_sweep(const Model& model, const std::vector<double>& v_n_path, const SweepOptions& opt = {});

/// V_n of the entry that ends the largest step-to-step change of the settled V within one
/// direction. Empty if that direction has fewer than two entries.
std::optional<double> largest_jump(const SweepResult& r, SweepDirection d);

enum class FitSide { Above, Below };

struct SqrtLawFit {
    double c = 0.0;
    double p0 = 0.0;
    double residual = 0.0;  ///< RMS misfit of span^2
    FitSide side = FitSide::Above;
};

struct SpanPoint {
    double p = 0.0;
    double span = 0.0;
};

/// Least-squares fit of span^2 = c^2 (p - p0) (Above) or c^2 (p0 - p) (Below).
/// Uses points with span > kSpanThreshold; needs at least 5 of them.
SqrtLawFit fit_sqrt_law(const std::vector<SpanPoint>& points, FitSide side);

enum class SweepParam { Vn, ZT };

struct AmplitudeCurve {
    SweepParam param = SweepParam::Vn;
    std::vector<SpanPoint> points;
    std::optional<SqrtLawFit> fit;
    std::string fit_error;  ///< set when fit is empty
};

struct AmplitudeOptions {
    double t_end = kDefaultTEnd;
    double settle_fraction = kDefaultSettleFraction;
    IntegrateOptions integrate{};
    State initial = kDefaultInitialState;
    double fit_window = 0.4;  ///< fit only spans below this fraction of the maximum
    std::optional<FitSide> side;  ///< deduced from the curve's slope when empty
    unsigned threads = 0;         ///< 0: default_thread_count()
};

AmplitudeCurve amplitude_sweep(const Model& model, SweepParam param, const std::vector<double>& grid,
                               const AmplitudeOptions& opt = {});

enum class Axis { Vn, Rn, Gamma, ZT, Alpha };
std::string_view to_string(Axis a);
Axis parse_axis(std::string_view name);

struct AxisSpec {
    Axis axis = Axis::Gamma;
    double min = 0.0;
    double max = 1.0;
    int count = 2;

    std::vector<double> values() const;
};
/// "name:min:max:count"
AxisSpec parse_axis_spec(std::string_view text);

enum class CellStatus { Steady = 0, Oscillating = 1, Invalid = 2, Failed = 3 };

struct GridMap {
    Axis axis1 = Axis::Gamma;
    Axis axis2 = Axis::ZT;
    std::vector<double> grid1;
    std::vector<double> grid2;
    std::vector<double> span;        ///< row-major [i1 * grid2.size() + i2]; NaN for invalid/failed
    std::vector<CellStatus> status;

    double at(std::size_t i1, std::size_t i2) const { return span[i1 * grid2.size() + i2]; }
    CellStatus status_at(std::size_t i1, std::size_t i2) const { return status[i1 * grid2.size() + i2]; }
};

struct ScanOptions {
    double t_end = kDefaultTEnd;
    double settle_fraction = kDefaultSettleFraction;
    IntegrateOptions integrate{};
    State initial = kDefaultInitialState;
    unsigned threads = 0;  ///< 0: default_thread_count()
};

/// Parameters of one cell; the template model supplies everything not on an axis.
GridMap scan2d(const Model& base, const AxisSpec& axis1, const AxisSpec& axis2, const ScanOptions& opt = {});

/// hardware_concurrency, capped by QMEM_THREADS when set.
unsigned default_thread_count();

}  // namespace qmem
