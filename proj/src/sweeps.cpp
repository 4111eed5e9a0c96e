#include "qmem/sweeps.hpp"

#include "qmem/errors.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace qmem {

unsigned default_thread_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("QMEM_THREADS")) {
        unsigned cap = 0;
        const std::string_view s(env);
        auto res = std::from_chars(s.data(), s.data() + s.size(), cap);
        if (res.ec == std::errc() && cap > 0) n = std::min(n, cap);
    }
    return n;
}

namespace {

// Runs body(i) for i in [0, n) on up to `threads` workers. Each index runs exactly once;
// the first exception is rethrown after all workers finish.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, const Body& body) {
    if (threads == 0) threads = default_thread_count();
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::string_view to_string(SweepDirection d) { return d == SweepDirection::Up ? "up" : "down"; }

std::vector<double> up_down_path(double from, double to, double step) {
    if (!(step > 0.0)) throw DomainError("up_down_path: step must be positive");
    const double dir = to >= from ? 1.0 : -1.0;
    const auto n = static_cast<long>(std::floor(std::abs(to - from) / step + 1e-9));
    // snapped to 12 significant digits
    auto at = [&](long k) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12g", from + dir * static_cast<double>(k) * step);
        return std::strtod(buf, nullptr);
    };
    std::vector<double> path;
    for (long k = 0; k <= n; ++k) path.push_back(at(k));
    for (long k = n - 1; k >= 0; --k) path.push_back(at(k));
    return path;
}

SweepResult hysteresis_sweep(const Model& model, const std::vector<double>& v_n_path, const SweepOptions& opt) {
    if (v_n_path.empty()) throw DomainError("hysteresis_sweep: empty path");
    SweepResult out;
    State state = opt.initial;
    const double r_n = model.circuit().r_n;
    SweepDirection dir = SweepDirection::Up;
    for (std::size_t k = 0; k < v_n_path.size(); ++k) {
        const double vn = v_n_path[k];
        if (k > 0 && vn != v_n_path[k - 1]) dir = vn > v_n_path[k - 1] ? SweepDirection::Up : SweepDirection::Down;
        SweepEntry e;
        e.direction = dir;
        e.v_n = vn;
        try {
            const Model m = model.with_circuit({r_n, vn});
            const Trajectory traj = integrate(m, state, opt.t_relax, opt.integrate);
            state = traj.back();
            const SpanResult s = steady_span(traj, opt.settle_fraction, m.device().omega);
            e.v_low = s.v_min;
            e.v_high = s.v_max;
            e.oscillating = s.oscillating;
            if (s.oscillating) {
                // A bounded oscillation repeats its band; a slow drift does not.
                const std::size_t n = traj.size();
                const auto start = static_cast<std::size_t>(opt.settle_fraction * static_cast<double>(n - 1));
                const std::size_t mid = start + (n - start) / 2;
                double lo1 = traj.states[start].v, hi1 = lo1, lo2 = traj.states[mid].v, hi2 = lo2;
                for (std::size_t i = start; i < mid; ++i) {
                    lo1 = std::min(lo1, traj.states[i].v);
                    hi1 = std::max(hi1, traj.states[i].v);
                }
                for (std::size_t i = mid; i < n; ++i) {
                    lo2 = std::min(lo2, traj.states[i].v);
                    hi2 = std::max(hi2, traj.states[i].v);
                }
                const double band = std::max(hi2 - lo2, 1e-300);
                if (std::abs((hi1 - lo1) - band) > 0.1 * band || std::abs((hi1 + lo1) - (hi2 + lo2)) > 0.2 * band)
                    e.flagged = true;
            }
        } catch (const std::exception&) {
            e.flagged = true;
            e.v_low = e.v_high = kNaN;
        }
        out.entries.push_back(e);
    }
    return out;
}

std::optional<double> largest_jump(const SweepResult& r, SweepDirection d) {
    std::optional<double> at;
    double best = -1.0;
    const SweepEntry* prev = nullptr;
    for (const auto& e : r.entries) {
        if (e.direction != d) {
            prev = nullptr;
            continue;
        }
        if (prev) {
            const double mid_now = 0.5 * (e.v_low + e.v_high);
            const double mid_prev = 0.5 * (prev->v_low + prev->v_high);
            const double jump = std::abs(mid_now - mid_prev);
            if (jump > best) {
                best = jump;
                at = e.v_n;
            }
        }
        prev = &e;
    }
    return at;
}

SqrtLawFit fit_sqrt_law(const std::vector<SpanPoint>& points, FitSide side) {
    std::vector<SpanPoint> use;
    for (const auto& p : points)
        if (p.span > kSpanThreshold && std::isfinite(p.p)) use.push_back(p);
    if (use.size() < 5) throw FitError("fit_sqrt_law: need at least 5 points above the span threshold");

    // span^2 = a + b p by ordinary least squares.
    const double n = static_cast<double>(use.size());
    double sp = 0.0, sy = 0.0;
    double pmin = use.front().p, pmax = use.front().p;
    for (const auto& q : use) {
        sp += q.p;
        sy += q.span * q.span;
        pmin = std::min(pmin, q.p);
        pmax = std::max(pmax, q.p);
    }
    const double pbar = sp / n, ybar = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& q : use) {
        sxx += (q.p - pbar) * (q.p - pbar);
        sxy += (q.p - pbar) * (q.span * q.span - ybar);
    }
    if (sxx == 0.0) throw FitError("fit_sqrt_law: all points share one parameter value");
    const double b = sxy / sxx;
    const double a = ybar - b * pbar;
    double ss = 0.0;
    for (const auto& q : use) {
        const double r = q.span * q.span - (a + b * q.p);
        ss += r * r;
    }
    SqrtLawFit fit;
    fit.side = side;
    fit.residual = std::sqrt(ss / n);

    const bool slope_ok = side == FitSide::Above ? b > 0.0 : b < 0.0;
    if (!slope_ok || std::abs(b) * (pmax - pmin) <= 2.0 * fit.residual)
        throw FitError("fit_sqrt_law: degenerate fit (slope absent or dominated by residual)");
    fit.c = std::sqrt(std::abs(b));
    fit.p0 = -a / b;
    return fit;
}

AmplitudeCurve amplitude_sweep(const Model& model, SweepParam param, const std::vector<double>& grid,
                               const AmplitudeOptions& opt) {
    if (grid.empty()) throw DomainError("amplitude_sweep: empty grid");
    AmplitudeCurve curve;
    curve.param = param;
    curve.points.assign(grid.size(), {});
    parallel_for(grid.size(), opt.threads, [&](std::size_t i) {
        DeviceParams dev = model.device();
        CircuitParams circ = model.circuit();
        if (param == SweepParam::Vn) circ.v_n = grid[i];
        else dev.z_t = grid[i];
        const Model m(dev, circ, model.overlap_ptr());
        const Trajectory traj = integrate(m, opt.initial, opt.t_end, opt.integrate);
        curve.points[i] = {grid[i], steady_span(traj, opt.settle_fraction, dev.omega).span};
    });

    std::vector<SpanPoint> active;
    double max_span = 0.0;
    for (const auto& p : curve.points) {
        max_span = std::max(max_span, p.span);
        if (p.span > kSpanThreshold) active.push_back(p);
    }
    if (active.empty()) {
        curve.fit_error = "no oscillating points";
        return curve;
    }
    FitSide side = FitSide::Above;
    if (opt.side) side = *opt.side;
    else {
        auto lo = std::min_element(active.begin(), active.end(), [](auto& a, auto& b) { return a.p < b.p; });
        auto hi = std::max_element(active.begin(), active.end(), [](auto& a, auto& b) { return a.p < b.p; });
        side = hi->span >= lo->span ? FitSide::Above : FitSide::Below;
    }
    std::vector<SpanPoint> window;
    for (const auto& p : active)
        if (p.span < opt.fit_window * max_span) window.push_back(p);
    if (window.size() < 5) window = active;
    try {
        curve.fit = fit_sqrt_law(window, side);
    } catch (const FitError& e) {
        curve.fit_error = e.what();
    }
    return curve;
}

std::string_view to_string(Axis a) {
    switch (a) {
    case Axis::Vn: return "Vn";
    case Axis::Rn: return "Rn";
    case Axis::Gamma: return "Gamma";
    case Axis::ZT: return "ZT";
    case Axis::Alpha: return "alpha";
    }
    return "?";
}

Axis parse_axis(std::string_view name) {
    if (name == "Vn" || name == "V_n") return Axis::Vn;
    if (name == "Rn" || name == "R_n") return Axis::Rn;
    if (name == "Gamma") return Axis::Gamma;
    if (name == "ZT" || name == "Z_T") return Axis::ZT;
    if (name == "alpha") return Axis::Alpha;
    throw ConfigError("unknown axis '" + std::string(name) + "' (expected Vn, Rn, Gamma, ZT or alpha)");
}

std::vector<double> AxisSpec::values() const {
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) v[i] = count == 1 ? min : min + (max - min) * i / (count - 1);
    if (count > 1) v.back() = max;
    return v;
}

AxisSpec parse_axis_spec(std::string_view text) {
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (true) {
        const auto colon = text.find(':', pos);
        parts.push_back(text.substr(pos, colon == std::string_view::npos ? std::string_view::npos : colon - pos));
        if (colon == std::string_view::npos) break;
        pos = colon + 1;
    }
    if (parts.size() != 4) throw ConfigError("axis spec must be name:min:max:count, got '" + std::string(text) + "'");
    AxisSpec a;
    a.axis = parse_axis(parts[0]);
    auto num = [&](std::string_view s, double& out) {
        auto res = std::from_chars(s.data(), s.data() + s.size(), out);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size())
            throw ConfigError("axis spec: malformed number '" + std::string(s) + "'");
    };
    num(parts[1], a.min);
    num(parts[2], a.max);
    auto res = std::from_chars(parts[3].data(), parts[3].data() + parts[3].size(), a.count);
    if (res.ec != std::errc() || res.ptr != parts[3].data() + parts[3].size() || a.count < 1)
        throw ConfigError("axis spec: count must be a positive integer");
    if (a.count > 1 && !(a.min < a.max)) throw ConfigError("axis spec: need min < max");
    return a;
}

GridMap scan2d(const Model& base, const AxisSpec& axis1, const AxisSpec& axis2, const ScanOptions& opt) {
    if (axis1.axis == axis2.axis) throw ConfigError("scan2d: axes must differ");
    GridMap map;
    map.axis1 = axis1.axis;
    map.axis2 = axis2.axis;
    map.grid1 = axis1.values();
    map.grid2 = axis2.values();
    const std::size_t n2 = map.grid2.size();
    const std::size_t cells = map.grid1.size() * n2;
    map.span.assign(cells, kNaN);
    map.status.assign(cells, CellStatus::Failed);

    auto set = [](Axis a, double v, DeviceParams& dev, CircuitParams& circ) {
        switch (a) {
        case Axis::Vn: circ.v_n = v; break;
        case Axis::Rn: circ.r_n = v; break;
        case Axis::Gamma: dev.gamma = v; break;
        case Axis::ZT: dev.z_t = v; break;
        case Axis::Alpha: dev.alpha = v; break;
        }
    };
    parallel_for(cells, opt.threads, [&](std::size_t c) {
        DeviceParams dev = base.device();
        CircuitParams circ = base.circuit();
        set(map.axis1, map.grid1[c / n2], dev, circ);
        set(map.axis2, map.grid2[c % n2], dev, circ);
        if (has_violation(validate(dev, circ))) {
            map.status[c] = CellStatus::Invalid;
            return;
        }
        try {
            const Model m(dev, circ, base.overlap_ptr());
            const Trajectory traj = integrate(m, opt.initial, opt.t_end, opt.integrate);
            const SpanResult s = steady_span(traj, opt.settle_fraction, dev.omega);
            map.span[c] = s.span;
            map.status[c] = s.oscillating ? CellStatus::Oscillating : CellStatus::Steady;
        } catch (const std::exception&) {
            map.status[c] = CellStatus::Failed;
        }
    });
    return map;
}

}  // namespace qmem
