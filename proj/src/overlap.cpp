#include "qmem/overlap.hpp"

#include "qmem/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>

namespace qmem {

namespace {

constexpr double kMinLogWeight = -69.0;  // ~1e-30

// Orthonormal Hermite polynomials p_{n}, p_{n-1} at x, rescaled to avoid overflow.
// Returns log of the common scale factor.
double scaled_hermite_pair(int n, double x, double& pn, double& pn1) {
    double log_scale = -0.25 * std::log(std::numbers::pi);
    double p_prev = 0.0;
    double p = 1.0;
    for (int k = 0; k < n; ++k) {
        const double next = x * std::sqrt(2.0 / (k + 1)) * p - std::sqrt(static_cast<double>(k) / (k + 1)) * p_prev;
        p_prev = p;
        p = next;
        const double mag = std::abs(p);
        if (mag > 1e100) {
            p /= mag;
            p_prev /= mag;
            log_scale += std::log(mag);
        }
    }
    pn = p;
    pn1 = p_prev;
    return log_scale;
}

HermiteRule make_rule(int n) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(n > 1 ? n - 1 : 0);
    for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(0.5 * k);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("Gauss-Hermite: tridiagonal eigensolver failed");
    Eigen::VectorXd x = es.eigenvalues();

    HermiteRule rule;
    rule.order = n;
    for (int i = 0; i < n; ++i) {
        double z = 0.5 * (x[i] - x[n - 1 - i]);  // enforce symmetry
        double pn = 0.0;
        double pn1 = 0.0;
        double log_scale = 0.0;
        for (int it = 0; it < 3; ++it) {
            log_scale = scaled_hermite_pair(n, z, pn, pn1);
            z -= pn / (std::sqrt(2.0 * n) * pn1);
        }
        log_scale = scaled_hermite_pair(n, z, pn, pn1);
        const double log_w = -std::log(static_cast<double>(n)) - 2.0 * (std::log(std::abs(pn1)) + log_scale);
        if (log_w < kMinLogWeight) continue;
        rule.nodes.push_back(z);
        rule.weights.push_back(std::exp(log_w));
    }
    return rule;
}

struct Sech {
    double sech;
    double tanh;
};

inline Sech sech_tanh(double s) {
    const double q = std::exp(-std::abs(s));
    const double q2 = q * q;
    const double inv = 1.0 / (1.0 + q2);
    return {2.0 * q * inv, std::copysign((1.0 - q2) * inv, s)};
}

}  // namespace

void validate_geometry(const Geometry& g) {
    if (!(g.l > 0.0) || !std::isfinite(g.l)) throw DomainError("geometry: l must be positive and finite");
    if (!(g.lambda > 0.0) || !std::isfinite(g.lambda))
        throw DomainError("geometry: lambda must be positive and finite");
    if (!std::isfinite(g.x0)) throw DomainError("geometry: x0 must be finite");
}

const HermiteRule& gauss_hermite_rule(int order) {
    if (order < 1) throw DomainError("Gauss-Hermite order must be >= 1");
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<HermiteRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[order];
    if (!slot) slot = std::make_unique<HermiteRule>(make_rule(order));
    return *slot;
}

int quadrature_order_for(const Geometry& g) {
    // Distance of the nearest sech pole from the real u axis. Gauss–Hermite error
    // behaves like exp(-2 d sqrt(2n)); ask for exp(-40).
    const double d = 0.5 * std::numbers::pi * g.lambda / g.l;
    const double n = std::ceil(200.0 / (d * d));
    return static_cast<int>(std::clamp(n, 200.0, 4000.0));
}

OverlapEvaluator::OverlapEvaluator(const Geometry& g) : OverlapEvaluator(g, (validate_geometry(g), quadrature_order_for(g))) {}

OverlapEvaluator::OverlapEvaluator(const Geometry& g, int quadrature_order)
    : geom_(g), rule_(&gauss_hermite_rule(quadrature_order)) {
    validate_geometry(g);
    const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
    const std::size_t m = rule_->nodes.size();
    a00_.resize(m);
    a01_.resize(m);
    a11_.resize(m);
    shift_.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double u = rule_->nodes[k];
        const double w = rule_->weights[k] * inv_sqrt_pi;
        a00_[k] = w;
        a01_[k] = w * std::numbers::sqrt2 * u;  // H0 H1 / sqrt(2)
        a11_[k] = w * 2.0 * u * u;              // H1 H1 / 2
        shift_[k] = g.l * u / g.lambda;
    }
}

OverlapJet OverlapEvaluator::evaluate(double x_v, int max_order) const {
    if (!std::isfinite(x_v)) throw DomainError("overlap: x_V must be finite");
    if (max_order < 0 || max_order > 3) throw DomainError("overlap: derivative order must be in [0, 3]");

    const double inv_lambda = 1.0 / geom_.lambda;
    const double s0 = x_v * inv_lambda;
    std::array<double, 4> s00{}, s01{}, s11{};
    const std::size_t m = shift_.size();
    for (std::size_t k = 0; k < m; ++k) {
        const auto [sech, th] = sech_tanh(shift_[k] + s0);
        std::array<double, 4> kern{sech, 0.0, 0.0, 0.0};
        if (max_order >= 1) kern[1] = -sech * th;
        if (max_order >= 2) kern[2] = sech * (th * th - sech * sech);
        if (max_order >= 3) kern[3] = sech * th * (5.0 - 6.0 * th * th);
        for (int d = 0; d <= max_order; ++d) {
            s00[d] += a00_[k] * kern[d];
            s01[d] += a01_[k] * kern[d];
            s11[d] += a11_[k] * kern[d];
        }
    }
    OverlapJet jet;
    double scale = 1.0;
    for (int d = 0; d <= max_order; ++d) {
        jet.d[d] = {s00[d] * scale, s01[d] * scale, s11[d] * scale};
        scale *= inv_lambda;
    }
    return jet;
}

double overlap_f(int i, int j, double x_v, const Geometry& g, int deriv_order) {
    if (i < 0 || i > 1 || j < 0 || j > 1) throw DomainError("overlap_f: indices must be 0 or 1");
    if (deriv_order < 0 || deriv_order > 2) throw DomainError("overlap_f: deriv_order must be 0, 1 or 2");
    const OverlapTriple t = OverlapEvaluator(g).evaluate(x_v, deriv_order).d[deriv_order];
    if (i == 0 && j == 0) return t.f00;
    if (i == 1 && j == 1) return t.f11;
    return t.f01;
}

// ---------------------------------------------------------------------------

namespace {

OverlapTriple combine(const std::array<double, 6>& b, const OverlapJet& lo, const OverlapJet& hi, double h) {
    const double h2 = h * h;
    auto one = [&](auto field) {
        return b[0] * (lo.d[0].*field) + b[1] * h * (lo.d[1].*field) + b[2] * h2 * (lo.d[2].*field) +
               b[3] * (hi.d[0].*field) + b[4] * h * (hi.d[1].*field) + b[5] * h2 * (hi.d[2].*field);
    };
    return {one(&OverlapTriple::f00), one(&OverlapTriple::f01), one(&OverlapTriple::f11)};
}

// Quintic Hermite basis on [0, 1] and its first two t-derivatives.
// Order: value@0, slope@0, curvature@0, value@1, slope@1, curvature@1.
std::array<double, 6> basis(double t) {
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    return {1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5,
            t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
            0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5,
            10.0 * t3 - 15.0 * t4 + 6.0 * t5,
            -4.0 * t3 + 7.0 * t4 - 3.0 * t5,
            0.5 * t3 - t4 + 0.5 * t5};
}

std::array<double, 6> basis_dt(double t) {
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
    return {-30.0 * t2 + 60.0 * t3 - 30.0 * t4,
            1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4,
            t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4,
            30.0 * t2 - 60.0 * t3 + 30.0 * t4,
            -12.0 * t2 + 28.0 * t3 - 15.0 * t4,
            1.5 * t2 - 4.0 * t3 + 2.5 * t4};
}

std::array<double, 6> basis_dt2(double t) {
    const double t2 = t * t, t3 = t2 * t;
    return {-60.0 * t + 180.0 * t2 - 120.0 * t3,
            -36.0 * t + 96.0 * t2 - 60.0 * t3,
            1.0 - 9.0 * t + 18.0 * t2 - 10.0 * t3,
            60.0 * t - 180.0 * t2 + 120.0 * t3,
            -24.0 * t + 84.0 * t2 - 60.0 * t3,
            3.0 * t - 12.0 * t2 + 10.0 * t3};
}

OverlapTriple scaled(OverlapTriple t, double s) { return {t.f00 * s, t.f01 * s, t.f11 * s}; }

}  // namespace

OverlapTable::OverlapTable(const Geometry& g, double x_min, double x_max, int n) : direct_(g) {
    if (n < 4) throw ConfigError("overlap table: need at least 4 grid points");
    if (!(x_min < x_max) || !std::isfinite(x_min) || !std::isfinite(x_max))
        throw ConfigError("overlap table: require finite x_min < x_max");
    x_min_ = x_min;
    x_max_ = x_max;
    h_ = (x_max - x_min) / (n - 1);
    grid_.resize(n);
    nodes_.resize(n);
    for (int i = 0; i < n; ++i) {
        grid_[i] = (i == n - 1) ? x_max : x_min + i * h_;
        nodes_[i] = direct_.evaluate(grid_[i], 2);
        nodes_[i].d[3] = {};
    }
}

OverlapTable::OverlapTable(const Geometry& g, std::vector<double> grid, std::vector<OverlapJet> nodes)
    : direct_(g), grid_(std::move(grid)), nodes_(std::move(nodes)) {
    const std::size_t n = grid_.size();
    if (n < 4) throw ConfigError("overlap table: need at least 4 grid points");
    x_min_ = grid_.front();
    x_max_ = grid_.back();
    h_ = (x_max_ - x_min_) / static_cast<double>(n - 1);
    for (std::size_t i = 1; i < n; ++i) {
        if (!(grid_[i] > grid_[i - 1])) throw ConfigError("overlap table: grid must be strictly ascending");
        if (std::abs(grid_[i] - grid_[i - 1] - h_) > 1e-9 * std::max(1.0, std::abs(h_)))
            throw ConfigError("overlap table: grid must be uniform");
    }
    for (const auto& jet : nodes_)
        for (int d = 0; d < 3; ++d)
            if (!std::isfinite(jet.d[d].f00) || !std::isfinite(jet.d[d].f01) || !std::isfinite(jet.d[d].f11))
                throw ConfigError("overlap table: non-finite value");
}

OverlapJet OverlapTable::evaluate(double x_v, int max_order) const {
    if (!std::isfinite(x_v)) throw DomainError("overlap: x_V must be finite");
    if (max_order > 2 || x_v < x_min_ || x_v > x_max_) return direct_.evaluate(x_v, max_order);
    if (max_order < 0) throw DomainError("overlap: derivative order must be in [0, 3]");

    const std::size_t last = grid_.size() - 1;
    auto i = static_cast<std::size_t>(std::floor((x_v - x_min_) / h_));
    i = std::min(i, last - 1);
    if (x_v < grid_[i]) --i;
    else if (x_v >= grid_[i + 1] && i + 1 < last) ++i;

    OverlapJet out;
    for (std::size_t node : {i, i + 1}) {
        if (x_v == grid_[node]) {
            for (int d = 0; d <= max_order; ++d) out.d[d] = nodes_[node].d[d];
            return out;
        }
    }
    const double t = (x_v - grid_[i]) / h_;
    const OverlapJet& lo = nodes_[i];
    const OverlapJet& hi = nodes_[i + 1];
    out.d[0] = combine(basis(t), lo, hi, h_);
    if (max_order >= 1) out.d[1] = scaled(combine(basis_dt(t), lo, hi, h_), 1.0 / h_);
    if (max_order >= 2) out.d[2] = scaled(combine(basis_dt2(t), lo, hi, h_), 1.0 / (h_ * h_));
    return out;
}

void OverlapTable::save_csv(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << "x_V,F00,F01,F11,F00',F01',F11',F00'',F01'',F11''\n";
    char buf[64];
    auto put = [&](double v, char sep) {
        auto res = std::to_chars(buf, buf + sizeof buf, v);
        out.write(buf, res.ptr - buf);
        out.put(sep);
    };
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        put(grid_[i], ',');
        for (int d = 0; d < 3; ++d) {
            put(nodes_[i].d[d].f00, ',');
            put(nodes_[i].d[d].f01, ',');
            put(nodes_[i].d[d].f11, d == 2 ? '\n' : ',');
        }
    }
}

OverlapTable OverlapTable::load_csv(const Geometry& g, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::string line;
    std::getline(in, line);  // header
    std::vector<double> grid;
    std::vector<OverlapJet> nodes;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::array<double, 10> v{};
        const char* p = line.data();
        const char* end = p + line.size();
        for (int c = 0; c < 10; ++c) {
            auto res = std::from_chars(p, end, v[c]);
            if (res.ec != std::errc()) throw ParseError("overlap table: bad number", lineno);
            p = res.ptr;
            if (c < 9) {
                if (p == end || *p != ',') throw ParseError("overlap table: expected 10 columns", lineno);
                ++p;
            }
        }
        grid.push_back(v[0]);
        OverlapJet jet;
        for (int d = 0; d < 3; ++d) jet.d[d] = {v[1 + 3 * d], v[2 + 3 * d], v[3 + 3 * d]};
        nodes.push_back(jet);
    }
    return OverlapTable(g, std::move(grid), std::move(nodes));
}

OverlapTable build_overlap_table(const Geometry& g, double x_min, double x_max, int n) {
    return OverlapTable(g, x_min, x_max, n);
}

std::shared_ptr<const OverlapTable> shared_overlap_table(const Geometry& g) {
    static std::mutex mutex;
    static std::vector<std::pair<Geometry, std::shared_ptr<const OverlapTable>>> cache;
    std::lock_guard lock(mutex);
    for (const auto& [geom, table] : cache)
        if (geom == g) return table;
    auto table = std::make_shared<const OverlapTable>(g, -12.0, 12.0, 4801);
    cache.emplace_back(g, table);
    return table;
}

}  // namespace qmem
