#include "qmem/bifurcation.hpp"
#include "qmem/equilibria.hpp"
#include "qmem/errors.hpp"
#include "qmem/sweeps.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace qmem;
using Catch::Matchers::WithinAbs;

TEST_CASE("square-root law on exact data", "[sweeps]") {
    std::vector<SpanPoint> pts;
    for (double p : {1.1, 1.2, 1.3, 1.4, 1.5}) pts.push_back({p, 0.5 * std::sqrt(p - 1.0)});
    const auto fit = fit_sqrt_law(pts, FitSide::Above);
    CHECK_THAT(fit.c, WithinAbs(0.5, 1e-10));
    CHECK_THAT(fit.p0, WithinAbs(1.0, 1e-10));
    CHECK(fit.residual < 1e-12);

    std::vector<SpanPoint> below;
    for (double p : {2.0, 2.2, 2.4, 2.6, 2.8}) below.push_back({p, 0.3 * std::sqrt(3.0 - p)});
    const auto fb = fit_sqrt_law(below, FitSide::Below);
    CHECK_THAT(fb.c, WithinAbs(0.3, 1e-10));
    CHECK_THAT(fb.p0, WithinAbs(3.0, 1e-10));
    CHECK_THROWS_AS(fit_sqrt_law(below, FitSide::Above), FitError);
}

TEST_CASE("degenerate fits are rejected", "[sweeps]") {
    std::vector<SpanPoint> flat;
    for (double p : {1.0, 2.0, 3.0, 4.0, 5.0, 6.0}) flat.push_back({p, 0.2});
    CHECK_THROWS_AS(fit_sqrt_law(flat, FitSide::Above), FitError);

    std::vector<SpanPoint> few{{1.0, 0.1}, {2.0, 0.2}, {3.0, 0.3}, {4.0, 0.4}, {5.0, 0.0}};
    CHECK_THROWS_AS(fit_sqrt_law(few, FitSide::Above), FitError);
}

TEST_CASE("sweep path", "[sweeps]") {
    const auto p = up_down_path(0.0, 1.0, 0.25);
    const std::vector<double> expect{0.0, 0.25, 0.5, 0.75, 1.0, 0.75, 0.5, 0.25, 0.0};
    CHECK(p == expect);
    const auto n = up_down_path(0.0, -0.5, 0.25);
    CHECK(n == std::vector<double>{0.0, -0.25, -0.5, -0.25, 0.0});
    CHECK_THROWS_AS(up_down_path(0.0, 1.0, 0.0), DomainError);
}

TEST_CASE("axis specs", "[sweeps]") {
    const AxisSpec a = parse_axis_spec("Gamma:0.01:1:50");
    CHECK(a.axis == Axis::Gamma);
    CHECK(a.count == 50);
    const auto v = a.values();
    CHECK(v.front() == 0.01);
    CHECK(v.back() == 1.0);
    CHECK(parse_axis_spec("ZT:0:1:1").values() == std::vector<double>{0.0});
    CHECK_THROWS_AS(parse_axis_spec("Beta:0:1:5"), ConfigError);
    CHECK_THROWS_AS(parse_axis_spec("ZT:0:1"), ConfigError);
    CHECK_THROWS_AS(parse_axis_spec("ZT:0:x:5"), ConfigError);
    CHECK_THROWS_AS(parse_axis_spec("ZT:1:0:5"), ConfigError);
}

TEST_CASE("scan marks invalid cells and does not depend on evaluation order", "[sweeps]") {
    const Model base(DeviceParams{}, {5.0, 1.0}, shared_overlap_table(Geometry{}));
    const AxisSpec a1{Axis::Alpha, 1.0, 3.0, 3};
    const AxisSpec a2{Axis::ZT, 0.0, 1.0, 2};
    ScanOptions opt;
    opt.t_end = 200.0;
    opt.threads = 1;
    const GridMap serial = scan2d(base, a1, a2, opt);
    opt.threads = 3;
    const GridMap parallel = scan2d(base, a1, a2, opt);
    REQUIRE(serial.span.size() == 6);
    for (std::size_t j = 0; j < 2; ++j) {
        CHECK(serial.status_at(2, j) == CellStatus::Invalid);
        CHECK(std::isnan(serial.at(2, j)));
    }
    CHECK(serial.status_at(0, 0) == CellStatus::Steady);
    CHECK(serial.status_at(0, 1) == CellStatus::Oscillating);
    for (std::size_t c = 0; c < 6; ++c) {
        CHECK(serial.status[c] == parallel.status[c]);
        if (!std::isnan(serial.span[c])) CHECK(serial.span[c] == parallel.span[c]);
    }
    CHECK_THROWS_AS(scan2d(base, a1, a1, opt), ConfigError);
}

TEST_CASE("mirror-symmetric hysteresis at x0 = 0", "[sweeps]") {
    DeviceParams dev{};
    dev.gamma = 1.0;
    dev.geom.x0 = 0.0;
    const Model m(dev, {10.0, 0.0}, shared_overlap_table(dev.geom));
    SweepOptions opt;
    opt.t_relax = 60.0;
    const auto up = hysteresis_sweep(m, up_down_path(0.0, 4.0, 0.05), opt);
    const auto dn = hysteresis_sweep(m, up_down_path(0.0, -4.0, 0.05), opt);
    const auto a = largest_jump(up, SweepDirection::Up), b = largest_jump(up, SweepDirection::Down);
    // On the negative side the outward leg has decreasing V_n and is tagged "down".
    const auto c = largest_jump(dn, SweepDirection::Up), d = largest_jump(dn, SweepDirection::Down);
    REQUIRE((a && b && c && d));
    const double wp = *a - *b, wn = *c - *d;
    CHECK(wp > 0.2);
    CHECK(std::abs(wp - wn) <= 0.01 * wp + 1e-12);
}

TEST_CASE("offset of the potential minimum makes the two loops unequal, and the sign swaps them",
          "[sweeps]") {
    auto widths = [](double x0) {
        DeviceParams dev{};
        dev.geom.x0 = x0;
        double wp = 0.0, wn = 0.0;
        std::vector<double> pos, neg;
        for (const auto& f : find_saddle_nodes(dev, 10.0)) (f.v_fold > 0 ? pos : neg).push_back(f.v_n_fold);
        REQUIRE(pos.size() == 2);
        REQUIRE(neg.size() == 2);
        wp = std::abs(pos[0] - pos[1]);
        wn = std::abs(neg[0] - neg[1]);
        return std::pair{wp, wn};
    };
    const auto [p1, n1] = widths(0.1);
    const auto [p2, n2] = widths(-0.1);
    CHECK(std::abs(p1 - n1) > 0.01 * p1);
    CHECK_THAT(p1, WithinAbs(n2, 1e-6 * p1));
    CHECK_THAT(n1, WithinAbs(p2, 1e-6 * n1));
}

TEST_CASE("steady state and self-oscillation coexist inside the fold window", "[sweeps]") {
    const Model m(DeviceParams{}, {5.0, 3.2}, shared_overlap_table(Geometry{}));
    const auto eq = find_equilibria(m);
    REQUIRE(eq.size() == 3);
    const SpanResult from_rest = steady_span(integrate(m, kDefaultInitialState, 800.0));
    const SpanResult from_upper = steady_span(integrate(m, {0.0, 0.0, 1.0, eq[2].v_star + 0.01}, 800.0));
    CHECK(from_rest.oscillating);
    CHECK_FALSE(from_upper.oscillating);
}
