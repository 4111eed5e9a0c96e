#include "qmem/equilibria.hpp"
#include "qmem/errors.hpp"
#include "qmem/model.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace qmem;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("rhs against hand evaluation with trapezoid F values", "[model]") {
    // Frozen from a direct evaluation of the right-hand side with 10^6-node trapezoid F_ij.
    const DeviceParams dev{7.0, 0.1, 1.0, 1.0, {}};
    const CircuitParams circ{5.0, 0.23};
    const State d = rhs({0.01, 0.0, 1.0, 0.05}, dev, circ);
    CHECK_THAT(d.x, WithinAbs(0.32593316368936487, 1e-10));
    CHECK_THAT(d.y, WithinAbs(-0.07, 1e-14));
    CHECK_THAT(d.z, WithinAbs(-0.003269331636893649, 1e-10));
    CHECK_THAT(d.v, WithinAbs(0.16346658184468243, 1e-10));
}

TEST_CASE("decoupled circuit", "[model]") {
    const DeviceParams dev{};
    const State d = rhs({0.0, 0.0, dev.z_t, 0.0}, dev, {0.0, 0.7});
    CHECK(d.v == 0.7);
    CHECK(d.z == 0.0);
    CHECK(d.x == 2.0 * 0.7 * dev.z_t);  // the bias still rotates the Bloch vector
    CHECK(d.y == 0.0);

    DeviceParams hot{};
    hot.z_t = 0.0;
    const State e = rhs({0.0, 0.0, 0.0, 0.0}, hot, {0.0, 0.7});
    CHECK(e.v == 0.7);
    CHECK(e.x == 0.0);
    CHECK(e.z == 0.0);
}

TEST_CASE("equilibrium is a fixed point of the rhs", "[model]") {
    DeviceParams dev{};
    dev.z_t = 0.6;
    for (double vn : {0.23, 1.5, 3.0}) {
        const Model m(dev, {8.0, vn});
        for (const auto& e : find_equilibria(m)) {
            const State d = m.rhs({0.0, 0.0, dev.z_t, e.v_star});
            CHECK(std::abs(d.x) < 1e-10);
            CHECK(std::abs(d.y) < 1e-10);
            CHECK(std::abs(d.z) < 1e-10);
            CHECK(std::abs(d.v) < 1e-10);
        }
    }
}

TEST_CASE("conductance and current", "[model]") {
    const DeviceParams dev{};
    const OverlapEvaluator ev(dev.geom);
    const auto at0 = conductance_and_current({0.0, 0.0, 1.0, 0.0}, dev);
    CHECK_THAT(at0.g, WithinRel(ev.value(dev.geom.x0).f00, 1e-14));
    CHECK(at0.i == 0.0);

    // Z = 1, X = 0: F_11 carries zero weight.
    const State s{0.0, 0.3, 1.0, 0.7};
    const auto gi = conductance_and_current(s, dev);
    const double xv = dev.geom.x0 - dev.geom.l * std::sqrt(2.0) * 0.7;
    CHECK_THAT(gi.g, WithinRel(ev.value(xv).f00, 1e-14));
    CHECK_THAT(gi.i, WithinRel(gi.g * 0.7, 1e-14));
}

TEST_CASE("conductance stays in (0, 1] inside the Bloch ball", "[model]") {
    const DeviceParams dev{};
    for (double th = 0.0; th < 6.3; th += 0.7)
        for (double v = -3.0; v <= 6.0; v += 0.5) {
            const State s{std::sin(th), 0.0, std::cos(th), v};
            const auto gi = conductance_and_current(s, dev);
            CHECK(gi.g > 0.0);
            CHECK(gi.g <= 1.0);
        }
}

TEST_CASE("thermal_z", "[model]") {
    CHECK(thermal_z(0.0) == 0.0);
    CHECK_THAT(thermal_z(50.0), WithinAbs(1.0, 1e-15));
    CHECK(thermal_z(1.0) == std::tanh(1.0));
    CHECK_THROWS_AS(thermal_z(-0.1), DomainError);
}

namespace {

PhysicalParams sample_physical() {
    PhysicalParams p;
    p.mass = 9.109e-31;
    p.charge = 1.602e-19;
    p.omega_p = 1e12;
    p.half_gap = 2e-8;
    p.x0 = 1.6e-8;
    p.lambda = 2.6e-9;
    p.gamma = 1e9;
    p.gamma_t = 1e9;
    p.temperature = 0.0;
    p.c_ext = 1e-15;
    p.r_ext = 1e3;
    p.r_0 = 1e3;
    p.v_ext = 1e-3;
    p.v_m = 5e-4;
    return p;
}

}  // namespace

TEST_CASE("to_dimensionless", "[model]") {
    PhysicalParams p = sample_physical();
    const auto d = to_dimensionless(p);
    CHECK(d.device.alpha == 1.0);
    CHECK(d.circuit.r_n == 1.0);
    CHECK(d.device.z_t == 1.0);
    CHECK_THAT(d.device.omega, WithinRel(1e12 * 1e-12, 1e-12));
    CHECK_THAT(d.device.gamma, WithinRel(1e9 * 1e-12, 1e-12));
    CHECK_THAT(d.device.geom.x0, WithinRel(0.8, 1e-12));

    p.v_ext *= 2.0;
    CHECK_THAT(to_dimensionless(p).circuit.v_n, WithinRel(2.0 * d.circuit.v_n, 1e-14));

    p.gamma = 0.0;
    CHECK_THROWS_AS(to_dimensionless(p), DomainError);
    p = sample_physical();
    p.c_ext = 0.0;
    CHECK_THROWS_AS(to_dimensionless(p), DomainError);
}

TEST_CASE("validation", "[model]") {
    DeviceParams dev{};
    const CircuitParams circ{};
    CHECK(validate(dev, circ).empty());

    dev.alpha = 2.5;
    auto issues = validate(dev, circ);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].severity == Severity::Violation);
    CHECK(issues[0].field == "alpha");
    CHECK(issues[0].message.find("dephasing") != std::string::npos);
    CHECK_THROWS_AS(require_valid(dev, circ), DomainError);

    dev = {};
    dev.gamma = 0.0;
    issues = validate(dev, circ);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].severity == Severity::Warning);
    CHECK_FALSE(has_violation(issues));

    dev = {};
    dev.z_t = 1.2;
    CHECK(has_violation(validate(dev, circ)));
    CHECK(has_violation(validate(DeviceParams{}, {-1.0, 0.2})));
}

TEST_CASE("model rejects a mismatched overlap source", "[model]") {
    DeviceParams dev{};
    auto table = shared_overlap_table(Geometry{0.5, 0.0, 0.13});
    CHECK_THROWS_AS(Model(dev, {}, table), DomainError);
}
