#include "qmem/equilibria.hpp"
#include "qmem/errors.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace qmem;

namespace {

// Finite-difference Jacobian of the full rhs in (V, Z, X, Y) order.
Eigen::Matrix4d fd_jacobian(const Model& m, const State& s0) {
    auto as_vec = [](const State& s) { return Eigen::Vector4d(s.v, s.z, s.x, s.y); };
    auto from_vec = [](const Eigen::Vector4d& v) { return State{v[2], v[3], v[1], v[0]}; };
    const Eigen::Vector4d x0 = as_vec(s0);
    Eigen::Matrix4d j;
    const double h = 1e-6;
    for (int c = 0; c < 4; ++c) {
        Eigen::Vector4d xp = x0, xm = x0;
        xp[c] += h;
        xm[c] -= h;
        j.col(c) = (as_vec(m.rhs(from_vec(xp))) - as_vec(m.rhs(from_vec(xm)))) / (2 * h);
    }
    return j;
}

}  // namespace

TEST_CASE("Jacobian matches finite differences", "[equilibria]") {
    for (double zt : {1.0, 0.4}) {
        DeviceParams dev{};
        dev.z_t = zt;
        dev.gamma = 0.3;
        for (double vn : {0.23, 2.0, 4.0}) {
            const Model m(dev, {8.0, vn});
            for (const auto& e : find_equilibria(m)) {
                const auto a = jacobian_at(e.v_star, m);
                const auto b = fd_jacobian(m, {0.0, 0.0, zt, e.v_star});
                CHECK((a - b).cwiseAbs().maxCoeff() < 1e-5);
            }
        }
    }
}

TEST_CASE("relaxation eigenvalue at every equilibrium", "[equilibria]") {
    DeviceParams dev{};
    dev.alpha = 0.7;
    dev.gamma = 0.2;
    for (double vn : {0.3, 3.0, 5.0}) {
        for (const auto& e : find_equilibria(Model(dev, {8.0, vn}))) {
            bool found = false;
            for (const auto& ev : e.eigenvalues)
                found |= std::abs(ev - std::complex<double>(-dev.alpha * dev.gamma, 0.0)) < 1e-9;
            CHECK(found);
        }
    }
}

TEST_CASE("root counts are odd and roots lie between 0 and V_n", "[equilibria]") {
    const DeviceParams dev{};
    for (double rn : {0.5, 2.0, 5.0, 8.0, 12.0})
        for (double vn = -6.0; vn <= 7.0; vn += 0.37) {
            const Model m(dev, {rn, vn});
            const auto roots = find_roots(m);
            CHECK(roots.size() % 2 == 1);
            for (const auto& r : roots) {
                CHECK(r.v > std::min(0.0, vn));
                CHECK(r.v < std::max(0.0, vn));
                CHECK(std::abs(BalanceFunction(m).value(r.v)) < 1e-10);
            }
        }
    CHECK(find_roots(Model(dev, {5.0, 0.0})).size() == 1);
}

TEST_CASE("three operating points inside the fold window", "[equilibria]") {
    const DeviceParams dev{};
    const auto eq = find_equilibria(Model(dev, {8.0, 4.0}));
    REQUIRE(eq.size() == 3);
    CHECK(eq[1].stability == Stability::Saddle);
    CHECK(eq[0].v_star < eq[1].v_star);
    CHECK(eq[1].v_star < eq[2].v_star);
    CHECK(find_equilibria(Model(dev, {8.0, 2.5})).size() == 1);
    CHECK(find_equilibria(Model(dev, {8.0, 6.0})).size() == 1);
}

TEST_CASE("Hopf-unstable focus inside the oscillation window", "[equilibria]") {
    const auto eq = find_equilibria(Model(DeviceParams{}, {5.0, 1.73}));
    REQUIRE(eq.size() == 1);
    CHECK(eq[0].stability == Stability::UnstableFocus);
    const auto below = find_equilibria(Model(DeviceParams{}, {5.0, 0.1}));
    CHECK(below[0].stability == Stability::StableNodeFocus);
}

TEST_CASE("classification of hand-built matrices", "[equilibria]") {
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    m.diagonal() << -1, -2, -3, -4;
    CHECK(eigenvalues_and_classify(m).stability == Stability::StableNodeFocus);
    m(0, 0) = 1.0;
    CHECK(eigenvalues_and_classify(m).stability == Stability::Saddle);
    m(0, 0) = 0.0;
    CHECK(eigenvalues_and_classify(m).stability == Stability::CenterMarginal);
    m.diagonal() << 0.1, 0.1, -3, -4;
    m(0, 1) = 2.0;
    m(1, 0) = -2.0;
    const auto ea = eigenvalues_and_classify(m);
    CHECK(ea.stability == Stability::UnstableFocus);
    CHECK(to_string(ea.stability) == "unstable-focus");
    std::complex<double> pair;
    REQUIRE(leading_complex_pair(ea.eigenvalues, pair));
    CHECK(std::abs(pair - std::complex<double>(0.1, 2.0)) < 1e-12);
    m(2, 2) = NAN;
    CHECK_THROWS_AS(eigenvalues_and_classify(m), DomainError);
}
