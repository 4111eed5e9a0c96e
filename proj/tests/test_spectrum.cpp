#include "qmem/dynamics.hpp"
#include "qmem/errors.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace qmem;
using Catch::Matchers::WithinRel;

namespace {

std::vector<double> sampled(double dt, double t_end, double (*f)(double)) {
    std::vector<double> v;
    for (std::size_t k = 0; static_cast<double>(k) * dt <= t_end + 1e-12; ++k) v.push_back(f(static_cast<double>(k) * dt));
    return v;
}

}  // namespace

TEST_CASE("pure sinusoid peak", "[spectrum]") {
    const auto sig = sampled(0.01, 200.0, [](double t) { return std::sin(7.0 * t); });
    const Spectrum s = power_spectrum(sig, 0.01);
    CHECK_THAT(s.peak.omega, WithinRel(7.0, 1e-3));
    REQUIRE(s.omega.size() == s.power.size());
    CHECK(s.omega.front() == 0.0);
    for (std::size_t i = 1; i < s.omega.size(); ++i) CHECK(s.omega[i] > s.omega[i - 1]);
    for (double p : s.power) CHECK(p >= 0.0);
}

TEST_CASE("mean is removed and harmonics are measured", "[spectrum]") {
    const auto sig = sampled(0.01, 300.0, [](double t) { return 5.0 + std::sin(3.0 * t) + 0.05 * std::sin(6.0 * t); });
    const Spectrum s = power_spectrum(sig, 0.01);
    CHECK_THAT(s.peak.omega, WithinRel(3.0, 1e-3));
    CHECK(harmonic_level_db(s, 2) > 20.0);
    CHECK(noise_floor(s) < s.peak.power);
}

TEST_CASE("too few samples", "[spectrum]") {
    CHECK_THROWS_AS(power_spectrum(std::vector<double>(63, 1.0), 0.01), InsufficientDataError);
}
