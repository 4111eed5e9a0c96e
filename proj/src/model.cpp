#include "qmem/model.hpp"

#include "qmem/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace qmem {

namespace {
constexpr double kHbar = 1.054571817e-34;
constexpr double kBoltzmann = 1.380649e-23;
}  // namespace

double PhysicalParams::oscillator_length() const { return std::sqrt(kHbar / (mass * omega_p)); }

double thermal_z(double theta) {
    if (std::isnan(theta) || theta < 0.0) throw DomainError("thermal_z: theta must be >= 0");
    return std::tanh(theta);
}

DimensionlessSet to_dimensionless(const PhysicalParams& p) {
    const double tau = p.tau_c();
    if (!(tau > 0.0)) throw DomainError("to_dimensionless: tau_c = C_ext R_ext must be positive");
    if (!(p.mass > 0.0) || !(p.omega_p > 0.0) || !(p.half_gap > 0.0))
        throw DomainError("to_dimensionless: mass, Omega_p and L must be positive");
    if (!(p.r_0 > 0.0)) throw DomainError("to_dimensionless: R_0 must be positive");
    if (p.gamma < 0.0 || p.gamma_t < 0.0) throw DomainError("to_dimensionless: rates must be nonnegative");
    if (p.gamma == 0.0 && p.gamma_t > 0.0)
        throw DomainError("to_dimensionless: gamma = 0 with gamma_T > 0 leaves alpha undefined");
    if (p.temperature < 0.0) throw DomainError("to_dimensionless: temperature must be >= 0");

    const double l = p.oscillator_length();
    DimensionlessSet out;
    out.device.omega = p.omega_p * tau;
    out.device.gamma = p.gamma * tau;
    // Both rates zero: alpha is irrelevant since alpha*Gamma = 0.
    out.device.alpha = p.gamma > 0.0 ? p.gamma_t / p.gamma : 0.0;
    out.device.z_t = p.temperature == 0.0
                         ? 1.0
                         : thermal_z(kHbar * p.omega_p / (2.0 * kBoltzmann * p.temperature));
    out.device.geom = {l / p.half_gap, p.x0 / p.half_gap, p.lambda / p.half_gap};

    const double volt_scale = p.charge / (2.0 * std::numbers::sqrt2 * p.mass * p.omega_p * p.omega_p * p.half_gap * l);
    out.circuit.r_n = p.r_ext / p.r_0;
    out.circuit.v_n = volt_scale * p.v_ext;
    out.v = volt_scale * p.v_m;
    return out;
}

std::vector<ValidationIssue> validate(const DeviceParams& dev, const CircuitParams& circ) {
    std::vector<ValidationIssue> out;
    auto violation = [&](std::string field, std::string msg) {
        out.push_back({Severity::Violation, std::move(field), std::move(msg)});
    };
    if (!(dev.omega > 0.0) || !std::isfinite(dev.omega)) violation("Omega", "Omega must be positive");
    if (!(dev.gamma >= 0.0) || !std::isfinite(dev.gamma)) violation("Gamma", "Gamma must be nonnegative");
    else if (dev.gamma == 0.0)
        out.push_back({Severity::Warning, "Gamma",
                       "Gamma = 0 (coherent limit): equilibria assume nonzero dissipation"});
    if (!(dev.alpha >= 0.0 && dev.alpha <= 2.0))
        violation("alpha", "alpha must lie in [0, 2]: relaxation faster than twice the dephasing rate "
                           "drives the Bloch vector outside the unit ball (dephasing constraint)");
    if (!(dev.z_t >= 0.0 && dev.z_t <= 1.0)) violation("Z_T", "Z_T must lie in [0, 1]");
    if (!(dev.geom.l > 0.0) || !std::isfinite(dev.geom.l)) violation("l", "l must be positive");
    if (!(dev.geom.lambda > 0.0) || !std::isfinite(dev.geom.lambda)) violation("lambda", "lambda must be positive");
    if (!std::isfinite(dev.geom.x0)) violation("x0", "x0 must be finite");
    if (!(circ.r_n >= 0.0) || !std::isfinite(circ.r_n)) violation("R_n", "R_n must be nonnegative");
    if (!std::isfinite(circ.v_n)) violation("V_n", "V_n must be finite");
    return out;
}

bool has_violation(const std::vector<ValidationIssue>& issues) {
    for (const auto& i : issues)
        if (i.severity == Severity::Violation) return true;
    return false;
}

void require_valid(const DeviceParams& dev, const CircuitParams& circ) {
    const auto issues = validate(dev, circ);
    if (!has_violation(issues)) return;
    std::ostringstream msg;
    msg << "invalid parameters:";
    for (const auto& i : issues)
        if (i.severity == Severity::Violation) msg << " [" << i.field << "] " << i.message << ';';
    throw DomainError(msg.str());
}

// ---------------------------------------------------------------------------

Model::Model(const DeviceParams& dev, const CircuitParams& circ)
    : Model(dev, circ, std::make_shared<OverlapEvaluator>(dev.geom)) {}

Model::Model(const DeviceParams& dev, const CircuitParams& circ, std::shared_ptr<const OverlapSource> overlap)
    : dev_(dev), circ_(circ), overlap_(std::move(overlap)) {
    require_valid(dev_, circ_);
    if (!overlap_) overlap_ = std::make_shared<OverlapEvaluator>(dev_.geom);
    if (!(overlap_->geometry() == dev_.geom)) throw DomainError("Model: overlap source geometry differs from device");
}

Model Model::with_device(const DeviceParams& dev) const {
    if (dev.geom == dev_.geom) return Model(dev, circ_, overlap_);
    return Model(dev, circ_);
}

double Model::x_v(double v) const { return dev_.geom.x0 - dev_.geom.l * std::numbers::sqrt2 * v; }

void Model::rhs(const std::array<double, 4>& s, std::array<double, 4>& ds) const {
    const double x = s[0], y = s[1], z = s[2], v = s[3];
    const OverlapTriple f = overlap_->value(x_v(v));
    const double vdot =
        circ_.v_n - (1.0 + 0.5 * circ_.r_n * ((1.0 + z) * f.f00 + 2.0 * x * f.f01 + (1.0 - z) * f.f11)) * v;
    ds[0] = dev_.omega * y + 2.0 * vdot * z - dev_.gamma * x;
    ds[1] = -dev_.omega * x - dev_.gamma * y;
    ds[2] = -2.0 * vdot * x - dev_.alpha * dev_.gamma * (z - dev_.z_t);
    ds[3] = vdot;
}

State Model::rhs(const State& s) const {
    std::array<double, 4> ds{};
    rhs(s.to_array(), ds);
    return State::from_array(ds);
}

ConductanceCurrent Model::conductance_and_current(const State& s) const {
    const OverlapTriple f = overlap_->value(x_v(s.v));
    const double g = 0.5 * (1.0 + s.z) * f.f00 + s.x * f.f01 + 0.5 * (1.0 - s.z) * f.f11;
    return {g, g * s.v};
}

State rhs(const State& s, const DeviceParams& dev, const CircuitParams& circ) {
    return Model(dev, circ).rhs(s);
}

ConductanceCurrent conductance_and_current(const State& s, const DeviceParams& dev) {
    return Model(dev, CircuitParams{0.0, 0.0}).conductance_and_current(s);
}

}  // namespace qmem
