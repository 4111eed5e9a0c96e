#pragma once

#include "qmem/overlap.hpp"

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace qmem {

/// Dimensionless parameters of the quantum element.
struct DeviceParams {
    double omega = 7.0;   ///< Omega_p * tau_c
    double gamma = 0.1;   ///< pure dephasing rate * tau_c
    double alpha = 1.0;   ///< relaxation / dephasing ratio
    double z_t = 1.0;     ///< thermal Bloch-Z
    Geometry geom{};
};

struct CircuitParams {
    double r_n = 5.0;   ///< R_ext / R_0
    double v_n = 0.23;  ///< dimensionless bias
};

/// Bloch vector (x, y, z) plus memristor voltage v. Also used for time derivatives.
struct State {
    double x = 0.0;
    double y = 0.0;
    double z = 1.0;
    double v = 0.0;

    std::array<double, 4> to_array() const { return {x, y, z, v}; }
    static State from_array(const std::array<double, 4>& a) { return {a[0], a[1], a[2], a[3]}; }
    double purity() const { return x * x + y * y + z * z; }
};

struct ConductanceCurrent {
    double g = 0.0;
    double i = 0.0;
};

/// SI quantities of the device and circuit. Lengths in metres.
struct PhysicalParams {
    double mass = 0.0;
    double charge = 0.0;
    double omega_p = 0.0;      ///< trap angular frequency [rad/s]
    double half_gap = 0.0;     ///< L
    double x0 = 0.0;
    double lambda = 0.0;
    double gamma = 0.0;        ///< pure dephasing rate [1/s]
    double gamma_t = 0.0;      ///< relaxation rate [1/s]
    double temperature = 0.0;  ///< [K]; 0 means Z_T = 1
    double c_ext = 0.0;
    double r_ext = 0.0;
    double r_0 = 0.0;
    double v_ext = 0.0;
    double v_m = 0.0;

    /// sqrt(hbar / (m Omega_p))
    double oscillator_length() const;
    double tau_c() const { return c_ext * r_ext; }
};

struct DimensionlessSet {
    DeviceParams device;
    CircuitParams circuit;
    double v = 0.0;  ///< V_m in dimensionless units
};

DimensionlessSet to_dimensionless(const PhysicalParams& p);

/// Z_T = tanh(theta), theta = hbar Omega_p / (2 k_B T). theta < 0 is a domain error.
double thermal_z(double theta);

enum class Severity { Warning, Violation };

struct ValidationIssue {
    Severity severity;
    std::string field;
    std::string message;
};

/// Reports, never throws. Empty iff every invariant holds.
std::vector<ValidationIssue> validate(const DeviceParams& dev, const CircuitParams& circ);
bool has_violation(const std::vector<ValidationIssue>& issues);
/// Throws DomainError listing all hard violations.
void require_valid(const DeviceParams& dev, const CircuitParams& circ);

/// Device + circuit bound to an overlap source. Immutable; cheap to copy.
class Model {
public:
    /// Uses direct quadrature.
    Model(const DeviceParams& dev, const CircuitParams& circ);
    Model(const DeviceParams& dev, const CircuitParams& circ, std::shared_ptr<const OverlapSource> overlap);

    const DeviceParams& device() const { return dev_; }
    const CircuitParams& circuit() const { return circ_; }
    const OverlapSource& overlap() const { return *overlap_; }
    std::shared_ptr<const OverlapSource> overlap_ptr() const { return overlap_; }

    Model with_circuit(const CircuitParams& circ) const { return Model(dev_, circ, overlap_); }
    Model with_device(const DeviceParams& dev) const;

    double x_v(double v) const;

    /// Time derivative (dX, dY, dZ, dV). dV is evaluated first and substituted.
    State rhs(const State& s) const;
    void rhs(const std::array<double, 4>& s, std::array<double, 4>& ds) const;

    ConductanceCurrent conductance_and_current(const State& s) const;

private:
    DeviceParams dev_;
    CircuitParams circ_;
    std::shared_ptr<const OverlapSource> overlap_;
};

State rhs(const State& s, const DeviceParams& dev, const CircuitParams& circ);
ConductanceCurrent conductance_and_current(const State& s, const DeviceParams& dev);

/// Pure ground state, uncharged circuit.
inline constexpr State kDefaultInitialState{0.0, 0.0, 1.0, 0.0};

}  // namespace qmem
