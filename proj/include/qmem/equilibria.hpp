#pragma once

#include "qmem/model.hpp"

#include <Eigen/Core>

#include <array>
#include <complex>
#include <string_view>
#include <vector>

namespace qmem {

/// DC balance f(V) = V_n - {1 + R_n/2 [(1+Z_T) F00(x_V) + (1-Z_T) F11(x_V)]} V and its
/// V-derivatives up to third order.
class BalanceFunction {
public:
    explicit BalanceFunction(const Model& model) : model_(model) {}

    double value(double v) const { return derivatives(v, 0)[0]; }
    /// [f, f', f'', f'''] up to max_order.
    std::array<double, 4> derivatives(double v, int max_order) const;
    /// Diagonal occupation sum S(V) = (1+Z_T) F00 + (1-Z_T) F11 and V-derivatives.
    std::array<double, 4> occupation(double v, int max_order) const;

private:
    const Model& model_;
};

double f_of_v(double v, const DeviceParams& dev, const CircuitParams& circ);

enum class Stability { StableNodeFocus, Saddle, UnstableFocus, CenterMarginal };
std::string_view to_string(Stability s);

inline constexpr double kStabilityMargin = 1e-9;

using Eigenvalues = std::array<std::complex<double>, 4>;

struct Equilibrium {
    double v_star = 0.0;
    Eigenvalues eigenvalues{};
    Stability stability = Stability::StableNodeFocus;
    double residual = 0.0;            ///< |f(V*)|
    bool near_saddle_node = false;    ///< merged with a root closer than 1e-6
};

struct EquilibriumOptions {
    int n_scan = 4096;
    double merge_distance = 1e-6;
    double residual_target = 1e-12;
};

/// All roots of f on (0, V_n) (or (V_n, 0)), ascending.
std::vector<Equilibrium> find_equilibria(const Model& model, const EquilibriumOptions& opt = {});

/// Roots only, no eigen-analysis; flags mirror Equilibrium::near_saddle_node.
struct Root {
    double v = 0.0;
    double residual = 0.0;
    bool near_saddle_node = false;
};
std::vector<Root> find_roots(const Model& model, const EquilibriumOptions& opt = {});

/// Jacobian at (X, Y, Z, V) = (0, 0, Z_T, V*), variable order (V, Z, X, Y).
Eigen::Matrix4d jacobian_at(double v_star, const Model& model);

struct EigenAnalysis {
    Eigenvalues eigenvalues{};  ///< sorted by descending real part
    Stability stability = Stability::StableNodeFocus;
};

EigenAnalysis eigenvalues_and_classify(const Eigen::Matrix4d& m);

/// Complex pair with the largest imaginary part (Im > 0 member); false if all real.
bool leading_complex_pair(const Eigenvalues& ev, std::complex<double>& out, double im_tol = 1e-9);

}  // namespace qmem
