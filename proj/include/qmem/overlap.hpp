#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

namespace qmem {

/// Tunneling geometry in units of the half-gap L = 1.
struct Geometry {
    double l = 0.5;       ///< oscillator length
    double x0 = 0.8;      ///< potential-minimum offset
    double lambda = 0.13; ///< tunneling length

    friend bool operator==(const Geometry&, const Geometry&) = default;
};

/// Throws DomainError unless l > 0, lambda > 0 and x0 finite.
void validate_geometry(const Geometry& g);

struct OverlapTriple {
    double f00 = 0.0;
    double f01 = 0.0;
    double f11 = 0.0;
};

/// F_ij and its x_V-derivatives up to some order; d[k] holds the k-th derivative.
struct OverlapJet {
    std::array<OverlapTriple, 4> d{};
};

/// Gauss–Hermite rule for weight exp(-u^2). Nodes with negligible weight are dropped.
struct HermiteRule {
    int order = 0;
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Cached rule of the given order (thread-safe; rules live for the program lifetime).
const HermiteRule& gauss_hermite_rule(int order);

/// Rule order used for a geometry: grows as the sech kernel narrows relative to l.
int quadrature_order_for(const Geometry& g);

/// Anything that can provide F_ij(x_V) and derivatives.
class OverlapSource {
public:
    virtual ~OverlapSource() = default;
    /// Orders 0..max_order filled; max_order in [0, 3].
    virtual OverlapJet evaluate(double x_v, int max_order) const = 0;
    virtual const Geometry& geometry() const = 0;

    OverlapTriple value(double x_v) const { return evaluate(x_v, 0).d[0]; }
};

/// Direct quadrature of the Hermite–sech overlap integrals.
///
/// With u = x~/l the integrals become
///   F_ij(x_V) = c_ij / sqrt(pi) * Int exp(-u^2) H_i(u) H_j(u) sech((l u + x_V)/lambda) du,
/// c_00 = 1, c_01 = 1/sqrt(2), c_11 = 1/2. Derivatives in x_V act only on the sech
/// factor and are taken under the integral sign.
class OverlapEvaluator final : public OverlapSource {
public:
    explicit OverlapEvaluator(const Geometry& g);
    OverlapEvaluator(const Geometry& g, int quadrature_order);

    OverlapJet evaluate(double x_v, int max_order) const override;
    const Geometry& geometry() const override { return geom_; }
    int quadrature_order() const { return rule_->order; }

private:
    Geometry geom_;
    const HermiteRule* rule_;
    // Per-node prefactors w_k/sqrt(pi) * c_ij H_i H_j.
    std::vector<double> a00_, a01_, a11_;
    std::vector<double> shift_;  // l*u_k/lambda
};

/// Single entry F_ij^(deriv_order)(x_V); i, j in {0,1}, deriv_order in {0,1,2}.
double overlap_f(int i, int j, double x_v, const Geometry& g, int deriv_order);

/// Uniform-grid cache of F, F', F'' with quintic Hermite interpolation.
/// Queries outside [x_min, x_max] and third derivatives go to direct quadrature.
class OverlapTable final : public OverlapSource {
public:
    OverlapTable(const Geometry& g, double x_min, double x_max, int n);

    OverlapJet evaluate(double x_v, int max_order) const override;
    const Geometry& geometry() const override { return direct_.geometry(); }

    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    std::span<const double> grid() const { return grid_; }
    const OverlapJet& node(std::size_t i) const { return nodes_[i]; }
    static constexpr int interpolation_order = 5;

    /// Columns: x_V, F00, F01, F11, F00', F01', F11', F00'', F01'', F11''.
    void save_csv(const std::filesystem::path& path) const;
    static OverlapTable load_csv(const Geometry& g, const std::filesystem::path& path);

private:
    OverlapTable(const Geometry& g, std::vector<double> grid, std::vector<OverlapJet> nodes);

    OverlapEvaluator direct_;
    double x_min_ = 0.0;
    double x_max_ = 0.0;
    double h_ = 0.0;
    std::vector<double> grid_;
    std::vector<OverlapJet> nodes_;
};

OverlapTable build_overlap_table(const Geometry& g, double x_min, double x_max, int n);

/// Shared table covering |x_V| <= 12 at spacing 0.005, built once per geometry.
std::shared_ptr<const OverlapTable> shared_overlap_table(const Geometry& g);

}  // namespace qmem
