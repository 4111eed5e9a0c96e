#pragma once

#include "qmem/equilibria.hpp"
#include "qmem/model.hpp"

#include <vector>

namespace qmem {

struct CuspPoint {
    double v_cusp = 0.0;
    double r_n_cusp = 0.0;
    double v_n_cusp = 0.0;
};

struct SaddleNodePoint {
    double v_fold = 0.0;
    double v_n_fold = 0.0;
    double r_n = 0.0;
};

struct HopfPoint {
    double v_n_hopf = 0.0;
    double v_star = 0.0;
    double omega_hopf = 0.0;   ///< |Im| of the crossing pair
    double re_residual = 0.0;  ///< |Re| of the pair at the refined point
    bool onset = true;         ///< Re goes - to + as V_n increases
    int segment = 0;           ///< index of the tracked branch segment
};

struct VoltageScan {
    double v_lo = -10.0;
    double v_hi = 10.0;
    int n_scan = 8192;
};

/// Cusp points: D_V f = D_V^2 f = 0 with D_V^3 f < 0 and R_n > 0.
std::vector<CuspPoint> find_cusp(const DeviceParams& dev, const VoltageScan& scan = {});
/// Same on an existing overlap source (geometry must match).
std::vector<CuspPoint> find_cusp(const Model& model, const VoltageScan& scan = {});

/// Fold points at fixed R_n, ascending in V. Empty below the cusp resistance.
std::vector<SaddleNodePoint> find_saddle_nodes(const DeviceParams& dev, double r_n, const VoltageScan& scan = {});
std::vector<SaddleNodePoint> find_saddle_nodes(const Model& model, double r_n, const VoltageScan& scan = {});

/// One sample of an equilibrium branch tracked along V_n.
struct BranchSample {
    double v_n = 0.0;
    double v_star = 0.0;
    bool has_pair = false;
    double pair_re = 0.0;
    double pair_im = 0.0;
    int segment = 0;
};

struct HopfOptions {
    double v_n_lo = 0.05;
    double v_n_hi = 4.0;
    int n_grid = 200;
    double re_tolerance = 1e-7;
};

/// Follows the equilibrium branch that starts at the low-V_n end. When the tracked
/// branch is destroyed at a fold, a new segment starts on the surviving branch.
std::vector<BranchSample> track_equilibrium_branch(const Model& model, const HopfOptions& opt);

/// Hopf points along V_n at fixed R_n (model's circuit R_n is used).
std::vector<HopfPoint> find_hopf(const Model& model, const HopfOptions& opt = {});
std::vector<HopfPoint> find_hopf(const DeviceParams& dev, double r_n, const HopfOptions& opt = {});

/// sqrt(Omega^2 + Gamma^2), the small-oscillation frequency of the reduced pendulum model.
double reduced_frequency(const DeviceParams& dev);

}  // namespace qmem
