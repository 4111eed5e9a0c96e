#pragma once

#include "qmem/bifurcation.hpp"
#include "qmem/dynamics.hpp"
#include "qmem/equilibria.hpp"
#include "qmem/sweeps.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace qmem {

/// Shortest round-trip decimal form; "nan" for NaN, "inf"/"-inf" for infinities.
std::string format_double(double x);

/// Comma-delimited table with a header row. Rendered with LF line endings.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> cells);
    void add_numbers(const std::vector<double>& values);

    std::size_t rows() const { return rows_.size(); }
    std::string str() const;
    /// Throws std::runtime_error when the file cannot be written.
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

CsvTable trajectory_table(const Trajectory& traj);
CsvTable spectrum_table(const Spectrum& s);

struct EquilibriumRow {
    double v_n = 0.0;
    double r_n = 0.0;
    Equilibrium eq;
};
CsvTable equilibria_table(const std::vector<EquilibriumRow>& rows);

CsvTable bifurcation_table(const std::vector<CuspPoint>& cusps, const std::vector<SaddleNodePoint>& folds,
                           const std::vector<HopfPoint>& hopfs, double r_n);

CsvTable sweep_table(const SweepResult& r);
CsvTable amplitude_table(const AmplitudeCurve& c);

/// Span matrix: header row is the axis-2 grid, first column the axis-1 grid.
CsvTable grid_span_table(const GridMap& m);
/// Same layout, cells hold the CellStatus code (0 steady, 1 oscillating, 2 invalid, 3 failed).
CsvTable grid_flag_table(const GridMap& m);

}  // namespace qmem
