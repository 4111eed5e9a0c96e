#include "qmem/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace qmem {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) return "0";  // folds -0 into 0
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) throw std::logic_error("CsvTable: row width does not match header");
    rows_.push_back(std::move(cells));
}

void CsvTable::add_numbers(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    add_row(std::move(cells));
}

std::string CsvTable::str() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
}

void CsvTable::write(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    const std::string s = str();
    f.write(s.data(), static_cast<std::streamsize>(s.size()));
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

CsvTable trajectory_table(const Trajectory& traj) {
    CsvTable t({"t", "X", "Y", "Z", "V"});
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const State& s = traj.states[i];
        t.add_numbers({traj.t[i], s.x, s.y, s.z, s.v});
    }
    return t;
}

CsvTable spectrum_table(const Spectrum& s) {
    CsvTable t({"omega", "power"});
    for (std::size_t i = 0; i < s.omega.size(); ++i) t.add_numbers({s.omega[i], s.power[i]});
    return t;
}

CsvTable equilibria_table(const std::vector<EquilibriumRow>& rows) {
    CsvTable t({"V_n", "R_n", "V_star", "re1", "re2", "re3", "re4", "im1", "im2", "im3", "im4", "stability"});
    for (const auto& r : rows) {
        std::vector<std::string> cells{format_double(r.v_n), format_double(r.r_n), format_double(r.eq.v_star)};
        for (const auto& ev : r.eq.eigenvalues) cells.push_back(format_double(ev.real()));
        for (const auto& ev : r.eq.eigenvalues) cells.push_back(format_double(ev.imag()));
        cells.emplace_back(to_string(r.eq.stability));
        t.add_row(std::move(cells));
    }
    return t;
}

CsvTable bifurcation_table(const std::vector<CuspPoint>& cusps, const std::vector<SaddleNodePoint>& folds,
                           const std::vector<HopfPoint>& hopfs, double r_n) {
    CsvTable t({"type", "V_n", "R_n", "V_star", "omega"});
    for (const auto& c : cusps)
        t.add_row({"cusp", format_double(c.v_n_cusp), format_double(c.r_n_cusp), format_double(c.v_cusp), ""});
    for (const auto& f : folds)
        t.add_row({"saddle-node", format_double(f.v_n_fold), format_double(f.r_n), format_double(f.v_fold), ""});
    for (const auto& h : hopfs)
        t.add_row({"hopf", format_double(h.v_n_hopf), format_double(r_n), format_double(h.v_star),
                   format_double(h.omega_hopf)});
    return t;
}

CsvTable sweep_table(const SweepResult& r) {
    CsvTable t({"direction", "V_n", "V_low", "V_high"});
    for (const auto& e : r.entries)
        t.add_row({std::string(to_string(e.direction)), format_double(e.v_n), format_double(e.v_low),
                   format_double(e.v_high)});
    return t;
}

CsvTable amplitude_table(const AmplitudeCurve& c) {
    CsvTable t({c.param == SweepParam::Vn ? "V_n" : "Z_T", "span"});
    for (const auto& p : c.points) t.add_numbers({p.p, p.span});
    return t;
}

namespace {

template <class Cell>
CsvTable grid_table(const GridMap& m, Cell cell) {
    std::vector<std::string> header{std::string(to_string(m.axis1)) + "\\" + std::string(to_string(m.axis2))};
    for (double g : m.grid2) header.push_back(format_double(g));
    CsvTable t(std::move(header));
    for (std::size_t i = 0; i < m.grid1.size(); ++i) {
        std::vector<std::string> row{format_double(m.grid1[i])};
        for (std::size_t j = 0; j < m.grid2.size(); ++j) row.push_back(cell(i, j));
        t.add_row(std::move(row));
    }
    return t;
}

}  // namespace

CsvTable grid_span_table(const GridMap& m) {
    return grid_table(m, [&](std::size_t i, std::size_t j) { return format_double(m.at(i, j)); });
}

CsvTable grid_flag_table(const GridMap& m) {
    return grid_table(m, [&](std::size_t i, std::size_t j) {
        return std::to_string(static_cast<int>(m.status_at(i, j)));
    });
}

}  // namespace qmem
