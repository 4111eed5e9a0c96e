#include "qmem/bifurcation.hpp"
#include "qmem/config.hpp"
#include "qmem/csv.hpp"
#include "qmem/equilibria.hpp"
#include "qmem/errors.hpp"
#include "qmem/sweeps.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <limits>
#include <ostream>

namespace qmem {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json parameters_json(const RunSpec& spec) {
    json p = json::object();
    for (const auto& info : parameter_table()) {
        const std::string key(info.key);
        switch (info.kind) {
        case ParamKind::Number: p[key] = spec.number(key); break;
        case ParamKind::Integer: p[key] = spec.integer(key); break;
        case ParamKind::Text: p[key] = spec.text(key); break;
        }
    }
    return p;
}

class ArtifactWriter {
public:
    ArtifactWriter(const RunSpec& spec, std::ostream& log) : spec_(spec), log_(log) {
        std::error_code ec;
        fs::create_directories(spec.output_dir, ec);
        if (ec || !fs::is_directory(spec.output_dir))
            throw std::runtime_error("cannot create output directory " + spec.output_dir.string());
    }

    void write(const std::string& stem, const CsvTable& table, const json& results = json::object()) {
        const fs::path csv = spec_.output_dir / (stem + ".csv");
        table.write(csv);
        json meta;
        meta["tool"] = "qmem";
        meta["version"] = std::string(kToolVersion);
        meta["command"] = std::string(to_string(spec_.command));
        meta["artifact"] = csv.filename().string();
        meta["rows"] = table.rows();
        meta["parameters"] = parameters_json(spec_);
        meta["results"] = results;
        const fs::path side = spec_.output_dir / (stem + ".meta.json");
        std::ofstream f(side, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + side.string() + " for writing");
        f << meta.dump(2) << '\n';
        log_ << "wrote " << csv.string() << '\n';
    }

private:
    const RunSpec& spec_;
    std::ostream& log_;
};

unsigned thread_count(const RunSpec& spec) {
    const long t = spec.integer("threads");
    if (t < 0) throw ConfigError("threads must be >= 0");
    return static_cast<unsigned>(t);
}

std::vector<double> grid_values(const std::string& grid, double fallback) {
    if (grid.empty()) return {fallback};
    return parse_axis_spec("Vn:" + grid).values();
}

json span_json(const SpanResult& s) {
    return {{"v_min", s.v_min}, {"v_max", s.v_max}, {"span", s.span}, {"oscillating", s.oscillating}};
}

void run_simulate(const RunSpec& spec, const Model& m, ArtifactWriter& out, bool trajectory) {
    const Trajectory traj = integrate(m, spec.initial_state(), spec.number("t_end"), spec.integrate_options());
    const double settle = spec.number("settle_fraction");
    const Spectrum sp = power_spectrum(traj, settle);
    json res;
    res["peak_omega"] = sp.peak.omega;
    res["peak_power"] = sp.peak.power;
    res["harmonic2_db"] = harmonic_level_db(sp, 2);
    res["max_purity"] = traj.stats.max_purity;
    res["purity_warning"] = traj.stats.purity_warning;
    res["steps"] = traj.stats.steps;
    res["rejected_steps"] = traj.stats.rejected;
    try {
        res["steady"] = span_json(steady_span(traj, settle, m.device().omega));
    } catch (const InsufficientDataError& e) {
        res["steady"] = e.what();
    }
    if (trajectory) out.write("trajectory", trajectory_table(traj), res);
    out.write("spectrum", spectrum_table(sp), res);
}

void run_iv_curve(const RunSpec& spec, const Model& m, ArtifactWriter& out) {
    const long n = spec.integer("iv_points");
    if (n < 2) throw ConfigError("iv_points must be >= 2");
    const double lo = spec.number("iv_v_min"), hi = spec.number("iv_v_max");
    const auto& dev = m.device();
    const auto& circ = m.circuit();
    CsvTable t({"V", "G", "I", "load"});
    for (long k = 0; k < n; ++k) {
        const double v = k + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
        const auto gi = m.conductance_and_current({0.0, 0.0, dev.z_t, v});
        const double load = circ.r_n > 0.0 ? (circ.v_n - v) / circ.r_n : std::numeric_limits<double>::quiet_NaN();
        t.add_numbers({v, gi.g, gi.i, load});
    }
    out.write("iv_curve", t, {{"equilibria", find_roots(m).size()}});
}

void run_equilibria(const RunSpec& spec, const Model& m, ArtifactWriter& out) {
    std::vector<EquilibriumRow> rows;
    for (double vn : grid_values(spec.text("grid"), m.circuit().v_n)) {
        const Model mv = m.with_circuit({m.circuit().r_n, vn});
        for (const auto& e : find_equilibria(mv)) rows.push_back({vn, m.circuit().r_n, e});
    }
    out.write("equilibria", equilibria_table(rows));
}

void run_bifurcations(const RunSpec& spec, const Model& m, ArtifactWriter& out) {
    const double r_n = m.circuit().r_n;
    const auto cusps = find_cusp(m);
    const auto folds = find_saddle_nodes(m, r_n);
    HopfOptions ho;
    ho.v_n_lo = spec.number("hopf_vn_min");
    ho.v_n_hi = spec.number("hopf_vn_max");
    ho.n_grid = static_cast<int>(spec.integer("hopf_grid"));
    const auto hopfs = find_hopf(m, ho);
    json res;
    res["reduced_frequency"] = reduced_frequency(m.device());
    out.write("bifurcations", bifurcation_table(cusps, folds, hopfs, r_n), res);
}

void run_sweep(const RunSpec& spec, const Model& m, ArtifactWriter& out) {
    SweepOptions so;
    so.t_relax = spec.number("t_relax");
    so.settle_fraction = spec.number("sweep_settle");
    so.integrate = spec.integrate_options();
    so.initial = spec.initial_state();
    const auto path = up_down_path(spec.number("vn_from"), spec.number("vn_to"), spec.number("vn_step"));
    const SweepResult r = hysteresis_sweep(m, path, so);
    json res;
    std::size_t flagged = 0;
    for (const auto& e : r.entries) flagged += e.flagged;
    res["flagged_steps"] = flagged;
    if (auto j = largest_jump(r, SweepDirection::Up)) res["up_jump_vn"] = *j;
    if (auto j = largest_jump(r, SweepDirection::Down)) res["down_jump_vn"] = *j;
    out.write("sweep", sweep_table(r), res);
}

void run_amplitude(const RunSpec& spec, const Model& m, ArtifactWriter& out) {
    const SweepParam param = spec.text("param") == "ZT" ? SweepParam::ZT : SweepParam::Vn;
    const std::string grid = spec.text("grid");
    if (grid.empty()) throw ConfigError("amplitude needs grid = min:max:count");
    AmplitudeOptions ao;
    ao.t_end = spec.number("t_end");
    ao.settle_fraction = spec.number("settle_fraction");
    ao.integrate = spec.integrate_options();
    ao.initial = spec.initial_state();
    ao.threads = thread_count(spec);
    if (spec.text("fit_side") == "above") ao.side = FitSide::Above;
    if (spec.text("fit_side") == "below") ao.side = FitSide::Below;
    const AmplitudeCurve c = amplitude_sweep(m, param, grid_values(grid, 0.0), ao);
    json res;
    if (c.fit) {
        res["fit"] = {{"c", c.fit->c},
                      {"p0", c.fit->p0},
                      {"residual", c.fit->residual},
                      {"side", c.fit->side == FitSide::Above ? "above" : "below"}};
    } else {
        res["fit_error"] = c.fit_error;
    }
    out.write("amplitude", amplitude_table(c), res);
}

void run_scan(const RunSpec& spec, const Model& m, ArtifactWriter& out) {
    ScanOptions so;
    so.t_end = spec.number("t_end");
    so.settle_fraction = spec.number("settle_fraction");
    so.integrate = spec.integrate_options();
    so.initial = spec.initial_state();
    so.threads = thread_count(spec);
    const GridMap g = scan2d(m, parse_axis_spec(spec.text("ax1")), parse_axis_spec(spec.text("ax2")), so);
    std::size_t counts[4] = {0, 0, 0, 0};
    for (auto s : g.status) ++counts[static_cast<int>(s)];
    const json res = {{"steady", counts[0]}, {"oscillating", counts[1]}, {"invalid", counts[2]}, {"failed", counts[3]}};
    out.write("scan_span", grid_span_table(g), res);
    out.write("scan_flags", grid_flag_table(g), res);
}

bool uses_table(Command c) {
    return c == Command::Simulate || c == Command::Spectrum || c == Command::Sweep || c == Command::Amplitude ||
           c == Command::Scan;
}

}  // namespace

RunSpec runspec_from_sidecar(const fs::path& sidecar, const Overrides& overrides) {
    std::ifstream f(sidecar);
    if (!f) throw ConfigError("cannot read sidecar " + sidecar.string());
    json meta;
    try {
        meta = json::parse(f);
    } catch (const json::exception& e) {
        throw ConfigError("malformed sidecar " + sidecar.string() + ": " + e.what());
    }
    if (!meta.contains("command") || !meta.contains("parameters"))
        throw ConfigError("sidecar lacks command or parameters");
    Overrides all{{"command", meta["command"].get<std::string>()}};
    for (const auto& [key, value] : meta["parameters"].items()) {
        if (value.is_string()) all.emplace_back(key, value.get<std::string>());
        else if (value.is_number_integer()) all.emplace_back(key, std::to_string(value.get<long>()));
        else if (value.is_number()) all.emplace_back(key, format_double(value.get<double>()));
        else throw ConfigError("sidecar parameter '" + key + "' has an unsupported type");
    }
    all.insert(all.end(), overrides.begin(), overrides.end());
    return parse_config("", all);
}

int execute(const RunSpec& spec, std::ostream& log, std::ostream& err) {
    DeviceParams dev;
    CircuitParams circ;
    try {
        dev = spec.device();
        circ = spec.circuit();
        validate_geometry(dev.geom);
        const auto issues = validate(dev, circ);
        for (const auto& i : issues)
            if (i.severity == Severity::Warning) err << "warning: " << i.field << ": " << i.message << '\n';
        if (has_violation(issues)) {
            for (const auto& i : issues)
                if (i.severity == Severity::Violation) err << "error: " << i.field << ": " << i.message << '\n';
            return 2;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        ArtifactWriter out(spec, log);
        const Model m = uses_table(spec.command) ? Model(dev, circ, shared_overlap_table(dev.geom)) : Model(dev, circ);
        switch (spec.command) {
        case Command::Simulate: run_simulate(spec, m, out, true); break;
        case Command::Spectrum: run_simulate(spec, m, out, false); break;
        case Command::IvCurve: run_iv_curve(spec, m, out); break;
        case Command::Equilibria: run_equilibria(spec, m, out); break;
        case Command::Bifurcations: run_bifurcations(spec, m, out); break;
        case Command::Sweep: run_sweep(spec, m, out); break;
        case Command::Amplitude: run_amplitude(spec, m, out); break;
        case Command::Scan: run_scan(spec, m, out); break;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace qmem
