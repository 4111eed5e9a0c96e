#include "qmem/config.hpp"

#include "qmem/csv.hpp"
#include "qmem/errors.hpp"
#include "qmem/sweeps.hpp"

#include <array>
#include <charconv>
#include <sstream>

namespace qmem {

namespace {

constexpr std::array<ParamInfo, 36> kParams{{
    {"out", ParamKind::Text, "qmem_out", "output directory"},
    {"l", ParamKind::Number, "0.5", "oscillator length (units of the half-gap)"},
    {"x0", ParamKind::Number, "0.8", "potential-minimum offset"},
    {"lambda", ParamKind::Number, "0.13", "tunneling length"},
    {"Omega", ParamKind::Number, "7", "dimensionless oscillator frequency"},
    {"Gamma", ParamKind::Number, "0.1", "dimensionless pure-dephasing rate"},
    {"alpha", ParamKind::Number, "1", "relaxation-to-dephasing ratio"},
    {"ZT", ParamKind::Number, "1", "thermal Bloch-Z"},
    {"Rn", ParamKind::Number, "5", "external-to-minimal resistance ratio"},
    {"Vn", ParamKind::Number, "0.23", "dimensionless bias"},
    {"X0", ParamKind::Number, "0", "initial X"},
    {"Y0", ParamKind::Number, "0", "initial Y"},
    {"Z0", ParamKind::Number, "1", "initial Z"},
    {"V0", ParamKind::Number, "0", "initial V"},
    {"t_end", ParamKind::Number, "600", "integration time"},
    {"rel_tol", ParamKind::Number, "1e-9", "relative tolerance"},
    {"abs_tol", ParamKind::Number, "1e-12", "absolute tolerance"},
    {"sample_dt", ParamKind::Number, "0.01", "output sampling step"},
    {"settle_fraction", ParamKind::Number, "0.6", "discarded transient fraction"},
    {"iv_v_min", ParamKind::Number, "0", "iv-curve: lowest V"},
    {"iv_v_max", ParamKind::Number, "7", "iv-curve: highest V"},
    {"iv_points", ParamKind::Integer, "701", "iv-curve: number of V samples"},
    {"grid", ParamKind::Text, "", "equilibria/amplitude grid min:max:count (empty: Vn only)"},
    {"param", ParamKind::Text, "Vn", "amplitude parameter: Vn or ZT"},
    {"fit_side", ParamKind::Text, "auto", "amplitude fit side: auto, above or below"},
    {"vn_from", ParamKind::Number, "0", "sweep start"},
    {"vn_to", ParamKind::Number, "7", "sweep turning point"},
    {"vn_step", ParamKind::Number, "0.05", "sweep step"},
    {"t_relax", ParamKind::Number, "200", "sweep relaxation time per step"},
    {"sweep_settle", ParamKind::Number, "0.5", "sweep settle fraction"},
    {"hopf_vn_min", ParamKind::Number, "0.05", "Hopf search: lowest V_n"},
    {"hopf_vn_max", ParamKind::Number, "4", "Hopf search: highest V_n"},
    {"hopf_grid", ParamKind::Integer, "200", "Hopf search: tracking grid size"},
    {"ax1", ParamKind::Text, "Gamma:0.01:1:50", "scan axis 1 name:min:max:count"},
    {"ax2", ParamKind::Text, "ZT:0:1:50", "scan axis 2 name:min:max:count"},
    {"threads", ParamKind::Integer, "0", "worker threads (0: all cores, capped by QMEM_THREADS)"},
}};

const ParamInfo* find_param(std::string_view key) {
    for (const auto& p : kParams)
        if (p.key == key) return &p;
    return nullptr;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

void check_grid(std::string_view s) {
    if (s.empty()) return;
    // Reuse the axis parser with a dummy name.
    parse_axis_spec("Vn:" + std::string(s));
}

// Validates a raw value and returns its canonical text.
std::string canonical(const ParamInfo& p, std::string_view raw) {
    switch (p.kind) {
    case ParamKind::Number: {
        double x = 0.0;
        const auto res = std::from_chars(raw.data(), raw.data() + raw.size(), x);
        if (res.ec != std::errc() || res.ptr != raw.data() + raw.size() || raw.empty())
            throw ConfigError("malformed number '" + std::string(raw) + "' for key '" + std::string(p.key) + "'");
        return format_double(x);
    }
    case ParamKind::Integer: {
        long x = 0;
        const auto res = std::from_chars(raw.data(), raw.data() + raw.size(), x);
        if (res.ec != std::errc() || res.ptr != raw.data() + raw.size() || raw.empty())
            throw ConfigError("malformed integer '" + std::string(raw) + "' for key '" + std::string(p.key) + "'");
        return std::to_string(x);
    }
    case ParamKind::Text: break;
    }
    const std::string v(raw);
    if (p.key == "param" && v != "Vn" && v != "ZT") throw ConfigError("param must be Vn or ZT");
    if (p.key == "fit_side" && v != "auto" && v != "above" && v != "below")
        throw ConfigError("fit_side must be auto, above or below");
    if (p.key == "ax1" || p.key == "ax2") parse_axis_spec(v);
    if (p.key == "grid") check_grid(v);
    return v;
}

}  // namespace

std::string_view to_string(Command c) {
    switch (c) {
    case Command::Simulate: return "simulate";
    case Command::IvCurve: return "iv-curve";
    case Command::Equilibria: return "equilibria";
    case Command::Bifurcations: return "bifurcations";
    case Command::Sweep: return "sweep";
    case Command::Amplitude: return "amplitude";
    case Command::Scan: return "scan";
    case Command::Spectrum: return "spectrum";
    }
    return "?";
}

Command parse_command(std::string_view name) {
    for (Command c : {Command::Simulate, Command::IvCurve, Command::Equilibria, Command::Bifurcations, Command::Sweep,
                      Command::Amplitude, Command::Scan, Command::Spectrum})
        if (to_string(c) == name) return c;
    throw ConfigError("unknown command '" + std::string(name) + "'");
}

std::span<const ParamInfo> parameter_table() { return kParams; }

double RunSpec::number(std::string_view key) const {
    const std::string& s = text(key);
    double x = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), x);
    return x;
}

long RunSpec::integer(std::string_view key) const {
    const std::string& s = text(key);
    long x = 0;
    std::from_chars(s.data(), s.data() + s.size(), x);
    return x;
}

const std::string& RunSpec::text(std::string_view key) const {
    const auto it = values.find(std::string(key));
    if (it == values.end()) throw ConfigError("no such key '" + std::string(key) + "'");
    return it->second;
}

DeviceParams RunSpec::device() const {
    DeviceParams d;
    d.omega = number("Omega");
    d.gamma = number("Gamma");
    d.alpha = number("alpha");
    d.z_t = number("ZT");
    d.geom = {number("l"), number("x0"), number("lambda")};
    return d;
}

CircuitParams RunSpec::circuit() const { return {number("Rn"), number("Vn")}; }

State RunSpec::initial_state() const { return {number("X0"), number("Y0"), number("Z0"), number("V0")}; }

IntegrateOptions RunSpec::integrate_options() const {
    return {number("rel_tol"), number("abs_tol"), number("sample_dt")};
}

RunSpec parse_config(std::string_view text, const Overrides& overrides) {
    RunSpec spec;
    for (const auto& p : kParams) spec.values[std::string(p.key)] = std::string(p.default_value);
    std::string command;

    auto assign = [&](std::string_view key, std::string_view value, int line) {
        try {
            if (key == "command") {
                parse_command(value);
                command = std::string(value);
                return;
            }
            const ParamInfo* p = find_param(key);
            if (!p) throw ConfigError("unknown key '" + std::string(key) + "'");
            spec.values[std::string(key)] = canonical(*p, value);
        } catch (const ParseError&) {
            throw;
        } catch (const ConfigError& e) {
            const std::string where = line > 0 ? "line " + std::to_string(line) : "command line";
            throw ParseError(where + ": " + e.what(), line);
        }
    };

    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value'", line_no);
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty key", line_no);
        assign(key, trim(line.substr(eq + 1)), line_no);
    }
    for (const auto& [k, v] : overrides) assign(trim(k), trim(v), 0);

    if (command.empty()) throw ParseError("missing command", 0);
    spec.command = parse_command(command);
    spec.output_dir = spec.values.at("out");
    return spec;
}

}  // namespace qmem
