// qmem: command-line front end for the quantum-memristor neuron toolkit.

#include "qmem/config.hpp"
#include "qmem/errors.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

int main(int argc, char** argv) {
    CLI::App app{"Quantum-memristor neuron simulation and bifurcation analysis"};
    app.set_version_flag("--version", std::string(qmem::kToolVersion));

    std::string command;
    std::string config_path;
    std::string replay_path;
    std::map<std::string, std::string> given;

    app.add_option("command", command,
                   "simulate | iv-curve | equilibria | bifurcations | sweep | amplitude | scan | spectrum");
    app.add_option("--config", config_path, "key = value file")->check(CLI::ExistingFile);
    app.add_option("--replay", replay_path, "rerun from a *.meta.json sidecar")->check(CLI::ExistingFile);
    for (const auto& p : qmem::parameter_table()) {
        const std::string key(p.key);
        std::string desc(p.help);
        if (!p.default_value.empty()) desc += " [" + std::string(p.default_value) + "]";
        app.add_option_function<std::string>(
            "--" + key, [&given, key](const std::string& v) { given[key] = v; }, desc);
    }

    CLI11_PARSE(app, argc, argv);

    qmem::Overrides overrides;
    if (!command.empty()) overrides.emplace_back("command", command);
    for (const auto& [k, v] : given) overrides.emplace_back(k, v);

    qmem::RunSpec spec;
    try {
        if (!replay_path.empty()) {
            spec = qmem::runspec_from_sidecar(replay_path, overrides);
        } else {
            std::string text;
            if (!config_path.empty()) {
                std::ifstream f(config_path);
                std::ostringstream ss;
                ss << f.rdbuf();
                text = ss.str();
            }
            spec = qmem::parse_config(text, overrides);
        }
    } catch (const qmem::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return qmem::execute(spec, std::cout, std::cerr);
}
