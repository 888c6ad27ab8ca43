#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "lfpp/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"LFPP simulator: metric balls, geodesics and scaling exponents on discrete GFF lattices"};
    std::string command;
    std::string config_path;
    app.add_option("command", command, "sample | ball | geodesics | confluence | scaling | dims | annuli");
    app.add_option("--config", config_path, "key = value file; flags override its values");

    // Flags are kept as text and applied through the same parser as config files.
    std::map<std::string, std::string> overrides;
    const std::pair<const char*, const char*> flags[] = {
        {"n", "grid side (power of two)"},
        {"xi", "LFPP parameter"},
        {"eps", "mollification scale, 0 for the raw field"},
        {"seed", "master seed"},
        {"s", "ball radius: number, qP (edge-distance quantile), fP (fraction of the nearest edge distance) or auto; comma list allowed"},
        {"t", "inner radii as fractions of s, comma list"},
        {"target-stride", "every k-th boundary cell is a geodesic target"},
        {"replicas", "number of independent fields"},
        {"output-dir", "artifact directory"},
        {"connectivity", "4 or 8"},
        {"xi-list", "xi sweep for scaling, comma list"},
        {"eps-list", "eps sweep for scaling, comma list"},
        {"alpha", "outer annulus exponent for annuli"},
        {"eps-r", "relative annulus scales for annuli, comma list"},
        {"annulus-radius", "base radius for annuli"},
    };
    for (const auto& [name, help] : flags) {
        std::string key = name;
        for (char& c : key)
            if (c == '-') c = '_';
        app.add_option_function<std::string>(
            std::string("--") + name, [key, &overrides](const std::string& v) { overrides[key] = v; }, help);
    }
    app.add_option_function<std::string>(
        "--stride", [&overrides](const std::string& v) { overrides["target_stride"] = v; },
        "alias of --target-stride");
    CLI11_PARSE(app, argc, argv);

    lfpp::ExperimentConfig cfg;
    try {
        if (!config_path.empty()) cfg = lfpp::load_config(config_path);
        if (!command.empty()) lfpp::set_config_value(cfg, "command", command);
        else if (config_path.empty()) throw lfpp::ConfigError("no command given (and no --config file)");
        for (const auto& [key, value] : overrides) {
            try {
                lfpp::set_config_value(cfg, key, value);
            } catch (const lfpp::ConfigError& e) {
                throw lfpp::ConfigError(std::string("flag ") + e.what());
            }
        }
    } catch (const lfpp::ConfigError& e) {
        std::cerr << "lfpp: config error: " << e.what() << '\n';
        return lfpp::kExitConfig;
    }
    const lfpp::RunResult result = lfpp::run(cfg, std::cerr);
    if (result.status == lfpp::kExitOk || result.status == lfpp::kExitInconclusive || !result.artifacts.empty())
        for (const std::string& a : result.artifacts) std::cout << cfg.output_dir << '/' << a << '\n';
    return result.status;
}
