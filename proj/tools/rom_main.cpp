#include "imrom/errors.hpp"
#include "imrom/pipeline.hpp"

#include <CLI11.hpp>
#include <spdlog/cfg/env.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>
#include <sstream>

namespace {

std::vector<int> parse_masters(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const int k = std::stoi(item, &used);
            if (used != item.size() || k < 1) throw std::invalid_argument(item);
            out.push_back(k - 1);
        } catch (const std::exception&) {
            throw imrom::ParseError("--masters expects 1-based indices such as 1,2");
        }
    }
    if (out.empty()) throw imrom::ParseError("--masters is empty");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("rom"));
    spdlog::set_pattern("[%l] %v");
    // SPDLOG_LEVEL=debug|info|warn|error|off
    spdlog::cfg::load_env_levels();

    CLI::App app{"Invariant-manifold reduced-order models of geometrically nonlinear structures"};
    app.require_subcommand(1);
    auto* run = app.add_subcommand("run", "Run the stages described by a TOML or JSON config");

    std::string config_path, style, masters, out_dir;
    int order = 0, threads = 0;
    run->add_option("config", config_path, "config file")->required();
    run->add_option("--style", style, "graph, cnf, rnf or frnf")
        ->check(CLI::IsMember({"graph", "cnf", "rnf", "frnf"}, CLI::ignore_case));
    run->add_option("--order", order, "single parametrisation order")->check(CLI::PositiveNumber);
    run->add_option("--masters", masters, "1-based master modes, e.g. 1,2");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--threads", threads, "worker threads for the homological solves")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        imrom::RunConfig config = imrom::load_config(config_path);
        if (!style.empty()) config.style = imrom::parse_style(style);
        if (order > 0) config.orders = {order};
        if (!masters.empty()) {
            config.masters = parse_masters(masters);
            if (config.integrate && config.initial.size() != 2 * config.masters.size())
                throw imrom::ParseError("integrate.initial does not match --masters");
            if (config.backbone_master >= int(config.masters.size()) ||
                config.frf_master >= int(config.masters.size()))
                throw imrom::ParseError("backbone/frf master does not index --masters");
        }
        if (!out_dir.empty()) config.out_dir = out_dir;
        if (threads > 0) config.threads = threads;

        const imrom::RunSummary summary = imrom::run_pipeline(config);
        for (const auto& o : summary.orders)
            std::cout << "order " << o.order << ": " << o.solves << " solves\n";
        std::cout << "manifest: " << summary.manifest << '\n';
        return 0;
    } catch (const imrom::OuterResonanceError& e) {
        spdlog::error("outer resonance: {}", e.what());
        return imrom::exit_code_for(e);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return imrom::exit_code_for(e);
    }
}
