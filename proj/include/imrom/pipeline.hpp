#pragma once

#include "imrom/hbm.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace imrom {

// Fully resolved run description. Every tolerance has a named key and a default.
struct RunConfig {
    std::string source;            // config file path ("" when built in code)
    std::string base_dir = ".";    // relative model file paths resolve against this
    long seed = 0;                 // recorded only, no stage draws random numbers

    nlohmann::json model = nlohmann::json::object();  // [model] section, kind-specific keys
    double damping_ratio = -1.0;   // mass-proportional damping on master 1 when >= 0

    int n_compute = 0;             // 0: min(N, 10 n_masters)
    SpectralOptions spectral;

    Style style = Style::CNF;
    std::vector<int> orders{3};
    std::vector<int> masters{0};   // 0-based
    double resonance_tol = 1e-3;
    double condition_limit = 1e12;
    int threads = 1;

    bool backbone = true;
    int backbone_master = 0;       // 0-based position in masters
    HbmOptions backbone_hbm;

    bool frf = false;
    int frf_master = 0;
    double frf_kappa = 0.0;
    double frf_start = 0.8;        // multiples of the forced master's omega
    double frf_end = 1.2;
    HbmOptions frf_hbm;

    bool integrate = false;
    std::vector<double> initial;   // Cartesian reduced state, size 2n
    double t_end = 0.0;
    int samples = 1000;
    IntegrationOptions integration;

    std::string out_dir = "out";
    double normalising_length = 1.0;
    int observe_dof = -1;          // 0-based; -1: largest entry of the first master shape
    bool export_model = false;
};

// TOML by default, JSON when the file ends in .json. Unknown keys are rejected.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const nlohmann::json& doc, const std::string& base_dir = ".");

SecondOrderModel build_model(const RunConfig& config);

struct OrderSummary {
    int order = 0;
    int solves = 0;
    std::vector<int> solves_per_order;
    double imag_residue = 0.0;
    std::vector<std::string> artifacts;
};

struct RunSummary {
    std::vector<OrderSummary> orders;
    std::string manifest;
};

// Executes the configured stages and writes every artifact into config.out_dir.
RunSummary run_pipeline(const RunConfig& config);

// Process exit code for an exception raised by any stage.
int exit_code_for(const std::exception& error);

}  // namespace imrom
