#include "imrom/pipeline.hpp"

#include "imrom/errors.hpp"
#include "imrom/export.hpp"
#include "imrom/models.hpp"

#include <spdlog/spdlog.h>
#include <toml.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

namespace imrom {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Reads keys from one config table and remembers which were consumed.
class Section {
public:
    Section(const json& doc, std::string name) : name_(std::move(name)) {
        if (doc.contains(name_)) {
            node_ = doc.at(name_);
            if (!node_.is_object()) throw ParseError("config: [" + name_ + "] must be a table");
        } else {
            node_ = json::object();
        }
    }

    bool has(const std::string& key) const { return node_.contains(key); }

    template <class T>
    T get(const std::string& key, T fallback) {
        used_.insert(key);
        if (!node_.contains(key)) return fallback;
        try {
            return node_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ParseError("config: " + name_ + "." + key + " has the wrong type");
        }
    }

    void finish() const {
        for (const auto& [key, value] : node_.items()) {
            (void)value;
            if (!used_.count(key)) throw ParseError("config: unknown key " + name_ + "." + key);
        }
    }

    const json& node() const { return node_; }

private:
    std::string name_;
    json node_;
    std::set<std::string> used_;
};

void read_hbm(Section& s, HbmOptions& h) {
    h.harmonics = s.get("harmonics", h.harmonics);
    h.newton_tol = s.get("newton_tol", h.newton_tol);
    h.newton_max_iter = s.get("newton_max_iter", h.newton_max_iter);
    h.step = s.get("step", h.step);
    h.step_min = s.get("step_min", h.step_min);
    h.step_max = s.get("step_max", h.step_max);
    h.max_points = s.get("max_points", h.max_points);
    h.stability = s.get("stability", h.stability);
    if (h.harmonics < 1) throw ParseError("config: harmonics must be at least 1");
}

json hbm_json(const HbmOptions& h) {
    return json{{"harmonics", h.harmonics},   {"newton_tol", h.newton_tol},
                {"newton_max_iter", h.newton_max_iter},
                {"step", h.step},             {"step_min", h.step_min},
                {"step_max", h.step_max},     {"max_points", h.max_points},
                {"amplitude_start", h.amplitude_start},
                {"amplitude_max", h.amplitude_max},
                {"stability", h.stability}};
}

std::vector<int> one_based_list(const std::vector<int>& v, const std::string& what) {
    std::vector<int> out;
    for (int k : v) {
        if (k < 1) throw ParseError("config: " + what + " are 1-based");
        out.push_back(k - 1);
    }
    return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double monomial(const MultiIndex& idx, const Eigen::VectorXd& a) {
    double v = 1.0;
    for (int k : idx) v *= a[k];
    return v;
}

// Maximum over one period of |U_dof| / length for every continuation point.
std::vector<double> observed_amplitude(const RealRom& rom, const ContinuationCurve& curve, int dof,
                                       double length) {
    std::vector<std::pair<MultiIndex, double>> row;
    for (const auto& t : rom.psi)
        if (t.value[dof] != 0.0) row.emplace_back(t.index, t.value[dof]);
    const int samples = 4 * (rom.degree() + 1) * curve.harmonics + 8;
    std::vector<double> out;
    for (const auto& p : curve.points) {
        const Eigen::MatrixXd a = hbm_samples(curve, p, samples);
        double peak = 0.0;
        for (int k = 0; k < a.cols(); ++k) {
            const Eigen::VectorXd ak = a.col(k);
            double u = 0.0;
            for (const auto& [idx, v] : row) u += v * monomial(idx, ak);
            peak = std::max(peak, std::abs(u));
        }
        out.push_back(peak / length);
    }
    return out;
}

std::vector<double> ratio_column(const ContinuationCurve& curve, double omega) {
    std::vector<double> out;
    for (const auto& p : curve.points) out.push_back(p.omega / omega);
    return out;
}

std::string order_tag(int order) { return "o" + std::to_string(order); }

}  // namespace

RunConfig parse_config(const json& doc, const std::string& base_dir) {
    if (!doc.is_object()) throw ParseError("config: top level must be a table");
    RunConfig c;
    c.base_dir = base_dir;
    static const std::set<std::string> sections{"model", "spectral", "parametrisation", "backbone",
                                                "frf", "integrate", "output", "seed"};
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (!sections.count(key)) throw ParseError("config: unknown section " + key);
    }
    if (doc.contains("seed")) {
        if (!doc.at("seed").is_number_integer()) throw ParseError("config: seed must be an integer");
        c.seed = doc.at("seed").get<long>();
    }

    if (!doc.contains("model")) throw ParseError("config: missing [model]");
    c.model = doc.at("model");
    if (!c.model.is_object() || !c.model.contains("kind"))
        throw ParseError("config: [model] needs a kind");
    if (c.model.contains("damping_ratio")) {
        if (!c.model.at("damping_ratio").is_number())
            throw ParseError("config: model.damping_ratio has the wrong type");
        c.damping_ratio = c.model.at("damping_ratio").get<double>();
    }

    Section sp(doc, "spectral");
    c.n_compute = sp.get("n_compute", c.n_compute);
    c.spectral.dense_threshold = sp.get("dense_threshold", c.spectral.dense_threshold);
    c.spectral.classical_damping_tol = sp.get("classical_damping_tol", c.spectral.classical_damping_tol);
    const std::string policy = sp.get<std::string>("classical_damping", "error");
    if (policy != "error" && policy != "warn")
        throw ParseError("config: spectral.classical_damping must be \"error\" or \"warn\"");
    c.spectral.classical_damping_strict = policy == "error";
    c.spectral.sparse_tol = sp.get("sparse_tol", c.spectral.sparse_tol);
    c.spectral.sparse_max_iter = sp.get("sparse_max_iter", c.spectral.sparse_max_iter);
    sp.finish();

    Section pa(doc, "parametrisation");
    try {
        c.style = parse_style(pa.get<std::string>("style", "cnf"));
    } catch (const Error& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    if (pa.has("order") && pa.has("orders"))
        throw ParseError("config: give either parametrisation.order or parametrisation.orders");
    if (pa.has("orders"))
        c.orders = pa.get<std::vector<int>>("orders", {});
    else
        c.orders = {pa.get("order", 3)};
    for (int o : c.orders)
        if (o < 1) throw ParseError("config: orders must be positive");
    c.masters = one_based_list(pa.get<std::vector<int>>("masters", {1}), "masters");
    c.resonance_tol = pa.get("resonance_tol", c.resonance_tol);
    c.condition_limit = pa.get("condition_limit", c.condition_limit);
    c.threads = pa.get("threads", c.threads);
    pa.finish();

    Section bb(doc, "backbone");
    c.backbone = bb.get("enabled", c.backbone);
    c.backbone_master = bb.get("master", 1) - 1;
    read_hbm(bb, c.backbone_hbm);
    c.backbone_hbm.amplitude_start = bb.get("amplitude_start", c.backbone_hbm.amplitude_start);
    c.backbone_hbm.amplitude_max = bb.get("amplitude_max", c.backbone_hbm.amplitude_max);
    bb.finish();

    Section fr(doc, "frf");
    c.frf = fr.get("enabled", c.frf);
    c.frf_master = fr.get("master", 1) - 1;
    c.frf_kappa = fr.get("kappa", c.frf_kappa);
    c.frf_start = fr.get("start", c.frf_start);
    c.frf_end = fr.get("end", c.frf_end);
    read_hbm(fr, c.frf_hbm);
    c.frf_hbm.amplitude_max = fr.get("amplitude_max", 1e300);
    c.frf_hbm.amplitude_start = 0.0;
    fr.finish();
    if (c.frf && c.frf_kappa <= 0.0) throw ParseError("config: frf.kappa must be positive");

    Section in(doc, "integrate");
    c.integrate = in.get("enabled", c.integrate);
    c.initial = in.get<std::vector<double>>("initial", {});
    c.t_end = in.get("t_end", c.t_end);
    c.samples = in.get("samples", c.samples);
    c.integration.rel_tol = in.get("rel_tol", c.integration.rel_tol);
    c.integration.abs_tol = in.get("abs_tol", c.integration.abs_tol);
    c.integration.dt_initial = in.get("dt_initial", c.integration.dt_initial);
    c.integration.dt_min = in.get("dt_min", c.integration.dt_min);
    c.integration.blowup_factor = in.get("blowup_factor", c.integration.blowup_factor);
    c.integration.max_steps = in.get("max_steps", c.integration.max_steps);
    in.finish();
    if (c.integrate) {
        if (c.initial.size() != 2 * c.masters.size())
            throw ParseError("config: integrate.initial needs 2 entries per master");
        if (!(c.t_end > 0.0)) throw ParseError("config: integrate.t_end must be positive");
        if (c.samples < 1) throw ParseError("config: integrate.samples must be positive");
    }

    Section ou(doc, "output");
    c.out_dir = ou.get<std::string>("dir", c.out_dir);
    c.normalising_length = ou.get("normalising_length", c.normalising_length);
    c.observe_dof = ou.get("observe_dof", 0) - 1;
    c.export_model = ou.get("export_model", c.export_model);
    ou.finish();
    if (!(c.normalising_length > 0.0)) throw ParseError("config: output.normalising_length must be positive");

    const int n = int(c.masters.size());
    if (c.backbone_master < 0 || c.backbone_master >= n)
        throw ParseError("config: backbone.master must index the master list");
    if (c.frf_master < 0 || c.frf_master >= n)
        throw ParseError("config: frf.master must index the master list");
    return c;
}

RunConfig load_config(const std::string& path) {
    if (!fs::exists(path)) throw ParseError("config file not found: " + path);
    json doc;
    if (fs::path(path).extension() == ".json") {
        doc = read_json(path);
    } else {
        try {
            const toml::table table = toml::parse_file(path);
            std::ostringstream text;
            text << toml::json_formatter{table};
            doc = json::parse(text.str());
        } catch (const toml::parse_error& e) {
            std::ostringstream msg;
            msg << "invalid TOML in " << path << ": " << e.description() << " at line "
                << e.source().begin.line;
            throw ParseError(msg.str());
        }
    }
    const std::string base = fs::path(path).parent_path().string();
    RunConfig c = parse_config(doc, base.empty() ? "." : base);
    c.source = path;
    return c;
}

SecondOrderModel build_model(const RunConfig& config) {
    Section s(json{{"model", config.model}}, "model");
    const std::string kind = s.get<std::string>("kind", "");
    s.get("damping_ratio", 0.0);
    SecondOrderModel model;
    if (kind == "duffing") {
        model = duffing(s.get("omega0", 1.0), s.get("gamma", 1.0), s.get("xi", 0.0));
    } else if (kind == "coupled2dof") {
        Coupled2DofParams p;
        p.omega1 = s.get("omega1", p.omega1);
        p.omega2 = s.get("omega2", p.omega2);
        p.beta = s.get("beta", p.beta);
        p.gamma1 = s.get("gamma1", p.gamma1);
        p.gamma2 = s.get("gamma2", p.gamma2);
        p.xi1 = s.get("xi1", p.xi1);
        p.xi2 = s.get("xi2", p.xi2);
        model = coupled2dof(p);
    } else if (kind == "valley2dof") {
        model = valley2dof(s.get("omega1", 1.0), s.get("k", 20.0), s.get("radius", 1.0));
    } else if (kind == "vk_beam" || kind == "vk_arch" || kind == "vk_cantilever") {
        BeamParams p;
        p.length = s.get("length", p.length);
        p.width = s.get("width", p.width);
        p.thickness = s.get("thickness", p.thickness);
        p.young = s.get("young", p.young);
        p.density = s.get("density", p.density);
        p.elements = s.get("elements", p.elements);
        p.rise = s.get("rise", p.rise);
        p.rayleigh_alpha = s.get("rayleigh_alpha", p.rayleigh_alpha);
        p.rayleigh_beta = s.get("rayleigh_beta", p.rayleigh_beta);
        if (kind == "vk_beam") model = vk_beam(p);
        else if (kind == "vk_arch") model = vk_arch(p);
        else model = vk_cantilever(p);
    } else if (kind == "files") {
        auto path = [&](const char* key, bool required) {
            const std::string v = s.get<std::string>(key, "");
            if (v.empty()) {
                if (required) throw ParseError(std::string("config: model.") + key + " is required");
                return v;
            }
            const fs::path p(v);
            return p.is_absolute() ? v : (fs::path(config.base_dir) / p).string();
        };
        ModelFiles f;
        f.mass = path("mass", true);
        f.stiffness = path("stiffness", true);
        f.damping = path("damping", false);
        f.quadratic = path("quadratic", false);
        f.cubic = path("cubic", false);
        model = load_model(f, s.get("symmetry_tol", 1e-10));
        model.name = s.get<std::string>("name", "files");
    } else {
        throw ParseError("config: unknown model kind \"" + kind + "\"");
    }
    s.finish();

    if (config.damping_ratio >= 0.0) {
        SecondOrderModel undamped = model;
        undamped.C = SparseMatrix(model.size(), model.size());
        const ModalBasis b = solve_eigen(undamped, config.masters.front() + 1, config.spectral);
        set_mass_proportional_damping(model, config.damping_ratio, b.omega[config.masters.front()]);
    }
    validate_model(model);
    return model;
}

RunSummary run_pipeline(const RunConfig& config) {
    using clock = std::chrono::steady_clock;
    const auto t_start = clock::now();
    json timings = json::object();
    RunSummary summary;

    fs::create_directories(config.out_dir);
    const fs::path out(config.out_dir);

    auto t0 = clock::now();
    const SecondOrderModel model = build_model(config);
    timings["model"] = seconds_since(t0);
    spdlog::info("model {}: {} dofs, {} quadratic and {} cubic entries", model.name, model.size(),
                 model.G.entries().size(), model.H.entries().size());
    if (config.export_model) save_model(model, (out / "model").string());

    const int n = int(config.masters.size());
    const int max_master = *std::max_element(config.masters.begin(), config.masters.end());
    int n_compute = config.n_compute > 0 ? config.n_compute : std::min(model.size(), 10 * n);
    n_compute = std::max(n_compute, max_master + 1);
    if (n_compute > model.size()) throw ModelError("master mode exceeds the number of dofs");

    t0 = clock::now();
    const ModalBasis basis = solve_eigen(model, n_compute, config.spectral);
    if (!basis.classical)
        spdlog::warn("damping is not classical (coupling ratio {:.3e})", basis.damping_coupling);
    // Backbones come from a parametrisation of the conservative system.
    const bool separate_backbone = config.backbone && model.damped();
    SecondOrderModel conservative;
    ModalBasis basis0;
    if (separate_backbone) {
        conservative = model;
        conservative.C = SparseMatrix(model.size(), model.size());
        basis0 = solve_eigen(conservative, n_compute, config.spectral);
    }
    timings["eigen"] = seconds_since(t0);

    const int m_bb = config.backbone_master;
    const int obs_dof = [&] {
        if (config.observe_dof >= 0) {
            if (config.observe_dof >= model.size()) throw ParseError("config: output.observe_dof out of range");
            return config.observe_dof;
        }
        Eigen::Index k = 0;
        basis.phi.col(config.masters[std::size_t(m_bb)]).cwiseAbs().maxCoeff(&k);
        return int(k);
    }();

    json orders_json = json::array();
    json order_timings = json::array();
    for (int order : config.orders) {
        OrderSummary os;
        os.order = order;
        json ot;
        ot["order"] = order;
        const std::string tag = order_tag(order);

        ParametrisationOptions po;
        po.style = config.style;
        po.order = order;
        po.masters = config.masters;
        po.resonance_tol = config.resonance_tol;
        po.condition_limit = config.condition_limit;
        po.threads = config.threads;

        t0 = clock::now();
        const Parametrisation par = parametrise(model, basis, po);
        ot["parametrise"] = seconds_since(t0);
        t0 = clock::now();
        const RealRom rom = realify(par);
        ot["realify"] = seconds_since(t0);
        os.solves = par.total_solves();
        for (int p = 1; p <= order; ++p) os.solves_per_order.push_back(par.solves(p));
        os.imag_residue = rom.imag_residue;
        spdlog::info("order {}: {} linear solves, imaginary residue {:.2e}", order, os.solves,
                     os.imag_residue);

        const std::string rom_file = "rom_" + tag + ".json";
        write_json((out / rom_file).string(), rom_to_json(par, rom));
        os.artifacts.push_back(rom_file);

        if (config.backbone) {
            t0 = clock::now();
            RealRom rom0 = rom;
            if (separate_backbone) rom0 = realify(parametrise(conservative, basis0, po));
            const double omega = rom0.omega[std::size_t(m_bb)];
            HbmOptions h = config.backbone_hbm;
            const ContinuationCurve curve = hbm_backbone(rom0, m_bb, h);
            const std::string file = "backbone_" + tag + ".csv";
            write_curve_csv((out / file).string(), curve, {"omega_ratio", "displacement"},
                            {ratio_column(curve, omega),
                             observed_amplitude(rom0, curve, obs_dof, config.normalising_length)});
            os.artifacts.push_back(file);
            ot["backbone"] = seconds_since(t0);
            spdlog::info("backbone {}: {} points, stop: {}", tag, curve.points.size(), curve.stop_reason);
        }

        if (config.frf) {
            t0 = clock::now();
            if (config.style == Style::CNF)
                throw UnsupportedError(
                    "forced response is not available for the complex normal form: zero-order "
                    "modal forcing does not apply to it");
            const double omega = rom.omega[std::size_t(config.frf_master)];
            const ContinuationCurve curve =
                hbm_frf(rom, config.frf_master, config.frf_kappa, config.frf_start * omega,
                        config.frf_end * omega, config.frf_hbm);
            const std::string file = "frf_" + tag + ".csv";
            write_curve_csv((out / file).string(), curve, {"omega_ratio", "displacement"},
                            {ratio_column(curve, omega),
                             observed_amplitude(rom, curve, obs_dof, config.normalising_length)});
            os.artifacts.push_back(file);
            ot["frf"] = seconds_since(t0);
            spdlog::info("frf {}: {} points, stop: {}", tag, curve.points.size(), curve.stop_reason);
        }

        if (config.integrate) {
            t0 = clock::now();
            const Eigen::VectorXd a0 =
                Eigen::Map<const Eigen::VectorXd>(config.initial.data(), Eigen::Index(config.initial.size()));
            const Trajectory traj = integrate(rom, a0, 0.0, config.t_end, config.samples, config.integration);
            const Eigen::MatrixXd modal = modal_projection(par.phi, model.M, reconstruct(rom, traj));
            const std::string file = "trajectory_" + tag + ".csv";
            write_trajectory_csv((out / file).string(), traj, modal);
            os.artifacts.push_back(file);
            ot["integrate"] = seconds_since(t0);
        }

        json oj;
        oj["order"] = order;
        oj["total_solves"] = os.solves;
        oj["solves_per_order"] = os.solves_per_order;
        oj["imag_residue"] = os.imag_residue;
        oj["artifacts"] = os.artifacts;
        orders_json.push_back(oj);
        order_timings.push_back(ot);
        summary.orders.push_back(std::move(os));
    }
    timings["orders"] = order_timings;

    json m;
    m["format"] = "imrom-manifest";
    m["config"] = config.source;
    m["seed"] = config.seed;
    m["model"] = {{"name", model.name},
                  {"dofs", model.size()},
                  {"kind", config.model.at("kind")},
                  {"damping_ratio", config.damping_ratio},
                  {"observe_dof", obs_dof + 1},
                  {"normalising_length", config.normalising_length}};
    json om = json::array(), ox = json::array();
    for (int j = 0; j < basis.size(); ++j) {
        om.push_back(basis.omega[j]);
        ox.push_back(basis.xi[j]);
    }
    m["spectrum"] = {{"omega", om}, {"xi", ox}, {"damping_coupling", basis.damping_coupling}};
    json masters = json::array();
    for (int k : config.masters) masters.push_back(k + 1);
    m["parametrisation"] = {{"style", style_name(config.style)},
                            {"orders", config.orders},
                            {"masters", masters},
                            {"resonance_tol", config.resonance_tol},
                            {"condition_limit", config.condition_limit},
                            {"threads", config.threads}};
    m["spectral"] = {{"n_compute", n_compute},
                     {"dense_threshold", config.spectral.dense_threshold},
                     {"classical_damping_tol", config.spectral.classical_damping_tol},
                     {"classical_damping", config.spectral.classical_damping_strict ? "error" : "warn"},
                     {"sparse_tol", config.spectral.sparse_tol},
                     {"sparse_max_iter", config.spectral.sparse_max_iter}};
    if (config.backbone) {
        m["backbone"] = hbm_json(config.backbone_hbm);
        m["backbone"]["master"] = config.backbone_master + 1;
        m["backbone"]["conservative_reparametrisation"] = separate_backbone;
    }
    if (config.frf) {
        m["frf"] = hbm_json(config.frf_hbm);
        m["frf"]["master"] = config.frf_master + 1;
        m["frf"]["kappa"] = config.frf_kappa;
        m["frf"]["start"] = config.frf_start;
        m["frf"]["end"] = config.frf_end;
    }
    if (config.integrate) {
        m["integrate"] = {{"initial", config.initial},
                          {"t_end", config.t_end},
                          {"samples", config.samples},
                          {"rel_tol", config.integration.rel_tol},
                          {"abs_tol", config.integration.abs_tol},
                          {"dt_initial", config.integration.dt_initial},
                          {"dt_min", config.integration.dt_min},
                          {"blowup_factor", config.integration.blowup_factor},
                          {"max_steps", config.integration.max_steps}};
    }
    m["orders"] = orders_json;
    timings["total"] = seconds_since(t_start);
    m["timings"] = timings;

    summary.manifest = (out / "manifest.json").string();
    write_json(summary.manifest, m);
    return summary;
}

int exit_code_for(const std::exception& error) {
    if (dynamic_cast<const ParseError*>(&error)) return 2;
    if (dynamic_cast<const ModelError*>(&error)) return 3;
    if (dynamic_cast<const OuterResonanceError*>(&error)) return 4;
    if (dynamic_cast<const SolveError*>(&error)) return 4;
    if (dynamic_cast<const UnsupportedError*>(&error)) return 5;
    if (dynamic_cast<const ConvergenceError*>(&error)) return 6;
    if (dynamic_cast<const DivergenceError*>(&error)) return 6;
    return 1;
}

}  // namespace imrom
