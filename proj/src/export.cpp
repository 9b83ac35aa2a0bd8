#include "imrom/export.hpp"

#include "imrom/errors.hpp"

#include <cstdio>
#include <fstream>

namespace imrom {

using nlohmann::json;

namespace {

json complex_vector(const Eigen::VectorXcd& v) {
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        re.push_back(v[i].real());
        im.push_back(v[i].imag());
    }
    return json{{"re", re}, {"im", im}};
}

json one_based(const MultiIndex& idx) {
    json a = json::array();
    for (int k : idx) a.push_back(k + 1);
    return a;
}

MultiIndex zero_based(const json& a) {
    MultiIndex idx;
    for (const auto& v : a) idx.push_back(v.get<int>() - 1);
    return idx;
}

json real_terms(const std::vector<RealTerm>& terms) {
    json out = json::array();
    for (const auto& t : terms) {
        json vals = json::array();
        for (Eigen::Index i = 0; i < t.value.size(); ++i) vals.push_back(t.value[i]);
        out.push_back(json{{"index", one_based(t.index)}, {"value", vals}});
    }
    return out;
}

std::vector<RealTerm> read_terms(const json& arr) {
    std::vector<RealTerm> out;
    for (const auto& t : arr) {
        RealTerm r;
        r.index = zero_based(t.at("index"));
        const auto& v = t.at("value");
        r.value.resize(Eigen::Index(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i) r.value[Eigen::Index(i)] = v[i].get<double>();
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace

json rom_to_json(const Parametrisation& par, const RealRom& rom) {
    json doc;
    doc["format"] = "imrom-rom";
    doc["version"] = 1;
    doc["style"] = style_name(par.style);
    doc["order"] = par.order;
    doc["n_dofs"] = par.n_dofs;
    json masters = json::array();
    for (int m : par.masters.modes) masters.push_back(m + 1);
    doc["masters"] = masters;
    json lam = json::array();
    for (auto l : par.masters.lambda) lam.push_back(json::array({l.real(), l.imag()}));
    doc["lambda"] = lam;
    doc["resonance_tol"] = par.resonance_tol;

    json orders = json::array();
    for (std::size_t p = 1; p < par.blocks.size(); ++p) {
        json terms = json::array();
        for (const auto& c : par.blocks[p].terms) {
            json t;
            t["index"] = one_based(c.index);
            t["solved"] = c.solved;
            t["psi"] = complex_vector(c.psi);
            t["ups"] = complex_vector(c.ups);
            json f = json::array();
            for (int s = 0; s < c.f.size(); ++s)
                if (c.f[s] != std::complex<double>(0.0))
                    f.push_back(json{{"s", s + 1}, {"re", c.f[s].real()}, {"im", c.f[s].imag()}});
            t["f"] = f;
            terms.push_back(std::move(t));
        }
        orders.push_back(json{{"order", p}, {"solves", par.blocks[p].solves}, {"terms", terms}});
    }
    doc["complex"] = orders;

    json real;
    real["coordinates"] = "a_j = 2 Re z_j, a_{j+n} = 2 Im z_j";
    real["imag_residue"] = rom.imag_residue;
    real["dynamics"] = real_terms(rom.dynamics);
    real["psi"] = real_terms(rom.psi);
    real["ups"] = real_terms(rom.ups);
    doc["real"] = real;
    return doc;
}

RealRom rom_from_json(const json& doc) {
    if (doc.value("format", "") != "imrom-rom") throw ParseError("not a reduced-order model document");
    RealRom rom;
    rom.style = parse_style(doc.at("style").get<std::string>());
    rom.order = doc.at("order").get<int>();
    rom.n_dofs = doc.at("n_dofs").get<int>();
    rom.n = int(doc.at("masters").size());
    for (const auto& l : doc.at("lambda")) rom.lambda.emplace_back(l[0].get<double>(), l[1].get<double>());
    for (int j = 0; j < rom.n; ++j) rom.omega.push_back(std::abs(rom.lambda[std::size_t(j)]));
    const auto& real = doc.at("real");
    rom.imag_residue = real.at("imag_residue").get<double>();
    rom.dynamics = read_terms(real.at("dynamics"));
    rom.psi = read_terms(real.at("psi"));
    rom.ups = read_terms(real.at("ups"));
    return rom;
}

void write_json(const std::string& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write file: " + path);
    out << doc.dump(1) << '\n';
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError("invalid JSON in " + path + ": " + e.what());
    }
}

void write_curve_csv(const std::string& path, const ContinuationCurve& curve,
                     const std::vector<std::string>& extra_names,
                     const std::vector<std::vector<double>>& extra) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ParseError("cannot write file: " + path);
    std::fprintf(f, "omega,amplitude,peak,arclength,stable");
    for (const auto& n : extra_names) std::fprintf(f, ",%s", n.c_str());
    std::fprintf(f, "\n");
    for (std::size_t k = 0; k < curve.points.size(); ++k) {
        const auto& p = curve.points[k];
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%d", p.omega, p.amplitude, p.peak, p.arclength, p.stable);
        for (const auto& col : extra) std::fprintf(f, ",%.17g", col.at(k));
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj, const Eigen::MatrixXd& modal) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ParseError("cannot write file: " + path);
    const int d = traj.a.empty() ? 0 : int(traj.a[0].size());
    std::fprintf(f, "t");
    for (int i = 0; i < d; ++i) std::fprintf(f, ",a%d", i + 1);
    for (int j = 0; j < modal.rows(); ++j) std::fprintf(f, ",u%d", j + 1);
    std::fprintf(f, "\n");
    for (std::size_t k = 0; k < traj.t.size(); ++k) {
        std::fprintf(f, "%.17g", traj.t[k]);
        for (int i = 0; i < d; ++i) std::fprintf(f, ",%.17g", traj.a[k][i]);
        for (int j = 0; j < modal.rows(); ++j) std::fprintf(f, ",%.17g", modal(j, Eigen::Index(k)));
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

}  // namespace imrom
