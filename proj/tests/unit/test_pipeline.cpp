#include "helpers.hpp"

#include "imrom/errors.hpp"
#include "imrom/export.hpp"
#include "imrom/pipeline.hpp"
#include "imrom/rom.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
    int code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome run_cli(const std::string& args, const fs::path& dir) {
    const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
    const std::string cmd = std::string("\"") + IMROM_CLI + "\" " + args + " > \"" + out.string() + "\" 2> \"" +
                            err.string() + "\"";
    const int status = std::system(cmd.c_str());
    Outcome o;
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    o.out = slurp(out);
    o.err = slurp(err);
    return o;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

std::complex<double> term_f(const json& rom, int order, std::vector<int> index) {
    for (const auto& blk : rom.at("complex"))
        if (blk.at("order") == order)
            for (const auto& t : blk.at("terms"))
                if (t.at("index").get<std::vector<int>>() == index) {
                    if (t.at("f").empty()) return 0.0;
                    return {t.at("f")[0].at("re").get<double>(), t.at("f")[0].at("im").get<double>()};
                }
    throw std::runtime_error("term not found");
}

std::complex<double> term_psi(const json& rom, int order, std::vector<int> index) {
    for (const auto& blk : rom.at("complex"))
        if (blk.at("order") == order)
            for (const auto& t : blk.at("terms"))
                if (t.at("index").get<std::vector<int>>() == index)
                    return {t.at("psi").at("re")[0].get<double>(), t.at("psi").at("im")[0].get<double>()};
    throw std::runtime_error("term not found");
}

double real_value(const json& rom, const char* field, std::vector<int> index, int row) {
    for (const auto& t : rom.at("real").at(field))
        if (t.at("index").get<std::vector<int>>() == index) return t.at("value")[std::size_t(row)].get<double>();
    return 0.0;
}

}  // namespace

TEST_CASE("duffing run reproduces the coefficient tables") {
    const fs::path dir = testing::scratch_dir("cli_duffing");
    const Outcome o = run_cli("run \"" + std::string(IMROM_CONFIGS) + "/duffing_cnf.toml\" --out \"" +
                                  (dir / "out").string() + "\"",
                              dir);
    REQUIRE(o.code == 0);
    CHECK(o.out.find("order 3: 4 solves") != std::string::npos);
    const json rom = imrom::read_json((dir / "out" / "rom_o3.json").string());
    CHECK(rom.at("style") == "cnf");
    CHECK(std::abs(term_psi(rom, 3, {1, 1, 1}) - 0.125) < 1e-14);
    CHECK(std::abs(term_psi(rom, 3, {1, 1, 2}) + 0.75) < 1e-14);
    CHECK(std::abs(term_f(rom, 3, {1, 1, 2}) - std::complex<double>(0, 1.5)) < 1e-14);
    CHECK(std::abs(term_f(rom, 3, {1, 1, 1})) == 0.0);
    // Cartesian form: u = a - 5/32 a^3 - 9/32 a b^2, b' = a + 3/8 a^3 + 3/8 a b^2
    CHECK(real_value(rom, "psi", {1, 1, 1}, 0) == doctest::Approx(-5.0 / 32).epsilon(1e-14));
    CHECK(real_value(rom, "psi", {1, 2, 2}, 0) == doctest::Approx(-9.0 / 32).epsilon(1e-14));
    CHECK(real_value(rom, "dynamics", {1, 1, 1}, 1) == doctest::Approx(0.375).epsilon(1e-14));
    CHECK(real_value(rom, "dynamics", {1, 2, 2}, 1) == doctest::Approx(0.375).epsilon(1e-14));
    CHECK(real_value(rom, "dynamics", {1, 1, 2}, 0) == doctest::Approx(-0.375).epsilon(1e-14));
    CHECK(real_value(rom, "dynamics", {2, 2, 2}, 0) == doctest::Approx(-0.375).epsilon(1e-14));
    CHECK(fs::exists(dir / "out" / "backbone_o3.csv"));
    CHECK(fs::exists(dir / "out" / "manifest.json"));
}

TEST_CASE("rom bundle reloads into the same reduced dynamics") {
    const fs::path dir = testing::scratch_dir("cli_roundtrip");
    REQUIRE(run_cli("run \"" + std::string(IMROM_CONFIGS) + "/duffing_cnf.toml\" --out \"" +
                        (dir / "out").string() + "\"",
                    dir)
                .code == 0);
    const imrom::RealRom rom = imrom::rom_from_json(imrom::read_json((dir / "out" / "rom_o3.json").string()));
    const double a = 0.3, b = -0.2, r2 = a * a + b * b;
    const Eigen::VectorXd rhs = imrom::evaluate_rhs(rom, Eigen::Vector2d(a, b));
    CHECK(std::abs(rhs[0] - (-b - 0.375 * r2 * b)) < 1e-15);
    CHECK(std::abs(rhs[1] - (a + 0.375 * r2 * a)) < 1e-15);
    CHECK(std::abs(rom.displacement(Eigen::Vector2d(a, b))[0] - (a - 5.0 / 32 * a * a * a - 9.0 / 32 * a * b * b)) <
          1e-15);
}

TEST_CASE("order sweep writes one curve per order") {
    const fs::path dir = testing::scratch_dir("cli_sweep");
    write_text(dir / "sweep.toml", R"(
[model]
kind = "coupled2dof"
beta = 1.0
gamma1 = 1.0

[parametrisation]
style = "graph"
orders = [3, 5, 7, 9]

[backbone]
harmonics = 3
amplitude_max = 0.2

[output]
dir = "out"
)");
    const Outcome o = run_cli("run \"" + (dir / "sweep.toml").string() + "\" --out \"" + (dir / "out").string() + "\"",
                              dir);
    REQUIRE(o.code == 0);
    for (int p : {3, 5, 7, 9}) {
        CHECK(fs::exists(dir / "out" / ("rom_o" + std::to_string(p) + ".json")));
        CHECK(fs::exists(dir / "out" / ("backbone_o" + std::to_string(p) + ".csv")));
    }
    const json m = imrom::read_json((dir / "out" / "manifest.json").string());
    CHECK(m.at("orders").size() == 4);
    CHECK(m.at("orders")[3].at("total_solves").get<int>() > 0);
}

TEST_CASE("repeated runs are bit identical apart from timings") {
    const fs::path dir = testing::scratch_dir("cli_determinism");
    write_text(dir / "run.toml", R"(
seed = 7
[model]
kind = "coupled2dof"
damping_ratio = 0.01

[parametrisation]
style = "rnf"
order = 5
threads = 3

[backbone]
harmonics = 4
amplitude_max = 0.3

[frf]
enabled = true
kappa = 0.003
harmonics = 4

[integrate]
enabled = true
initial = [0.2, 0.0]
t_end = 20.0
samples = 200
)");
    for (const char* sub : {"a", "b"}) {
        const Outcome o = run_cli("run \"" + (dir / "run.toml").string() + "\" --out \"" + (dir / sub).string() + "\"",
                                  dir);
        REQUIRE(o.code == 0);
    }
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(dir / "a")) {
        const fs::path other = dir / "b" / entry.path().filename();
        REQUIRE(fs::exists(other));
        if (entry.path().filename() == "manifest.json") {
            json ma = imrom::read_json(entry.path().string()), mb = imrom::read_json(other.string());
            ma.erase("timings");
            mb.erase("timings");
            CHECK(ma == mb);
        } else {
            CHECK(slurp(entry.path()) == slurp(other));
        }
        ++compared;
    }
    CHECK(compared == 5);
}

TEST_CASE("configuration errors exit with code 2") {
    const fs::path dir = testing::scratch_dir("cli_parse");
    write_text(dir / "missing.toml", R"(
[model]
kind = "files"
mass = "M.mtx"
stiffness = "K.mtx"
cubic = "does_not_exist.txt"
)");
    write_text(dir / "M.mtx", "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 1.0\n");
    write_text(dir / "K.mtx", "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 1.0\n");
    Outcome o = run_cli("run \"" + (dir / "missing.toml").string() + "\"", dir);
    CHECK(o.code == 2);
    CHECK(o.err.find("does_not_exist.txt") != std::string::npos);

    write_text(dir / "unknown.toml", "[model]\nkind = \"duffing\"\nomga0 = 2.0\n");
    o = run_cli("run \"" + (dir / "unknown.toml").string() + "\"", dir);
    CHECK(o.code == 2);
    CHECK(o.err.find("omga0") != std::string::npos);

    write_text(dir / "broken.toml", "[model\nkind = \"duffing\"\n");
    CHECK(run_cli("run \"" + (dir / "broken.toml").string() + "\"", dir).code == 2);
    CHECK(run_cli("run \"" + (dir / "broken.toml").string() + "\" --style bogus", dir).code == 2);
    CHECK(run_cli("run \"" + (dir / "nope.toml").string() + "\"", dir).code == 2);
}

TEST_CASE("outer resonance aborts and names the slave mode") {
    const fs::path dir = testing::scratch_dir("cli_outer");
    write_text(dir / "res.toml", R"(
[model]
kind = "coupled2dof"
omega1 = 1.0
omega2 = 2.0
beta = 1.0

[parametrisation]
style = "cnf"
order = 3

[output]
dir = "out"
)");
    const Outcome o = run_cli("run \"" + (dir / "res.toml").string() + "\"", dir);
    CHECK(o.code == 4);
    CHECK(o.err.find("mode 2") != std::string::npos);
    // making the slave a master lifts the error
    CHECK(run_cli("run \"" + (dir / "res.toml").string() + "\" --masters 1,2 --out \"" + (dir / "ok").string() + "\"",
                  dir)
              .code == 0);
}

TEST_CASE("forced response of the complex normal form is refused") {
    const fs::path dir = testing::scratch_dir("cli_cnf_frf");
    write_text(dir / "frf.toml", R"(
[model]
kind = "duffing"
xi = 0.01

[parametrisation]
style = "cnf"

[backbone]
enabled = false

[frf]
enabled = true
kappa = 0.01
)");
    const Outcome o = run_cli("run \"" + (dir / "frf.toml").string() + "\" --out \"" + (dir / "out").string() + "\"", dir);
    CHECK(o.code == 5);
    CHECK(run_cli("run \"" + (dir / "frf.toml").string() + "\" --style frnf --out \"" + (dir / "out").string() + "\"",
                  dir)
              .code == 0);
}

TEST_CASE("json configs and in-process parsing") {
    const fs::path dir = testing::scratch_dir("cli_json");
    const Outcome o = run_cli("run \"" + std::string(IMROM_CONFIGS) + "/valley_integrate.json\" --out \"" +
                                  (dir / "out").string() + "\"",
                              dir);
    REQUIRE(o.code == 0);
    const std::string traj = slurp(dir / "out" / "trajectory_o5.csv");
    CHECK(traj.rfind("t,a1,a2,u1\n", 0) == 0);

    const imrom::RunConfig c = imrom::load_config(std::string(IMROM_CONFIGS) + "/coupled2dof_sweep.toml");
    CHECK(c.style == imrom::Style::RNF);
    CHECK(c.orders == std::vector<int>{3, 5, 7, 9});
    CHECK(c.masters == std::vector<int>{0});
    CHECK(c.frf);
    CHECK(c.frf_kappa == 0.002);
    CHECK(c.damping_ratio == 0.005);
    CHECK(imrom::exit_code_for(imrom::DivergenceError("x", 1.0)) == 6);
    CHECK(imrom::exit_code_for(std::runtime_error("x")) == 1);
}
