#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "fracflow/commands.hpp"
#include "fracflow/curves.hpp"
#include "oracles.hpp"

using namespace fracflow;
namespace fs = std::filesystem;

namespace {

const char* const kModel = R"([model]
omega_f = 0.02
omega_v = 0.8
kappa_f = 0.75
kappa_v = 0.02
lambda_mf = 1e-3
lambda_mv = 1e-8
lambda_fv = 1e-5
)";

const char* const kPhysical = R"([physical]
phi_m = 0.1
phi_f = 0.1
phi_v = 0.1
c_m = 1e-9
c_f = 1e-9
c_v = 1e-9
k_m = 2e-14
k_f = 2e-14
k_v = 2e-14
mu = 1e-3
a_mf = 0
a_mv = 0
a_fv = 0
r_w = 0.1
h = 10
Q0 = 1e-3
B0 = 1
p_i = 3e7
)";

class TempDir {
public:
    TempDir()
    {
        static int counter = 0;
        path_ = fs::temp_directory_path() / ("fracflow-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

    fs::path write(const std::string& name, const std::string& text) const
    {
        std::ofstream(path_ / name) << text;
        return path_ / name;
    }

private:
    fs::path path_;
};

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    args.insert(args.begin(), "fracflow");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream s(line);
    std::string cell;
    while (std::getline(s, cell, ',')) {
        out.push_back(cell);
    }
    return out;
}

std::string replace(std::string text, const std::string& from, const std::string& to)
{
    text.replace(text.find(from), from.size(), to);
    return text;
}

}  // namespace

TEST_CASE("curve writes the default grid")
{
    TempDir dir;
    const auto cfg = dir.write("a.ini", kModel);
    const auto out = dir.path() / "c.csv";
    const Run r = run({"curve", "--config", cfg.string(), "--out", out.string()});
    CHECK(r.code == 0);
    CHECK(r.err.find("101 points") != std::string::npos);
    CHECK(r.err.find("stehfest n = 12") != std::string::npos);
    std::ifstream in(out);
    const auto pts = read_curve(in, CurveFormat::csv);
    CHECK(pts.size() == 101);

    SUBCASE("json, quiet, stehfest override")
    {
        const auto js = dir.path() / "c.json";
        const Run q = run({"curve", "--config", cfg.string(), "--out", js.string(), "--format", "json", "--quiet",
                           "--stehfest-n", "14"});
        CHECK(q.code == 0);
        CHECK(q.err.empty());
        std::ifstream jin(js);
        CHECK(read_curve(jin, CurveFormat::json).size() == 101);
    }

    SUBCASE("stdout when no path is configured")
    {
        const auto small = dir.write("s.ini", std::string(kModel) + "[grid]\nt_min = 1\nt_max = 10\npoints_per_decade = 2\n");
        const Run s = run({"curve", "--config", small.string(), "--quiet"});
        CHECK(s.code == 0);
        CHECK(s.out.rfind("t_D,p_w,dp_w_dlnt\n1.0,", 0) == 0);
    }
}

TEST_CASE("configuration errors exit with code 1 and name the key")
{
    TempDir dir;
    auto expect_config_error = [&](const std::string& text, const std::string& needle) {
        const auto cfg = dir.write("bad.ini", text);
        const Run r = run({"curve", "--config", cfg.string(), "--out", (dir.path() / "x.csv").string()});
        CAPTURE(text);
        CHECK(r.code == 1);
        CHECK(r.err.find(needle) != std::string::npos);
    };
    expect_config_error(replace(kModel, "omega_v = 0.8\n", ""), "omega_v");
    expect_config_error(replace(kModel, "kappa_f = 0.75", "kappa_f = 0.99"), "kappa_m");
    expect_config_error(replace(kModel, "kappa_f = 0.75", "kappa_f = abc"), "kappa_f");
    expect_config_error(std::string(kModel) + "gamma = 1\n", "gamma");
    expect_config_error(std::string(kModel) + "[plot]\nx = 1\n", "plot");
    expect_config_error(std::string(kModel) + kPhysical, "mutually exclusive");
    expect_config_error("[grid]\nt_min = 1\n", "[model]");
    expect_config_error(std::string(kModel) + "[inversion]\nstehfest_n = 13\n", "stehfest_n");
    expect_config_error(std::string(kModel) + "[grid]\nt_min = 10\nt_max = 1\n", "t_min");

    const auto cfg = dir.write("ok.ini", kModel);
    CHECK(run({"curve", "--config", cfg.string(), "--stehfest-n", "7"}).code == 1);
    CHECK(run({"curve", "--config", cfg.string(), "--format", "xml"}).code == 1);
    CHECK(run({"curve"}).code == 1);
    CHECK(run({"curve", "--config", (dir.path() / "missing.ini").string()}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("model and i/o failures")
{
    TempDir dir;
    const auto cfg = dir.write("m.ini", replace(kModel, "kappa_v = 0.02", "kappa_v = 1e-300"));
    const Run m = run({"curve", "--config", cfg.string(), "--out", (dir.path() / "x.csv").string()});
    CHECK(m.code == 2);
    CHECK(m.err.find("u = ") != std::string::npos);

    const auto ok = dir.write("ok.ini", kModel);
    const Run io = run({"curve", "--config", ok.string(), "--out", (dir.path() / "no" / "such" / "x.csv").string()});
    CHECK(io.code == 3);
}

TEST_CASE("sweep")
{
    TempDir dir;
    const auto grid = std::string("[grid]\nt_min = 1\nt_max = 1e4\npoints_per_decade = 4\n");
    auto files = [&] {
        std::vector<std::string> names;
        for (const auto& e : fs::directory_iterator(dir.path())) {
            if (e.path().extension() == ".csv") {
                names.push_back(e.path().filename().string());
            }
        }
        std::sort(names.begin(), names.end());
        return names;
    };
    const auto base = (dir.path() / "fig.csv").string();

    SUBCASE("classic case is appended")
    {
        const auto cfg = dir.write("s.ini", std::string(kModel) + grid +
                                                "[sweep]\ntriples = 0.9,0.8,0.7; 0.77,0.56,0.6; 0.5,0.5,0.5\n");
        CHECK(run({"sweep", "--config", cfg.string(), "--out", base, "--quiet"}).code == 0);
        CHECK(files() == std::vector<std::string>{"fig_bm0.5_bf0.5_bv0.5.csv", "fig_bm0.77_bf0.56_bv0.6.csv",
                                                  "fig_bm0.9_bf0.8_bv0.7.csv", "fig_bm1_bf1_bv1.csv"});
    }
    SUBCASE("classic case is not duplicated")
    {
        const auto cfg = dir.write("s.ini", std::string(kModel) + grid + "[sweep]\ntriples = 1,1,1; 0.9,0.8,0.7\n");
        CHECK(run({"sweep", "--config", cfg.string(), "--out", base, "--quiet"}).code == 0);
        CHECK(files().size() == 2);
    }
    SUBCASE("invalid triple is skipped")
    {
        const auto cfg = dir.write("s.ini", std::string(kModel) + grid + "[sweep]\ntriples = 1.5,1,1; 0.9,0.8,0.7\n");
        const Run r = run({"sweep", "--config", cfg.string(), "--out", base});
        CHECK(r.code == 2);
        CHECK(r.err.find("beta_m") != std::string::npos);
        CHECK(files() == std::vector<std::string>{"fig_bm0.9_bf0.8_bv0.7.csv", "fig_bm1_bf1_bv1.csv"});
    }
    SUBCASE("missing triples")
    {
        const auto cfg = dir.write("s.ini", std::string(kModel) + grid);
        CHECK(run({"sweep", "--config", cfg.string(), "--out", base}).code == 1);
    }
}

TEST_CASE("laplace")
{
    TempDir dir;
    const auto cfg = dir.write("l.ini", kModel);
    const Run r = run({"laplace", "--config", cfg.string(), "--u", "1", "--quiet"});
    REQUIRE(r.code == 0);
    std::istringstream lines(r.out);
    std::string header, row, extra;
    std::getline(lines, header);
    std::getline(lines, row);
    CHECK(!std::getline(lines, extra));
    CHECK(header == "u,m1,m2,m3,m4,m5,m6,alpha1,alpha2,alpha3,A1,A2,A3,B1,B2,B3,D1,D2,D3,pw_bar");
    const auto cells = split_csv(row);
    REQUIRE(cells.size() == 20);
    std::vector<double> v;
    for (const auto& c : cells) {
        v.push_back(std::stod(c));
        CHECK(std::isfinite(v.back()));
    }

    // Recompute the flux condition from the printed columns alone.
    const long double u = v[0];
    const long double km = 1 - 0.75L - 0.02L, kf = 0.75L, kv = 0.02L;
    long double flux = 0, scale = 0;
    for (int i = 0; i < 3; ++i) {
        const long double a = v[static_cast<std::size_t>(7 + i)];
        const long double A = v[static_cast<std::size_t>(10 + i)];
        const long double B = v[static_cast<std::size_t>(13 + i)];
        const long double D = v[static_cast<std::size_t>(16 + i)];
        const long double term = a * oracle::bessel_k_quadrature(1, a) * (km * A + kf * B + kv) * D;
        flux += term;
        scale += std::abs(term);
    }
    CHECK(std::abs(double(flux - 1 / u)) <= 1e-9 * double(std::max(scale, 1 / u)));

    SUBCASE("u grid from the configuration")
    {
        const auto c2 = dir.write("l2.ini", std::string(kModel) + "[laplace]\nu_min = 1e-2\nu_max = 1e2\npoints_per_decade = 1\n");
        const Run g = run({"laplace", "--config", c2.string(), "--quiet"});
        CHECK(g.code == 0);
        CHECK(std::count(g.out.begin(), g.out.end(), '\n') == 6);
    }
    CHECK(run({"laplace", "--config", cfg.string(), "--u", "1,0"}).code == 1);
    CHECK(run({"laplace", "--config", cfg.string(), "--u", "-3"}).code == 1);
    CHECK(run({"laplace", "--config", cfg.string()}).code == 1);
}

TEST_CASE("dimensionless")
{
    TempDir dir;
    const auto cfg = dir.write("p.ini", kPhysical);
    const Run r = run({"dimensionless", "--config", cfg.string(), "--quiet"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("omega_f = 0.3333333333333333\n") != std::string::npos);
    const auto kv = r.out.find("kappa_v = ");
    REQUIRE(kv != std::string::npos);
    CHECK(std::stod(r.out.substr(kv + 10)) == doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK(r.out.find("omega_m = 0.3333333333333333\n") != std::string::npos);
    CHECK(r.out.find("lambda_mf = 0.0\n") != std::string::npos);

    SUBCASE("printed groups reproduce the physical run")
    {
        const std::string grid = "[grid]\nt_min = 1\nt_max = 1e3\npoints_per_decade = 5\n";
        const auto phys = dir.write("phys.ini", std::string(kPhysical) + "a_extra_never_used = 0\n");
        CHECK(run({"curve", "--config", phys.string()}).code == 1);  // unknown key guard

        const auto physical = dir.write("physical.ini", replace(kPhysical, "a_mf = 0", "a_mf = 1e-9") + grid);
        const Run d = run({"dimensionless", "--config", physical.string(), "--quiet"});
        REQUIRE(d.code == 0);
        const auto model = dir.write("model.ini", d.out + grid);
        const auto out1 = dir.path() / "from_physical.csv";
        const auto out2 = dir.path() / "from_model.csv";
        CHECK(run({"curve", "--config", physical.string(), "--out", out1.string(), "--quiet"}).code == 0);
        CHECK(run({"curve", "--config", model.string(), "--out", out2.string(), "--quiet"}).code == 0);
        CHECK(slurp(out1) == slurp(out2));
    }

    const auto zero = dir.write("z.ini", replace(replace(replace(kPhysical, "k_m = 2e-14", "k_m = 0"), "k_f = 2e-14", "k_f = 0"),
                                                 "k_v = 2e-14", "k_v = 0"));
    CHECK(run({"dimensionless", "--config", zero.string()}).code == 1);
    CHECK(run({"dimensionless", "--config", dir.write("m.ini", kModel).string()}).code == 1);
}

TEST_CASE("identical configuration gives byte-identical output")
{
    TempDir dir;
    const auto cfg = dir.write("d.ini", std::string(kModel) + "[inversion]\nthreads = 3\n");
    const auto a = dir.path() / "a.csv";
    const auto b = dir.path() / "b.csv";
    CHECK(run({"curve", "--config", cfg.string(), "--out", a.string(), "--quiet"}).code == 0);
    CHECK(run({"curve", "--config", cfg.string(), "--out", b.string(), "--quiet"}).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(!slurp(a).empty());
}
