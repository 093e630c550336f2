#include "fracflow/commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "fracflow/errors.hpp"

namespace fracflow {

namespace {

// Message of `e` followed by any nested causes.
std::string describe(const std::exception& e)
{
    std::string msg = e.what();
    try {
        std::rethrow_if_nested(e);
    } catch (const std::exception& inner) {
        msg += ": " + describe(inner);
    } catch (...) {
        msg += ": unknown error";
    }
    return msg;
}

int guarded(std::ostream& err, const std::function<int()>& body)
{
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << describe(e) << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        err << "i/o error: " << describe(e) << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        err << "model error: " << describe(e) << '\n';
        return kExitModel;
    }
}

// Shortest round-trip form without a forced ".0" (for filenames).
std::string compact_number(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

private:
    using Clock = std::chrono::steady_clock;
    Clock::time_point start_ = Clock::now();
};

std::vector<CurvePoint> compute_curve(const RunConfig& cfg, const TriplePorosityParams<double>& params)
{
    const auto grid = log_time_grid(cfg.grid.t_min, cfg.grid.t_max, cfg.grid.points_per_decade);
    const StehfestScheme<double> scheme(cfg.stehfest_n);
    return pressure_curve(params, grid, scheme, cfg.output.derivative_smoothing, cfg.threads);
}

// Writes to the configured path, or to `out` when none is set.
void emit(const RunConfig& cfg, const std::function<void(std::ostream&)>& writer, std::ostream& out)
{
    if (cfg.output.path.empty()) {
        writer(out);
        return;
    }
    std::ofstream file(cfg.output.path, std::ios::binary);
    if (!file) {
        throw IoError("cannot open '" + cfg.output.path.string() + "' for writing");
    }
    writer(file);
    file.flush();
    if (!file) {
        throw IoError("failed writing '" + cfg.output.path.string() + "'");
    }
}

std::string destination(const RunConfig& cfg)
{
    return cfg.output.path.empty() ? std::string("<stdout>") : cfg.output.path.string();
}

}  // namespace

RunConfig resolve_config(const CliOptions& opts)
{
    RunConfig cfg = load_config(opts.config);
    if (opts.out) {
        cfg.output.path = *opts.out;
    }
    if (opts.format) {
        try {
            cfg.output.format = parse_curve_format(*opts.format);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("--format: ") + e.what());
        }
    }
    if (opts.stehfest_n) {
        const int n = *opts.stehfest_n;
        if (n < 2 || n > kMaxStehfestOrder || n % 2 != 0) {
            throw ConfigError("--stehfest-n: must be even and within [2, 20], got " + std::to_string(n));
        }
        cfg.stehfest_n = n;
    }
    if (!opts.u.empty()) {
        cfg.laplace_u = opts.u;
    }
    return cfg;
}

std::filesystem::path sweep_member_path(const std::filesystem::path& base, const OrderTriple& orders)
{
    std::filesystem::path out = base.parent_path();
    out /= base.stem().string() + "_bm" + compact_number(orders[0]) + "_bf" + compact_number(orders[1]) + "_bv" +
           compact_number(orders[2]) + base.extension().string();
    return out;
}

int cmd_curve(const CliOptions& opts, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const RunConfig cfg = resolve_config(opts);
        const auto params = cfg.resolved_params();
        const Stopwatch clock;
        const auto points = compute_curve(cfg, params);
        emit(cfg, [&](std::ostream& s) { write_curve(points, cfg.output.format, s); }, out);
        if (!opts.quiet) {
            err << "curve: " << points.size() << " points, stehfest n = " << cfg.stehfest_n << ", "
                << clock.seconds() << " s -> " << destination(cfg) << '\n';
        }
        return int(kExitOk);
    });
}

int cmd_sweep(const CliOptions& opts, std::ostream& /*out*/, std::ostream& err)
{
    return guarded(err, [&] {
        const RunConfig cfg = resolve_config(opts);
        if (cfg.sweep.empty()) {
            throw ConfigError("sweep: missing key 'triples' in [sweep]");
        }
        std::vector<OrderTriple> triples = cfg.sweep;
        const OrderTriple classic{1.0, 1.0, 1.0};
        if (std::find(triples.begin(), triples.end(), classic) == triples.end()) {
            triples.push_back(classic);
        }
        const std::filesystem::path base =
            cfg.output.path.empty() ? std::filesystem::path(cfg.output.format == CurveFormat::json ? "curve.json"
                                                                                                  : "curve.csv")
                                    : cfg.output.path;
        const auto base_params = cfg.resolved_params();

        int status = kExitOk;
        std::size_t written = 0;
        const Stopwatch clock;
        for (const auto& orders : triples) {
            auto params = base_params;
            params.beta_m = orders[0];
            params.beta_f = orders[1];
            params.beta_v = orders[2];
            const auto path = sweep_member_path(base, orders);
            const std::string label = "(" + compact_number(orders[0]) + ", " + compact_number(orders[1]) + ", " +
                                      compact_number(orders[2]) + ")";
            std::vector<CurvePoint> points;
            try {
                params.validate();
                points = compute_curve(cfg, params);
            } catch (const std::exception& e) {
                err << "sweep: skipping triple " << label << ": " << describe(e) << '\n';
                status = kExitModel;
                continue;
            }
            write_curve(points, cfg.output.format, path);
            ++written;
            if (!opts.quiet) {
                err << "sweep: " << label << " " << points.size() << " points -> " << path.string() << '\n';
            }
        }
        if (!opts.quiet) {
            err << "sweep: " << written << " of " << triples.size() << " curves written, stehfest n = "
                << cfg.stehfest_n << ", " << clock.seconds() << " s\n";
        }
        return status;
    });
}

int cmd_laplace(const CliOptions& opts, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const RunConfig cfg = resolve_config(opts);
        if (cfg.laplace_u.empty()) {
            throw ConfigError("laplace: no u values (give --u or a [laplace] section)");
        }
        for (const double u : cfg.laplace_u) {
            if (!(u > 0) || !std::isfinite(u)) {
                throw ConfigError("laplace: u values must be positive and finite, got " + format_number(u));
            }
        }
        const auto params = cfg.resolved_params();

        // Columns use the vug-normalised convention (C = 1); D follows suit.
        std::ostringstream body;
        body << "u,m1,m2,m3,m4,m5,m6,alpha1,alpha2,alpha3,A1,A2,A3,B1,B2,B3,D1,D2,D3,pw_bar\n";
        for (const double u : cfg.laplace_u) {
            const auto s = assemble(params, u);
            if (!(s.triple_equality_residual <= kTripleEqualityTolerance)) {
                throw ConsistencyError("media pressures disagree at the wellbore at u = " + format_number(u));
            }
            const auto& m = s.mterms;
            body << format_number(u);
            for (const double v : {m.m1, m.m2, m.m3, m.m4, m.m5, m.m6}) {
                body << ',' << format_number(v);
            }
            for (const double a : s.alpha.alpha) {
                body << ',' << format_number(a);
            }
            // C_i is exactly 1 unless the mode has no vug component; such
            // modes are printed as unit vectors rather than divided by zero.
            for (int i = 0; i < 3; ++i) {
                body << ',' << format_number(s.A(i));
            }
            for (int i = 0; i < 3; ++i) {
                body << ',' << format_number(s.B(i));
            }
            for (int i = 0; i < 3; ++i) {
                body << ',' << format_number(s.D(i));
            }
            body << ',' << format_number(s.pw) << '\n';
        }
        emit(cfg, [&](std::ostream& o) { o << body.str(); }, out);
        if (!opts.quiet) {
            err << "laplace: " << cfg.laplace_u.size() << " rows -> " << destination(cfg) << '\n';
        }
        return int(kExitOk);
    });
}

int cmd_dimensionless(const CliOptions& opts, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const RunConfig cfg = resolve_config(opts);
        if (!cfg.physical) {
            throw ConfigError("dimensionless: requires a [physical] section");
        }
        DimensionlessGroups<double> g;
        try {
            g = to_dimensionless(*cfg.physical);
        } catch (const std::domain_error& e) {
            throw ConfigError(std::string("[physical]: ") + e.what());
        }
        const auto& b = cfg.physical_orders;
        std::ostringstream doc;
        doc << "[model]\n"
            << "omega_f = " << format_number(g.omega_f) << '\n'
            << "omega_v = " << format_number(g.omega_v) << '\n'
            << "kappa_f = " << format_number(g.kappa_f) << '\n'
            << "kappa_v = " << format_number(g.kappa_v) << '\n'
            << "lambda_mf = " << format_number(g.lambda_mf) << '\n'
            << "lambda_mv = " << format_number(g.lambda_mv) << '\n'
            << "lambda_fv = " << format_number(g.lambda_fv) << '\n'
            << "beta_m = " << format_number(b[0]) << '\n'
            << "beta_f = " << format_number(b[1]) << '\n'
            << "beta_v = " << format_number(b[2]) << '\n'
            << "\n[scales]\n"
            << "omega_m = " << format_number(g.omega_m) << '\n'
            << "kappa_m = " << format_number(g.kappa_m) << '\n'
            << "time_scale = " << format_number(g.scales.time_scale) << '\n'
            << "pressure_scale = " << format_number(g.scales.pressure_scale) << '\n';
        emit(cfg, [&](std::ostream& o) { o << doc.str(); }, out);
        if (!opts.quiet) {
            err << "dimensionless: groups -> " << destination(cfg) << '\n';
        }
        return int(kExitOk);
    });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Wellbore pressure of triple-porosity fractional-flow reservoirs"};
    app.require_subcommand(1);

    CliOptions opts;
    std::string format;
    int stehfest_n = 0;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config, "configuration file")->required();
        sub->add_option("--out", opts.out, "output path (overrides [output] path)");
        sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--stehfest-n", stehfest_n, "even Stehfest order in [2, 20]");
        sub->add_flag("--quiet", opts.quiet, "suppress the summary on standard error");
    };
    auto* curve = app.add_subcommand("curve", "pressure and derivative curve for one parameter set");
    auto* sweep = app.add_subcommand("sweep", "one curve per fractional-order triple (plus the classic case)");
    auto* laplace = app.add_subcommand("laplace", "Laplace-space solution details at given u");
    auto* dimless = app.add_subcommand("dimensionless", "dimensionless groups from a [physical] block");
    for (auto* sub : {curve, sweep, laplace, dimless}) {
        add_common(sub);
    }
    laplace->add_option("--u", opts.u, "Laplace variable values")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitConfig;
    }
    for (auto* sub : {curve, sweep, laplace, dimless}) {
        if (sub->get_option("--format")->count() > 0) {
            opts.format = format;
        }
        if (sub->get_option("--stehfest-n")->count() > 0) {
            opts.stehfest_n = stehfest_n;
        }
    }

    if (*curve) {
        return cmd_curve(opts, out, err);
    }
    if (*sweep) {
        return cmd_sweep(opts, out, err);
    }
    if (*laplace) {
        return cmd_laplace(opts, out, err);
    }
    return cmd_dimensionless(opts, out, err);
}

}  // namespace fracflow
