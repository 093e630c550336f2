#include "fracflow/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "fracflow/errors.hpp"

namespace fracflow {

namespace {

using boost::property_tree::ptree;

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

double to_number(const std::string& text, const std::string& where)
{
    double v = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') {
        ++first;
    }
    const auto res = std::from_chars(first, last, v);
    if (text.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
        throw ConfigError(where + ": expected a finite number, got '" + text + "'");
    }
    return v;
}

// One section with key bookkeeping so unknown keys are reported.
class Section {
public:
    Section(std::string name, const ptree& tree) : name_(std::move(name)), tree_(tree) {}

    bool has(const std::string& key) const { return tree_.find(key) != tree_.not_found(); }

    std::string text(const std::string& key)
    {
        used_.insert(key);
        const auto it = tree_.find(key);
        if (it == tree_.not_found()) {
            throw ConfigError("missing key '" + key + "' in [" + name_ + "]");
        }
        return trim(it->second.data());
    }

    double number(const std::string& key) { return to_number(text(key), where(key)); }

    double number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    int integer_or(const std::string& key, int fallback)
    {
        if (!has(key)) {
            return fallback;
        }
        const double v = number(key);
        if (v != std::floor(v) || std::abs(v) > 1e9) {
            throw ConfigError(where(key) + ": expected an integer");
        }
        return static_cast<int>(v);
    }

    std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }

    void reject_unknown() const
    {
        for (const auto& [key, value] : tree_) {
            if (!used_.count(key)) {
                throw ConfigError("unknown key '" + key + "' in [" + name_ + "]");
            }
        }
    }

private:
    std::string name_;
    const ptree& tree_;
    std::set<std::string> used_;
};

TriplePorosityParams<double> parse_model(Section s)
{
    TriplePorosityParams<double> p;
    p.omega_f = s.number("omega_f");
    p.omega_v = s.number("omega_v");
    p.kappa_f = s.number("kappa_f");
    p.kappa_v = s.number("kappa_v");
    p.lambda_mf = s.number("lambda_mf");
    p.lambda_mv = s.number("lambda_mv");
    p.lambda_fv = s.number("lambda_fv");
    p.beta_m = s.number_or("beta_m", 1.0);
    p.beta_f = s.number_or("beta_f", 1.0);
    p.beta_v = s.number_or("beta_v", 1.0);
    s.reject_unknown();
    try {
        p.validate();
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("invalid [model]: ") + e.what());
    }
    return p;
}

PhysicalParams<double> parse_physical(Section s, OrderTriple& orders)
{
    PhysicalParams<double> p;
    p.phi_m = s.number("phi_m");
    p.phi_f = s.number("phi_f");
    p.phi_v = s.number("phi_v");
    p.c_m = s.number("c_m");
    p.c_f = s.number("c_f");
    p.c_v = s.number("c_v");
    p.k_m = s.number("k_m");
    p.k_f = s.number("k_f");
    p.k_v = s.number("k_v");
    p.mu = s.number("mu");
    p.a_mf = s.number("a_mf");
    p.a_mv = s.number("a_mv");
    p.a_fv = s.number("a_fv");
    p.r_w = s.number("r_w");
    p.h = s.number("h");
    p.Q0 = s.number("Q0");
    p.B0 = s.number("B0");
    p.p_i = s.number("p_i");
    orders = {s.number_or("beta_m", 1.0), s.number_or("beta_f", 1.0), s.number_or("beta_v", 1.0)};
    s.reject_unknown();
    try {
        p.validate();
        to_dimensionless(p).with_orders(orders[0], orders[1], orders[2]).validate();
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("invalid [physical]: ") + e.what());
    }
    return p;
}

std::vector<OrderTriple> parse_triples(const std::string& text, const std::string& where)
{
    std::vector<OrderTriple> out;
    for (const auto& item : split(text, ';')) {
        if (item.empty()) {
            continue;
        }
        const auto parts = split(item, ',');
        if (parts.size() != 3) {
            throw ConfigError(where + ": each triple needs three comma-separated orders, got '" + item + "'");
        }
        out.push_back({to_number(parts[0], where), to_number(parts[1], where), to_number(parts[2], where)});
    }
    if (out.empty()) {
        throw ConfigError(where + ": no triples given");
    }
    return out;
}

}  // namespace

TriplePorosityParams<double> RunConfig::resolved_params() const
{
    if (model) {
        return *model;
    }
    if (physical) {
        return to_dimensionless(*physical).with_orders(physical_orders[0], physical_orders[1], physical_orders[2]);
    }
    throw ConfigError("no [model] or [physical] block present");
}

RunConfig parse_config(std::istream& in)
{
    ptree tree;
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("malformed configuration: ") + e.what());
    }

    static const std::set<std::string> known{"model", "physical", "grid", "inversion", "output", "sweep", "laplace",
                                             "scales"};
    for (const auto& [name, section] : tree) {
        if (section.empty() && !section.data().empty()) {
            throw ConfigError("key '" + name + "' appears outside any section");
        }
        if (!known.count(name)) {
            throw ConfigError("unknown section [" + name + "]");
        }
    }
    auto section = [&tree](const std::string& name) -> std::optional<Section> {
        const auto it = tree.find(name);
        if (it == tree.not_found()) {
            return std::nullopt;
        }
        return Section(name, it->second);
    };

    RunConfig cfg;
    auto model = section("model");
    auto physical = section("physical");
    if (model && physical) {
        throw ConfigError("[model] and [physical] are mutually exclusive");
    }
    if (!model && !physical) {
        throw ConfigError("one of [model] or [physical] is required");
    }
    if (model) {
        cfg.model = parse_model(*model);
    } else {
        cfg.physical = parse_physical(*physical, cfg.physical_orders);
    }

    if (auto s = section("grid")) {
        cfg.grid.t_min = s->number_or("t_min", cfg.grid.t_min);
        cfg.grid.t_max = s->number_or("t_max", cfg.grid.t_max);
        cfg.grid.points_per_decade = s->integer_or("points_per_decade", cfg.grid.points_per_decade);
        s->reject_unknown();
    }
    if (!(cfg.grid.t_min > 0) || !(cfg.grid.t_max > cfg.grid.t_min) || cfg.grid.points_per_decade < 1) {
        throw ConfigError("[grid]: need 0 < t_min < t_max and points_per_decade >= 1");
    }

    if (auto s = section("inversion")) {
        cfg.stehfest_n = s->integer_or("stehfest_n", cfg.stehfest_n);
        const int threads = s->integer_or("threads", 1);
        if (threads < 1) {
            throw ConfigError("[inversion] threads: must be >= 1");
        }
        cfg.threads = static_cast<unsigned>(threads);
        s->reject_unknown();
    }
    if (cfg.stehfest_n < 2 || cfg.stehfest_n > kMaxStehfestOrder || cfg.stehfest_n % 2 != 0) {
        throw ConfigError("[inversion] stehfest_n: must be even and within [2, 20]");
    }

    if (auto s = section("output")) {
        if (s->has("path")) {
            cfg.output.path = s->text("path");
        }
        if (s->has("format")) {
            try {
                cfg.output.format = parse_curve_format(s->text("format"));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("[output] format: ") + e.what());
            }
        }
        cfg.output.derivative_smoothing = s->number_or("derivative_smoothing", 0.0);
        if (cfg.output.derivative_smoothing < 0) {
            throw ConfigError("[output] derivative_smoothing: must be >= 0");
        }
        s->reject_unknown();
    }

    if (auto s = section("sweep")) {
        cfg.sweep = parse_triples(s->text("triples"), s->where("triples"));
        s->reject_unknown();
    }

    if (auto s = section("laplace")) {
        if (s->has("u")) {
            for (const auto& item : split(s->text("u"), ',')) {
                cfg.laplace_u.push_back(to_number(item, s->where("u")));
            }
        } else {
            const double lo = s->number("u_min");
            const double hi = s->number("u_max");
            const int ppd = s->integer_or("points_per_decade", 1);
            if (!(lo > 0) || !(hi > lo) || ppd < 1) {
                throw ConfigError("[laplace]: need 0 < u_min < u_max and points_per_decade >= 1");
            }
            cfg.laplace_u = log_time_grid(lo, hi, ppd);
        }
        s->reject_unknown();
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read configuration '" + path.string() + "'");
    }
    return parse_config(in);
}

}  // namespace fracflow
