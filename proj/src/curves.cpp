#include "fracflow/curves.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fracflow {

std::vector<double> log_time_grid(double t_min, double t_max, int points_per_decade)
{
    if (!(t_min > 0.0) || !std::isfinite(t_min) || !std::isfinite(t_max)) {
        throw std::domain_error("log_time_grid: t_min must be positive and finite");
    }
    if (!(t_max > t_min)) {
        throw std::domain_error("log_time_grid: t_max must exceed t_min");
    }
    if (points_per_decade < 1) {
        throw std::domain_error("log_time_grid: points_per_decade must be >= 1");
    }
    const double lo = std::log10(t_min);
    const double hi = std::log10(t_max);
    const auto intervals = static_cast<int>(std::ceil((hi - lo) * points_per_decade - 1e-9));
    std::vector<double> grid(static_cast<std::size_t>(intervals) + 1);
    for (int i = 0; i <= intervals; ++i) {
        // i / intervals first, so that refined grids reproduce shared nodes bitwise.
        const double frac = static_cast<double>(i) / static_cast<double>(intervals);
        grid[static_cast<std::size_t>(i)] = std::pow(10.0, lo + (hi - lo) * frac);
    }
    grid.front() = t_min;
    grid.back() = t_max;
    return grid;
}

BourdetDerivative bourdet_derivative(std::span<const double> t, std::span<const double> p, double smoothing_L)
{
    if (t.size() != p.size()) {
        throw std::invalid_argument("bourdet_derivative: time and value arrays differ in length");
    }
    if (t.size() < 3) {
        throw std::invalid_argument("bourdet_derivative: need at least three points");
    }
    if (!(smoothing_L >= 0.0)) {
        throw std::invalid_argument("bourdet_derivative: smoothing window must be >= 0");
    }
    const std::size_t n = t.size();
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(t[i] > 0.0) || (i > 0 && !(t[i] > t[i - 1]))) {
            throw std::invalid_argument("bourdet_derivative: time grid must be positive and strictly increasing");
        }
        x[i] = std::log(t[i]);
    }

    BourdetDerivative out;
    out.value.resize(n);
    out.one_sided.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        // Nearest neighbours at log distance >= L, else the grid ends.
        std::size_t left = i;
        while (left > 0) {
            --left;
            if (x[i] - x[left] >= smoothing_L) {
                break;
            }
        }
        std::size_t right = i;
        while (right + 1 < n) {
            ++right;
            if (x[right] - x[i] >= smoothing_L) {
                break;
            }
        }
        if (left == i) {
            out.value[i] = (p[right] - p[i]) / (x[right] - x[i]);
            out.one_sided[i] = true;
        } else if (right == i) {
            out.value[i] = (p[i] - p[left]) / (x[i] - x[left]);
            out.one_sided[i] = true;
        } else {
            const double dxl = x[i] - x[left];
            const double dxr = x[right] - x[i];
            const double dpl = p[i] - p[left];
            const double dpr = p[right] - p[i];
            out.value[i] = (dpl * dxr / dxl + dpr * dxl / dxr) / (dxl + dxr);
        }
    }
    return out;
}

std::vector<CurvePoint> pressure_curve(const TriplePorosityParams<double>& params, std::span<const double> grid,
                                       const StehfestScheme<double>& scheme, double smoothing_L, unsigned threads)
{
    params.validate();
    const auto transform = [&params](double u) { return wellbore_pressure_laplace(params, u); };
    const std::vector<double> pw = invert_curve(transform, grid, scheme, threads);

    std::vector<CurvePoint> points(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        points[i].t_D = grid[i];
        points[i].p_w = pw[i];
    }
    if (grid.size() >= 3) {
        const auto d = bourdet_derivative(grid, pw, smoothing_L);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            points[i].dp_dlnt = d.value[i];
        }
    }
    return points;
}

CurveFormat parse_curve_format(const std::string& name)
{
    if (name == "csv") {
        return CurveFormat::csv;
    }
    if (name == "json") {
        return CurveFormat::json;
    }
    throw std::invalid_argument("unknown output format '" + name + "' (expected csv or json)");
}

std::string format_number(double value)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    std::string s(buf, res.ptr);
    if (std::isfinite(value) && s.find_first_of(".e") == std::string::npos) {
        s += ".0";
    }
    return s;
}

void write_curve(const std::vector<CurvePoint>& points, CurveFormat format, std::ostream& out)
{
    if (points.empty()) {
        throw std::invalid_argument("write_curve: no points to write");
    }
    if (format == CurveFormat::csv) {
        out << "t_D,p_w,dp_w_dlnt\n";
        for (const auto& pt : points) {
            out << format_number(pt.t_D) << ',' << format_number(pt.p_w) << ',';
            if (pt.dp_dlnt) {
                out << format_number(*pt.dp_dlnt);
            }
            out << '\n';
        }
        return;
    }
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& pt : points) {
        nlohmann::json row;
        row["t_D"] = pt.t_D;
        row["p_w"] = pt.p_w;
        row["dp_w_dlnt"] = pt.dp_dlnt ? nlohmann::json(*pt.dp_dlnt) : nlohmann::json(nullptr);
        doc.push_back(std::move(row));
    }
    out << doc.dump() << '\n';
}

void write_curve(const std::vector<CurvePoint>& points, CurveFormat format, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    write_curve(points, format, out);
    out.flush();
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

namespace {

double parse_double(std::string_view text)
{
    double v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw std::invalid_argument("read_curve: malformed number '" + std::string(text) + "'");
    }
    return v;
}

}  // namespace

std::vector<CurvePoint> read_curve(std::istream& in, CurveFormat format)
{
    std::vector<CurvePoint> points;
    if (format == CurveFormat::json) {
        const auto doc = nlohmann::json::parse(in);
        for (const auto& row : doc) {
            CurvePoint pt;
            pt.t_D = row.at("t_D").get<double>();
            pt.p_w = row.at("p_w").get<double>();
            if (!row.at("dp_w_dlnt").is_null()) {
                pt.dp_dlnt = row.at("dp_w_dlnt").get<double>();
            }
            points.push_back(pt);
        }
        return points;
    }
    std::string line;
    if (!std::getline(in, line) || line != "t_D,p_w,dp_w_dlnt") {
        throw std::invalid_argument("read_curve: missing CSV header");
    }
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) {
            throw std::invalid_argument("read_curve: expected three fields in '" + line + "'");
        }
        const std::string_view view(line);
        CurvePoint pt;
        pt.t_D = parse_double(view.substr(0, c1));
        pt.p_w = parse_double(view.substr(c1 + 1, c2 - c1 - 1));
        if (c2 + 1 < line.size()) {
            pt.dp_dlnt = parse_double(view.substr(c2 + 1));
        }
        points.push_back(pt);
    }
    return points;
}

}  // namespace fracflow
