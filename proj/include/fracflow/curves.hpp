#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracflow/model.hpp"
#include "fracflow/stehfest.hpp"

namespace fracflow {

struct CurvePoint {
    double t_D{};
    double p_w{};
    std::optional<double> dp_dlnt;  // Bourdet derivative dp_w / d ln t_D

    bool operator==(const CurvePoint&) const = default;
};

/// Log-uniform grid from t_min to t_max (both included) with at least
/// points_per_decade points per decade.
std::vector<double> log_time_grid(double t_min, double t_max, int points_per_decade);

struct BourdetDerivative {
    std::vector<double> value;
    std::vector<bool> one_sided;  // endpoint estimates (lower quality)
};

/// Weighted central difference in ln t. Neighbours are the nearest points at
/// log-distance >= smoothing_L (adjacent points for L = 0).
BourdetDerivative bourdet_derivative(std::span<const double> t, std::span<const double> p, double smoothing_L = 0.0);

/// Wellbore pressure p_w(t_D) by Stehfest inversion at every grid point, with
/// its Bourdet derivative (absent for grids shorter than three points).
std::vector<CurvePoint> pressure_curve(const TriplePorosityParams<double>& params, std::span<const double> grid,
                                       const StehfestScheme<double>& scheme, double smoothing_L = 0.0,
                                       unsigned threads = 1);

enum class CurveFormat { csv, json };

CurveFormat parse_curve_format(const std::string& name);

/// Shortest decimal that parses back to the same double; integral values
/// keep a trailing ".0".
std::string format_number(double value);

void write_curve(const std::vector<CurvePoint>& points, CurveFormat format, std::ostream& out);
void write_curve(const std::vector<CurvePoint>& points, CurveFormat format, const std::filesystem::path& path);

std::vector<CurvePoint> read_curve(std::istream& in, CurveFormat format);

}  // namespace fracflow
