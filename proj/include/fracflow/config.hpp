#pragma once

// Run configuration: an INI-style document with sections
//
//   [model]      omega_f omega_v kappa_f kappa_v lambda_mf lambda_mv lambda_fv beta_m beta_f beta_v
//   [physical]   phi_* c_* k_* mu a_* r_w h Q0 B0 p_i beta_*   (alternative to [model])
//   [grid]       t_min t_max points_per_decade
//   [inversion]  stehfest_n threads
//   [output]     path format derivative_smoothing
//   [sweep]      triples = bm,bf,bv; bm,bf,bv; ...
//   [laplace]    u = u1, u2, ...   or   u_min u_max points_per_decade
//   [scales]     informational, ignored

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fracflow/curves.hpp"
#include "fracflow/model.hpp"

namespace fracflow {

struct GridSpec {
    double t_min = 1e-2;
    double t_max = 1e8;
    int points_per_decade = 10;
};

struct OutputSpec {
    std::filesystem::path path;  // empty: not given
    CurveFormat format = CurveFormat::csv;
    double derivative_smoothing = 0.0;
};

using OrderTriple = std::array<double, 3>;  // (beta_m, beta_f, beta_v)

struct RunConfig {
    std::optional<TriplePorosityParams<double>> model;
    std::optional<PhysicalParams<double>> physical;
    OrderTriple physical_orders{1.0, 1.0, 1.0};
    GridSpec grid;
    int stehfest_n = kDefaultStehfestOrder;
    unsigned threads = 1;
    std::vector<OrderTriple> sweep;
    std::vector<double> laplace_u;
    OutputSpec output;

    /// Dimensionless parameters from whichever block is present.
    TriplePorosityParams<double> resolved_params() const;
};

/// Throws ConfigError naming the offending section/key.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace fracflow
