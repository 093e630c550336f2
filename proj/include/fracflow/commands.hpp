#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fracflow/config.hpp"

namespace fracflow {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitModel = 2,
    kExitIo = 3,
};

/// Command-line overrides shared by every subcommand.
struct CliOptions {
    std::filesystem::path config;
    std::optional<std::filesystem::path> out;
    std::optional<std::string> format;
    std::optional<int> stehfest_n;
    std::vector<double> u;  // laplace only; overrides [laplace]
    bool quiet = false;
};

/// Config file plus overrides. Throws ConfigError.
RunConfig resolve_config(const CliOptions& opts);

// Each command writes data to `path` from the config (or `out` when no path
// is set) and a one-line summary to `err`, and returns an ExitCode.
int cmd_curve(const CliOptions& opts, std::ostream& out, std::ostream& err);
int cmd_sweep(const CliOptions& opts, std::ostream& out, std::ostream& err);
int cmd_laplace(const CliOptions& opts, std::ostream& out, std::ostream& err);
int cmd_dimensionless(const CliOptions& opts, std::ostream& out, std::ostream& err);

/// Output filename of one sweep member: <stem>_bm{..}_bf{..}_bv{..}<ext>.
std::filesystem::path sweep_member_path(const std::filesystem::path& base, const OrderTriple& orders);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fracflow
