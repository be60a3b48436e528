#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "pullin/fieldexpr.hpp"
#include "pullin/grid.hpp"

namespace pullin {

/// Config/usage failure; carries the offending key path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& key, const std::string& message)
        : std::runtime_error(key + ": " + message), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Fully validated run configuration with every default materialized.
struct Config {
    GridKind grid_kind = GridKind::Interval;
    int dimension = 1;
    int nodes = 129;
    std::vector<AxisBounds> bounds;

    std::vector<std::string> advection;  // one expression per component

    double lambda_step0 = 0.1;
    double newton_tol = 1e-10;
    double bracket_tol = 1e-6;
    double lambda = 1.0;
    int eta_grid = 100;

    double eig_tol = 1e-8;

    std::vector<double> beta{1.25, 1.5, 1.75};
    std::vector<double> t_fractions{0.5, 0.9, 0.99};
    int psi_count = 50;
    std::uint64_t seed = 42;

    std::filesystem::path output_directory = "out";
    bool write_csv = true;
    bool write_json = true;

    /// The resolved document (defaults included, keys sorted) and its hash.
    nlohmann::json resolved() const;
    std::string hash() const;

    Grid make_grid() const;
    std::vector<Expr> advection_expressions() const;
    VectorField make_advection(const Grid& grid) const;
};

/// Parses and validates a config document; unknown keys are errors and every
/// violated precondition names its key path.
Config parse_config(const nlohmann::json& doc);

/// Loads from disk, applies dotted-path overrides ("solver.lambda=2.5"),
/// then parses.
Config load_config(const std::filesystem::path& path,
                   const std::vector<std::string>& overrides = {});

nlohmann::json apply_override(nlohmann::json doc, const std::string& assignment);

}  // namespace pullin
