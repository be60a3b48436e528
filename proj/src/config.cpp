#include "pullin/config.hpp"

#include <fstream>
#include <set>

#include "pullin/artifacts.hpp"

namespace pullin {

namespace {

using nlohmann::json;

void check_known_keys(const json& obj, const std::string& path,
                      const std::set<std::string>& known) {
    for (const auto& [key, value] : obj.items()) {
        if (!known.count(key)) {
            throw ConfigError(path.empty() ? key : path + "." + key, "unknown key");
        }
    }
}

double require_number(const json& obj, const std::string& path) {
    if (!obj.is_number()) throw ConfigError(path, "expected a number");
    return obj.get<double>();
}

int require_int(const json& obj, const std::string& path) {
    if (!obj.is_number_integer()) throw ConfigError(path, "expected an integer");
    return obj.get<int>();
}

}  // namespace

Config parse_config(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
    check_known_keys(doc, "", {"grid", "advection", "solver", "spectral", "verify", "output"});

    Config cfg;

    if (!doc.contains("grid")) throw ConfigError("grid", "missing section");
    {
        const json& grid = doc.at("grid");
        if (!grid.is_object()) throw ConfigError("grid", "expected an object");
        check_known_keys(grid, "grid", {"kind", "N", "m", "bounds"});
        if (!grid.contains("kind")) throw ConfigError("grid.kind", "missing");
        const std::string kind = grid.at("kind").is_string()
                                     ? grid.at("kind").get<std::string>()
                                     : throw ConfigError("grid.kind", "expected a string");
        if (kind == "interval") {
            cfg.grid_kind = GridKind::Interval;
        } else if (kind == "radial-ball") {
            cfg.grid_kind = GridKind::RadialBall;
        } else if (kind == "tensor-rectangle") {
            cfg.grid_kind = GridKind::TensorRectangle;
        } else {
            throw ConfigError("grid.kind",
                              "must be interval, radial-ball, or tensor-rectangle");
        }
        cfg.dimension = grid.contains("N") ? require_int(grid.at("N"), "grid.N") : 1;
        if (!grid.contains("m")) throw ConfigError("grid.m", "missing");
        cfg.nodes = require_int(grid.at("m"), "grid.m");
        if (grid.contains("bounds")) {
            const json& bounds = grid.at("bounds");
            if (!bounds.is_array()) throw ConfigError("grid.bounds", "expected an array");
            for (size_t i = 0; i < bounds.size(); ++i) {
                const json& pair = bounds[i];
                const std::string path = "grid.bounds[" + std::to_string(i) + "]";
                if (!pair.is_array() || pair.size() != 2) {
                    throw ConfigError(path, "expected [lo, hi]");
                }
                cfg.bounds.push_back(
                    {require_number(pair[0], path), require_number(pair[1], path)});
            }
        }
    }

    if (doc.contains("advection")) {
        const json& adv = doc.at("advection");
        if (!adv.is_object()) throw ConfigError("advection", "expected an object");
        check_known_keys(adv, "advection", {"components"});
        if (adv.contains("components")) {
            const json& comps = adv.at("components");
            if (!comps.is_array()) {
                throw ConfigError("advection.components", "expected an array");
            }
            for (size_t i = 0; i < comps.size(); ++i) {
                if (!comps[i].is_string()) {
                    throw ConfigError("advection.components[" + std::to_string(i) + "]",
                                      "expected an expression string");
                }
                cfg.advection.push_back(comps[i].get<std::string>());
            }
        }
    }

    if (doc.contains("solver")) {
        const json& solver = doc.at("solver");
        if (!solver.is_object()) throw ConfigError("solver", "expected an object");
        check_known_keys(solver, "solver",
                         {"lambda_step0", "newton_tol", "bracket_tol", "lambda", "eta_grid"});
        if (solver.contains("lambda_step0")) {
            cfg.lambda_step0 = require_number(solver.at("lambda_step0"), "solver.lambda_step0");
        }
        if (solver.contains("newton_tol")) {
            cfg.newton_tol = require_number(solver.at("newton_tol"), "solver.newton_tol");
        }
        if (solver.contains("bracket_tol")) {
            cfg.bracket_tol = require_number(solver.at("bracket_tol"), "solver.bracket_tol");
        }
        if (solver.contains("lambda")) {
            cfg.lambda = require_number(solver.at("lambda"), "solver.lambda");
        }
        if (solver.contains("eta_grid")) {
            cfg.eta_grid = require_int(solver.at("eta_grid"), "solver.eta_grid");
        }
    }

    if (doc.contains("spectral")) {
        const json& spectral = doc.at("spectral");
        if (!spectral.is_object()) throw ConfigError("spectral", "expected an object");
        check_known_keys(spectral, "spectral", {"eig_tol"});
        if (spectral.contains("eig_tol")) {
            cfg.eig_tol = require_number(spectral.at("eig_tol"), "spectral.eig_tol");
        }
    }

    if (doc.contains("verify")) {
        const json& verify = doc.at("verify");
        if (!verify.is_object()) throw ConfigError("verify", "expected an object");
        check_known_keys(verify, "verify", {"beta", "t_fractions", "psi_count", "seed"});
        if (verify.contains("beta")) {
            if (!verify.at("beta").is_array()) throw ConfigError("verify.beta", "expected an array");
            cfg.beta.clear();
            for (const auto& b : verify.at("beta")) {
                cfg.beta.push_back(require_number(b, "verify.beta"));
            }
        }
        if (verify.contains("t_fractions")) {
            if (!verify.at("t_fractions").is_array()) {
                throw ConfigError("verify.t_fractions", "expected an array");
            }
            cfg.t_fractions.clear();
            for (const auto& t : verify.at("t_fractions")) {
                cfg.t_fractions.push_back(require_number(t, "verify.t_fractions"));
            }
        }
        if (verify.contains("psi_count")) {
            cfg.psi_count = require_int(verify.at("psi_count"), "verify.psi_count");
        }
        if (verify.contains("seed")) {
            if (!verify.at("seed").is_number_integer()) {
                throw ConfigError("verify.seed", "expected an integer");
            }
            cfg.seed = verify.at("seed").get<std::uint64_t>();
        }
    }

    if (doc.contains("output")) {
        const json& output = doc.at("output");
        if (!output.is_object()) throw ConfigError("output", "expected an object");
        check_known_keys(output, "output", {"directory", "formats"});
        if (output.contains("directory")) {
            if (!output.at("directory").is_string()) {
                throw ConfigError("output.directory", "expected a string");
            }
            cfg.output_directory = output.at("directory").get<std::string>();
        }
        if (output.contains("formats")) {
            if (!output.at("formats").is_array()) {
                throw ConfigError("output.formats", "expected an array");
            }
            cfg.write_csv = false;
            cfg.write_json = false;
            for (const auto& fmt : output.at("formats")) {
                const std::string name = fmt.is_string()
                                             ? fmt.get<std::string>()
                                             : throw ConfigError("output.formats",
                                                                 "expected format strings");
                if (name == "csv") cfg.write_csv = true;
                else if (name == "json") cfg.write_json = true;
                else throw ConfigError("output.formats", "unknown format '" + name + "'");
            }
        }
    }

    // Validation against module preconditions, before any computation.
    if (cfg.dimension < 1 || cfg.dimension > 10) {
        throw ConfigError("grid.N", "must lie in [1, 10]");
    }
    switch (cfg.grid_kind) {
        case GridKind::Interval:
            if (cfg.dimension != 1) throw ConfigError("grid.N", "interval grids require N = 1");
            if (cfg.nodes < 3) throw ConfigError("grid.m", "interval grids need m >= 3");
            break;
        case GridKind::RadialBall:
            if (cfg.nodes < 3) throw ConfigError("grid.m", "radial grids need m >= 3");
            if (!cfg.bounds.empty() &&
                (cfg.bounds[0].lo != 0.0 || cfg.bounds[0].hi != 1.0)) {
                throw ConfigError("grid.bounds", "radial grids use the fixed radius 1");
            }
            break;
        case GridKind::TensorRectangle:
            if (cfg.dimension > 2) {
                throw ConfigError("grid.N", "tensor-rectangle grids require N <= 2");
            }
            if (cfg.nodes < 9 || cfg.nodes % 2 == 0) {
                throw ConfigError("grid.m", "tensor-rectangle axes need m >= 9 and odd");
            }
            break;
    }
    for (size_t i = 0; i < cfg.bounds.size(); ++i) {
        if (!(cfg.bounds[i].lo < cfg.bounds[i].hi)) {
            throw ConfigError("grid.bounds[" + std::to_string(i) + "]",
                              "bounds must be strictly increasing");
        }
    }

    const int axis_count =
        cfg.grid_kind == GridKind::TensorRectangle ? cfg.dimension : 1;
    if (cfg.advection.empty()) {
        cfg.advection.assign(static_cast<size_t>(axis_count), "0");
    }
    if (static_cast<int>(cfg.advection.size()) != axis_count) {
        throw ConfigError("advection.components",
                          "expected " + std::to_string(axis_count) + " component(s)");
    }
    for (size_t i = 0; i < cfg.advection.size(); ++i) {
        const std::string path = "advection.components[" + std::to_string(i) + "]";
        Expr expr = [&] {
            try {
                return parse_expression(cfg.advection[i]);
            } catch (const ParseError& err) {
                throw ConfigError(path, err.what());
            }
        }();
        std::string offending;
        if (!variables_legal_for(expr, cfg.grid_kind, axis_count, &offending)) {
            throw ConfigError(path, "variable '" + offending + "' is illegal for grid kind " +
                                        to_string(cfg.grid_kind));
        }
    }

    if (!(cfg.lambda_step0 > 0.0)) throw ConfigError("solver.lambda_step0", "must be positive");
    if (!(cfg.newton_tol > 0.0 && cfg.newton_tol <= 1e-8)) {
        throw ConfigError("solver.newton_tol", "must lie in (0, 1e-8]");
    }
    if (!(cfg.bracket_tol > 0.0)) throw ConfigError("solver.bracket_tol", "must be positive");
    if (!(cfg.lambda >= 0.0)) throw ConfigError("solver.lambda", "must be >= 0");
    if (cfg.eta_grid < 100) throw ConfigError("solver.eta_grid", "needs at least 100 points");
    if (!(cfg.eig_tol > 0.0 && cfg.eig_tol <= 1e-8)) {
        throw ConfigError("spectral.eig_tol", "must lie in (0, 1e-8]");
    }
    if (cfg.beta.empty()) throw ConfigError("verify.beta", "needs at least one value");
    for (double b : cfg.beta) {
        if (!(b > 1.0 && b < 2.0)) throw ConfigError("verify.beta", "values must lie in (1, 2)");
    }
    if (cfg.t_fractions.empty()) {
        throw ConfigError("verify.t_fractions", "needs at least one value");
    }
    for (double t : cfg.t_fractions) {
        if (!(t > 0.0 && t < 1.0)) {
            throw ConfigError("verify.t_fractions", "values must lie in (0, 1)");
        }
    }
    if (cfg.psi_count < 1) throw ConfigError("verify.psi_count", "must be positive");

    return cfg;
}

nlohmann::json Config::resolved() const {
    json doc;
    doc["grid"]["kind"] = to_string(grid_kind);
    doc["grid"]["N"] = dimension;
    doc["grid"]["m"] = nodes;
    json bounds_json = json::array();
    const int axis_count = grid_kind == GridKind::TensorRectangle ? dimension : 1;
    for (int a = 0; a < axis_count; ++a) {
        AxisBounds b = grid_kind == GridKind::RadialBall ? AxisBounds{0.0, 1.0}
                       : static_cast<size_t>(a) < bounds.size() ? bounds[static_cast<size_t>(a)]
                                                                : AxisBounds{};
        bounds_json.push_back({b.lo, b.hi});
    }
    doc["grid"]["bounds"] = bounds_json;
    doc["advection"]["components"] = advection;
    doc["solver"]["lambda_step0"] = lambda_step0;
    doc["solver"]["newton_tol"] = newton_tol;
    doc["solver"]["bracket_tol"] = bracket_tol;
    doc["solver"]["lambda"] = lambda;
    doc["solver"]["eta_grid"] = eta_grid;
    doc["spectral"]["eig_tol"] = eig_tol;
    doc["verify"]["beta"] = beta;
    doc["verify"]["t_fractions"] = t_fractions;
    doc["verify"]["psi_count"] = psi_count;
    doc["verify"]["seed"] = seed;
    doc["output"]["directory"] = output_directory.string();
    json formats = json::array();
    if (write_csv) formats.push_back("csv");
    if (write_json) formats.push_back("json");
    doc["output"]["formats"] = formats;
    return doc;
}

std::string Config::hash() const { return hash_hex(fnv1a_hash(resolved().dump())); }

Grid Config::make_grid() const {
    return build_grid(grid_kind, dimension, nodes, bounds);
}

std::vector<Expr> Config::advection_expressions() const {
    std::vector<Expr> exprs;
    exprs.reserve(advection.size());
    for (const auto& text : advection) exprs.push_back(parse_expression(text));
    return exprs;
}

VectorField Config::make_advection(const Grid& grid) const {
    const std::vector<Expr> exprs = advection_expressions();
    return sample_vector(grid, exprs);
}

nlohmann::json apply_override(nlohmann::json doc, const std::string& assignment) {
    const size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("--set", "expected key.path=value, got '" + assignment + "'");
    }
    const std::string key_path = assignment.substr(0, eq);
    const std::string value_text = assignment.substr(eq + 1);

    json value;
    try {
        value = json::parse(value_text);
    } catch (const json::exception&) {
        value = value_text;  // plain string (e.g. an expression)
    }

    json* cursor = &doc;
    size_t start = 0;
    while (true) {
        const size_t dot = key_path.find('.', start);
        const std::string part = key_path.substr(start, dot - start);
        if (part.empty()) throw ConfigError("--set", "empty key segment in '" + key_path + "'");
        if (dot == std::string::npos) {
            (*cursor)[part] = value;
            break;
        }
        cursor = &(*cursor)[part];
        start = dot + 1;
    }
    return doc;
}

Config load_config(const std::filesystem::path& path,
                   const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& err) {
        throw ConfigError("--config", std::string("parse error: ") + err.what());
    }
    for (const auto& assignment : overrides) {
        doc = apply_override(std::move(doc), assignment);
    }
    return parse_config(doc);
}

}  // namespace pullin
