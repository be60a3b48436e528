#include "pullin/runner.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <optional>

#include "pullin/artifacts.hpp"
#include "pullin/hodge.hpp"
#include "pullin/ineq.hpp"
#include "pullin/solver.hpp"
#include "pullin/spectral.hpp"

namespace pullin {

namespace {

using nlohmann::json;

std::vector<std::string> coordinate_header(const Grid& grid) {
    if (grid.kind() == GridKind::RadialBall) return {"r"};
    if (grid.axis_count() == 1) return {"x"};
    return {"x", "y"};
}

std::vector<double> diagnostic_exponents_for(int dimension) {
    const double p0 = lp_critical_exponent();
    std::vector<double> ps{2.0, 0.75 * static_cast<double>(dimension), 0.99 * p0, 1.01 * p0};
    std::sort(ps.begin(), ps.end());
    std::vector<double> out;
    for (double p : ps) {
        if (out.empty() || std::abs(p - out.back()) > 1e-9) out.push_back(p);
    }
    return out;
}

void write_field_csv(const std::filesystem::path& path, const Grid& grid, const Field& f,
                     const std::string& value_name, const std::string& hash) {
    std::vector<std::string> header{"node"};
    for (const auto& c : coordinate_header(grid)) header.push_back(c);
    header.push_back(value_name);
    CsvWriter csv(header, hash);
    for (int i = 0; i < grid.node_count(); ++i) {
        std::vector<std::string> row{std::to_string(i)};
        for (int a = 0; a < grid.axis_count(); ++a) {
            row.push_back(format_double(grid.coord(i, a)));
        }
        row.push_back(format_double(f[i]));
        csv.add_row(std::move(row));
    }
    csv.write(path);
}

json field_to_json(const Field& f) {
    json arr = json::array();
    for (int i = 0; i < f.size(); ++i) arr.push_back(f[i]);
    return arr;
}

struct RunContext {
    const Config& cfg;
    std::filesystem::path out;
    std::string hash;

    std::filesystem::path artifact(const std::string& name) const { return out / name; }
};

ContinuationOptions continuation_options(const Config& cfg) {
    ContinuationOptions opts;
    opts.lambda_step0 = cfg.lambda_step0;
    opts.bracket_tol = cfg.bracket_tol;
    opts.newton_tol = cfg.newton_tol;
    opts.lp_exponents = diagnostic_exponents_for(cfg.dimension);
    return opts;
}

// Stability eigenpairs for every branch point (the K column). The sweep is
// pure per point, so it parallelizes over PULLIN_THREADS.
std::vector<EigenPair> branch_eigenpairs(const Grid& grid, const VectorField& c, Branch& branch,
                                         double eig_tol) {
    std::vector<std::optional<EigenPair>> pairs(branch.points.size());
    parallel_for(static_cast<int>(branch.points.size()), configured_thread_count(),
                 [&](int k) {
                     const BranchPoint& pt = branch.points[static_cast<size_t>(k)];
                     pairs[static_cast<size_t>(k)] =
                         linearized_stability(grid, c, pt.u, pt.lambda, eig_tol);
                 });
    std::vector<EigenPair> out;
    out.reserve(pairs.size());
    for (size_t k = 0; k < pairs.size(); ++k) {
        branch.points[k].eigenvalue_k = pairs[k]->eigenvalue;
        out.push_back(std::move(*pairs[k]));
    }
    return out;
}

void write_branch_artifacts(const RunContext& ctx, const Grid& grid, const Branch& branch) {
    if (ctx.cfg.write_csv) {
        std::vector<std::string> header{"lambda", "sup_u", "K", "newton_iters"};
        const auto exponents = diagnostic_exponents_for(ctx.cfg.dimension);
        for (double p : exponents) header.push_back("lp_norm_" + format_double(p));
        CsvWriter csv(header, ctx.hash);
        for (const BranchPoint& pt : branch.points) {
            std::vector<std::string> row{format_double(pt.lambda), format_double(pt.sup_u),
                                         format_double(pt.eigenvalue_k),
                                         std::to_string(pt.newton_iters)};
            for (double p : exponents) {
                const auto it = pt.lp_norms.find(p);
                row.push_back(it == pt.lp_norms.end() ? "" : format_double(it->second));
            }
            csv.add_row(std::move(row));
        }
        csv.write(ctx.artifact("branch.csv"));
    }
    if (ctx.cfg.write_json) {
        json doc;
        doc["bracket"] = {branch.lambda_lo, branch.lambda_hi};
        doc["value"] = 0.5 * (branch.lambda_lo + branch.lambda_hi);
        doc["width"] = branch.lambda_hi - branch.lambda_lo;
        doc["points"] = branch.points.size();
        doc["sup_u_last"] = branch.points.back().sup_u;
        write_json_artifact(ctx.artifact("lambda_star.json"), std::move(doc), ctx.hash);
    }
    (void)grid;
}

int run_decompose(const RunContext& ctx) {
    const Grid grid = ctx.cfg.make_grid();
    const VectorField c = ctx.cfg.make_advection(grid);
    const Decomposition d = decompose(grid, c, ctx.cfg.eig_tol);
    const DecompositionReport report = verify_decomposition(d, c);

    if (ctx.cfg.write_json) {
        json doc;
        doc["mu"] = d.mu;
        doc["residuals"]["div"] = d.residuals.div_residual;
        doc["residuals"]["bc"] = d.residuals.bc_residual;
        doc["residuals"]["eig"] = d.residuals.eig_residual;
        doc["gamma"] = field_to_json(d.gamma);
        doc["alpha"] = field_to_json(d.alpha);
        json a_json = json::array();
        for (int axis = 0; axis < d.a.component_count(); ++axis) {
            json comp = json::array();
            for (int i = 0; i < grid.node_count(); ++i) comp.push_back(d.a.component(axis, i));
            a_json.push_back(std::move(comp));
        }
        doc["a"] = std::move(a_json);
        json checks = json::array();
        for (const auto& chk : report.checks) {
            checks.push_back({{"name", chk.name},
                              {"value", chk.value},
                              {"threshold", chk.threshold},
                              {"pass", chk.pass}});
        }
        doc["checks"] = std::move(checks);
        doc["pass"] = report.all_pass;
        write_json_artifact(ctx.artifact("decomposition.json"), std::move(doc), ctx.hash);
    }
    if (!report.all_pass) {
        for (const auto& chk : report.checks) {
            if (!chk.pass) {
                std::cerr << "decomposition check failed: " << chk.name << " = " << chk.value
                          << " (threshold " << chk.threshold << ")\n";
            }
        }
        return 2;
    }
    return 0;
}

int run_solve(const RunContext& ctx) {
    const Grid grid = ctx.cfg.make_grid();
    const VectorField c = ctx.cfg.make_advection(grid);
    const NewtonResult res =
        newton_solve(grid, c, ctx.cfg.lambda, Field(grid, 0.0), ctx.cfg.newton_tol);
    if (!res.converged) {
        std::cerr << "solve: no minimal solution found at lambda = " << ctx.cfg.lambda
                  << " (residual " << res.residual_norm << " after " << res.iterations
                  << " iterations); the voltage may exceed the pull-in threshold\n";
        return 2;
    }
    if (ctx.cfg.write_csv) {
        write_field_csv(ctx.artifact("solution.csv"), grid, *res.u, "u", ctx.hash);
    }
    if (ctx.cfg.write_json) {
        json doc;
        doc["lambda"] = ctx.cfg.lambda;
        doc["sup_u"] = res.u->max_value();
        doc["newton_iters"] = res.iterations;
        doc["residual"] = res.residual_norm;
        write_json_artifact(ctx.artifact("solution.json"), std::move(doc), ctx.hash);
    }
    return 0;
}

int run_branch(const RunContext& ctx) {
    const Grid grid = ctx.cfg.make_grid();
    const VectorField c = ctx.cfg.make_advection(grid);
    Branch branch = continue_branch(grid, c, continuation_options(ctx.cfg));
    branch_eigenpairs(grid, c, branch, ctx.cfg.eig_tol);
    write_branch_artifacts(ctx, grid, branch);
    return 0;
}

int run_eigen(const RunContext& ctx) {
    const Grid grid = ctx.cfg.make_grid();
    const VectorField c = ctx.cfg.make_advection(grid);
    Field u(grid, 0.0);
    if (ctx.cfg.lambda > 0.0) {
        NewtonResult res =
            newton_solve(grid, c, ctx.cfg.lambda, Field(grid, 0.0), ctx.cfg.newton_tol);
        if (!res.converged) {
            std::cerr << "eigen: no minimal solution at lambda = " << ctx.cfg.lambda << "\n";
            return 2;
        }
        u = std::move(*res.u);
    }
    const EigenPair pair = linearized_stability(grid, c, u, ctx.cfg.lambda, ctx.cfg.eig_tol);
    if (ctx.cfg.write_json) {
        json doc;
        doc["K"] = pair.eigenvalue;
        doc["residual"] = pair.residual;
        doc["iterations"] = pair.iterations;
        doc["lambda"] = ctx.cfg.lambda;
        write_json_artifact(ctx.artifact("eigen.json"), std::move(doc), ctx.hash);
    }
    if (ctx.cfg.write_csv) {
        write_field_csv(ctx.artifact("phi.csv"), grid, pair.phi, "phi", ctx.hash);
    }
    return 0;
}

int run_diagnose(const RunContext& ctx) {
    const Grid grid = ctx.cfg.make_grid();
    const VectorField c = ctx.cfg.make_advection(grid);
    const Branch branch = continue_branch(grid, c, continuation_options(ctx.cfg));
    const RegularityReport report = regularity_diagnostic(branch, ctx.cfg.dimension);
    if (ctx.cfg.write_json) {
        json doc;
        doc["verdict"] = report.verdict;
        doc["lambda_star_bracket"] = {branch.lambda_lo, branch.lambda_hi};
        json entries = json::array();
        for (const auto& e : report.entries) {
            entries.push_back({{"p", e.p},
                               {"growth_factor", e.growth_factor},
                               {"increment_ratio", e.increment_ratio},
                               {"trend", e.trend},
                               {"norms", e.norms}});
        }
        doc["entries"] = std::move(entries);
        write_json_artifact(ctx.artifact("regularity.json"), std::move(doc), ctx.hash);
    }
    return 0;
}

int run_oracle(const RunContext& ctx) {
    if (ctx.cfg.grid_kind != GridKind::RadialBall) {
        throw ConfigError("grid.kind", "the oracle command needs a radial-ball grid");
    }
    std::function<double(double)> c_r;
    if (ctx.cfg.advection[0] != "0") {
        const Expr expr = parse_expression(ctx.cfg.advection[0]);
        c_r = [expr](double r) {
            EvalPoint p;
            p.r = r;
            return expr.evaluate(p);
        };
    }
    const ShootingResult result = shooting_oracle(ctx.cfg.dimension, c_r, ctx.cfg.eta_grid);
    if (ctx.cfg.write_csv) {
        CsvWriter csv({"eta", "lambda"}, ctx.hash);
        for (const auto& [eta, lambda] : result.lambda_of_eta) {
            csv.add_row({format_double(eta), format_double(lambda)});
        }
        csv.write(ctx.artifact("oracle.csv"));
    }
    if (ctx.cfg.write_json) {
        json doc;
        doc["lambda_star"] = result.lambda_star;
        doc["eta_grid"] = ctx.cfg.eta_grid;
        write_json_artifact(ctx.artifact("lambda_star_oracle.json"), std::move(doc), ctx.hash);
    }
    return 0;
}

struct VerifyRow {
    std::string check;
    std::string beta, t, lambda, psi;
    double lhs = 0.0, rhs = 0.0, slack = 0.0;
    std::string lambda_sup, lambda_cap, h_value;
    bool pass = true;
};

int run_verify(const RunContext& ctx) {
    const Grid grid = ctx.cfg.make_grid();
    const VectorField c = ctx.cfg.make_advection(grid);

    Branch branch = continue_branch(grid, c, continuation_options(ctx.cfg));
    const std::vector<EigenPair> eigen = branch_eigenpairs(grid, c, branch, ctx.cfg.eig_tol);
    const Decomposition d = decompose(grid, c, ctx.cfg.eig_tol);
    const DecompositionReport dreport = verify_decomposition(d, c);

    std::vector<VerifyRow> rows;
    json summary;
    bool all_pass = true;

    auto note = [&](const std::string& check, double slack, bool pass) {
        if (!summary.contains(check)) {
            summary[check] = {{"min_slack", slack}, {"pass", pass}, {"rows", 1}};
        } else {
            json& entry = summary[check];
            entry["min_slack"] = std::min(entry["min_slack"].get<double>(), slack);
            entry["pass"] = entry["pass"].get<bool>() && pass;
            entry["rows"] = entry["rows"].get<int>() + 1;
        }
        all_pass = all_pass && pass;
    };

    for (const auto& chk : dreport.checks) {
        VerifyRow row;
        row.check = "decomposition:" + chk.name;
        row.lhs = chk.value;
        row.rhs = chk.threshold;
        row.slack = chk.threshold - chk.value;
        row.pass = chk.pass;
        rows.push_back(row);
        note(row.check, row.slack, row.pass);
    }

    // Hardy probes: constant E, the first smooth bump, and the mid-branch
    // eigenfunction against the decomposition weight.
    {
        const std::vector<Field> psis =
            random_test_functions(grid, ctx.cfg.psi_count, ctx.cfg.seed);
        const size_t mid = branch.points.size() / 2;

        std::vector<double> bump_vals(static_cast<size_t>(grid.node_count()), 0.0);
        for (int i = 0; i < grid.node_count(); ++i) {
            if (grid.is_boundary(i)) continue;
            double v = 1.0;
            if (grid.kind() == GridKind::RadialBall) {
                v = std::sin(std::numbers::pi * grid.coord(i, 0));
            } else {
                for (int a = 0; a < grid.axis_count(); ++a) {
                    const double lo = a == 0 ? grid.coord(grid.node_at(0, 0), a)
                                             : grid.coord(grid.node_at(0, 0), 1);
                    const double hi = a == 0
                                          ? grid.coord(grid.node_at(grid.nodes_per_axis(0) - 1, 0), 0)
                                          : grid.coord(grid.node_at(0, grid.nodes_per_axis(1) - 1), 1);
                    v *= std::sin(std::numbers::pi * (grid.coord(i, a) - lo) / (hi - lo));
                }
            }
            bump_vals[static_cast<size_t>(i)] = v;
        }
        const Field bump(grid, std::move(bump_vals));
        const Field weight = d.gamma.map([](double gv) { return std::exp(gv); });

        struct ProbeSpec {
            std::string name;
            HardyProbe probe;
        };
        std::vector<ProbeSpec> probes;
        probes.push_back({"hardy:constant", {Field(grid, 1.0), Field(grid, 1.0), 1.5, psis}});
        probes.push_back({"hardy:bump", {Field(grid, 1.0), bump, 1.0, psis}});
        probes.push_back({"hardy:eigenfunction", {weight, eigen[mid].phi, 1.5, psis}});

        for (const auto& [name, probe] : probes) {
            const SlackStats stats = hardy_check(probe);
            VerifyRow row;
            row.check = name;
            row.beta = format_double(probe.beta);
            size_t argmin = 0;
            for (size_t k = 0; k < stats.per_psi.size(); ++k) {
                if (stats.per_psi[k].slack <= stats.per_psi[argmin].slack) argmin = k;
            }
            row.psi = std::to_string(argmin);
            row.lhs = stats.per_psi[argmin].lhs;
            row.rhs = stats.per_psi[argmin].rhs;
            row.slack = stats.min_slack;
            row.pass = stats.pass;
            rows.push_back(row);
            note(name, stats.min_slack, stats.pass);
        }
    }

    // Energy inequality at three branch points; beta = 2 is the plain
    // stability bound, beta = 1.5 exercises the full right-hand side.
    {
        const std::vector<Field> psis =
            random_test_functions(grid, ctx.cfg.psi_count, ctx.cfg.seed + 1);
        const std::vector<size_t> marks{branch.points.size() / 4, branch.points.size() / 2,
                                        (3 * branch.points.size()) / 4};
        for (double beta : {1.5, 2.0}) {
            for (size_t mark : marks) {
                const BranchPoint& pt = branch.points[mark];
                const Field rho = pt.u.map([&](double ui) {
                    return 2.0 * pt.lambda / std::pow(1.0 - ui, 3.0);
                });
                const SlackStats stats =
                    energy_inequality_check(grid, d, eigen[mark].phi, rho, beta, psis);
                VerifyRow row;
                row.check = "energy";
                row.beta = format_double(beta);
                row.lambda = format_double(pt.lambda);
                row.lhs = stats.per_psi.empty() ? 0.0 : stats.per_psi.front().lhs;
                row.slack = stats.min_slack;
                row.pass = stats.pass;
                rows.push_back(row);
                note("energy", stats.min_slack, stats.pass);
            }
        }
    }

    // Main estimate sweep over the admissible (beta, t) region at every
    // branch point with lambda > 0, including the flux-orthogonality value.
    {
        struct Cell {
            VerifyRow row;
        };
        std::vector<std::tuple<double, double, size_t>> tuples;
        for (double beta : ctx.cfg.beta) {
            for (double frac : ctx.cfg.t_fractions) {
                for (size_t k = 1; k < branch.points.size(); ++k) {
                    tuples.emplace_back(beta, frac, k);
                }
            }
        }
        std::vector<Cell> cells(tuples.size());
        parallel_for(static_cast<int>(tuples.size()), configured_thread_count(), [&](int i) {
            const auto [beta, frac, k] = tuples[static_cast<size_t>(i)];
            const BranchPoint& pt = branch.points[k];
            const double t = frac * t_upper(beta);
            const EstimateReport rep =
                main_estimate_check(grid, d, pt.u, pt.lambda, beta, t, &eigen[k]);
            const FluxOrthogonality flux = flux_orthogonality_check(d, pt.u, t);
            VerifyRow row;
            row.check = "estimate";
            row.beta = format_double(beta);
            row.t = format_double(t);
            row.lambda = format_double(pt.lambda);
            row.lhs = rep.lhs;
            row.rhs = rep.rhs_first + rep.rhs_second;
            row.slack = rep.slack;
            row.lambda_sup = format_double(rep.lambda_sup);
            row.lambda_cap = format_double(rep.lambda_cap);
            row.h_value = format_double(flux.h_value);
            row.pass = rep.slack_pass && rep.cap_pass && flux.pass && rep.coefficient > 0.0;
            cells[static_cast<size_t>(i)].row = std::move(row);
        });
        for (auto& cell : cells) {
            rows.push_back(cell.row);
            note("estimate", cell.row.slack, cell.row.pass);
        }
    }

    if (ctx.cfg.write_csv) {
        CsvWriter csv({"check", "beta", "t", "lambda", "psi", "lhs", "rhs", "slack",
                       "lambda_sup", "lambda_cap", "h_value", "pass"},
                      ctx.hash);
        for (const auto& row : rows) {
            csv.add_row({row.check, row.beta, row.t, row.lambda, row.psi,
                         format_double(row.lhs), format_double(row.rhs),
                         format_double(row.slack), row.lambda_sup, row.lambda_cap, row.h_value,
                         row.pass ? "1" : "0"});
        }
        csv.write(ctx.artifact("verify.csv"));
    }
    if (ctx.cfg.write_json) {
        json doc;
        doc["checks"] = summary;
        doc["pass"] = all_pass;
        doc["lambda_star_bracket"] = {branch.lambda_lo, branch.lambda_hi};
        write_json_artifact(ctx.artifact("summary.json"), std::move(doc), ctx.hash);
    }
    return all_pass ? 0 : 2;
}

}  // namespace

int run_command(const std::string& command, const Config& cfg) {
    RunContext ctx{cfg, cfg.output_directory, cfg.hash()};
    std::filesystem::create_directories(ctx.out);

    {
        json resolved = cfg.resolved();
        write_json_artifact(ctx.artifact("resolved-config.json"), std::move(resolved), ctx.hash);
    }

    if (command == "decompose") return run_decompose(ctx);
    if (command == "solve") return run_solve(ctx);
    if (command == "branch") return run_branch(ctx);
    if (command == "eigen") return run_eigen(ctx);
    if (command == "verify") return run_verify(ctx);
    if (command == "diagnose") return run_diagnose(ctx);
    if (command == "oracle") return run_oracle(ctx);
    throw ConfigError("command", "unknown command '" + command +
                                     "' (expected decompose, solve, branch, eigen, verify, "
                                     "diagnose, or oracle)");
}

}  // namespace pullin
