// Command-line front end: solve, sweep, check, verify, oracle.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "prosumer/conditions.hpp"
#include "prosumer/errors.hpp"
#include "prosumer/experiments.hpp"
#include "prosumer/oracle.hpp"
#include "prosumer/solver.hpp"

namespace {

using namespace prosumer;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitSolver = 2;

constexpr double kNashGapTolerance = 1e-6;
constexpr double kOracleTolerance = 1e-4;

struct Options {
    std::string config;
    std::string out;
    std::string gnuplot;
    std::string mode = "both";
    int grid = 0;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::vector<Program> programs(const std::string& mode) {
    if (mode == "true") return {Program::True};
    if (mode == "modified") return {Program::Modified};
    return {Program::True, Program::Modified};
}

int run_solve(const Options& o) {
    const auto loaded = load_config(o.config);
    if (o.mode == "both") {
        std::cout << format_report(solve_equilibria(loaded.market));
        return kExitOk;
    }
    const auto program = programs(o.mode).front();
    const auto r = solve_dual(loaded.market, program);
    std::cout << "program: " << to_string(program) << '\n'
              << "price: " << fmt(r.price) << '\n'
              << "converged: " << (r.converged ? "yes" : "no") << '\n'
              << "non_concave: " << (r.non_concave ? "yes" : "no") << '\n'
              << "welfare_true: " << fmt(r.welfare_true) << '\n';
    std::cout << "quantities:";
    for (double q : r.allocation.quantities) std::cout << ' ' << fmt(q);
    std::cout << "\nthetas:";
    for (double t : r.thetas) std::cout << ' ' << fmt(t);
    std::cout << '\n';
    return kExitOk;
}

int run_sweep_cmd(const Options& o) {
    const auto loaded = load_config(o.config);
    if (!loaded.sweep) throw ConfigError(o.config + ": no 'sweep' section");
    const auto rows = run_sweep(*loaded.sweep);
    if (o.out.empty()) {
        std::cout << format_csv(rows);
    } else {
        emit_csv(rows, o.out);
    }
    if (!o.gnuplot.empty()) emit_gnuplot(rows, o.gnuplot);
    int failures = 0;
    for (const auto& r : rows) {
        if (r.error) {
            std::cerr << "sweep point " << fmt(r.param_value) << ": " << *r.error << '\n';
            ++failures;
        }
    }
    return failures == 0 ? kExitOk : kExitSolver;
}

int run_check(const Options& o) {
    const auto loaded = load_config(o.config);
    const auto nash = solve_dual(loaded.market, Program::Modified);
    std::cout << format_conditions(check_conditions(nash.thetas, nash.allocation.quantities, loaded.market));
    return kExitOk;
}

int run_verify(const Options& o) {
    const auto loaded = load_config(o.config);
    const auto nash = solve_dual(loaded.market, Program::Modified);
    const int grid = o.grid > 0 ? o.grid : kBestResponseGrid;
    double max_gap = 0.0;
    for (std::size_t i = 0; i < nash.thetas.size(); ++i) {
        const auto br = best_response(i, nash.thetas, loaded.market, grid);
        std::cout << "prosumer " << i + 1 << ": gap " << fmt(br.gap) << " theta " << fmt(nash.thetas[i])
                  << " best " << fmt(br.theta_star) << '\n';
        max_gap = std::max(max_gap, br.gap);
    }
    std::cout << "max_gap: " << fmt(max_gap) << '\n';
    return max_gap <= kNashGapTolerance ? kExitOk : kExitSolver;
}

int run_oracle(const Options& o) {
    const auto loaded = load_config(o.config);
    const int grid = o.grid > 0 ? o.grid : 1000;
    double worst = 0.0;
    for (Program p : programs(o.mode)) {
        const auto dual = solve_dual(loaded.market, p);
        const auto brute = brute_force_program(loaded.market, p, grid);
        double err = 0.0;
        for (std::size_t i = 0; i < brute.quantities.size(); ++i)
            err = std::max(err, std::abs(brute.quantities[i] - dual.allocation.quantities[i]));
        std::cout << to_string(p) << ": max allocation difference " << fmt(err) << '\n';
        worst = std::max(worst, err);
    }
    return worst <= kOracleTolerance ? kExitOk : kExitSolver;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Competitive and Nash equilibria of a uniform-price prosumer market"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON market/sweep config")->required()->check(CLI::ExistingFile);
    };
    auto* solve = app.add_subcommand("solve", "solve both programs for one config and print the report");
    add_common(solve);
    solve->add_option("--mode", o.mode, "true|modified|both")->check(CLI::IsMember({"true", "modified", "both"}));
    auto* sweep = app.add_subcommand("sweep", "run the config's sweep and write CSV");
    add_common(sweep);
    sweep->add_option("--out", o.out, "CSV output path (stdout if omitted)");
    sweep->add_option("--gnuplot", o.gnuplot, "optional two-column loss export");
    auto* check = app.add_subcommand("check", "evaluate existence/uniqueness conditions at the Nash solution");
    add_common(check);
    auto* verify = app.add_subcommand("verify", "best-response certificate of the Nash bids");
    add_common(verify);
    verify->add_option("--grid", o.grid, "best-response grid points");
    auto* oracle = app.add_subcommand("oracle", "brute-force cross-check for N <= 3");
    add_common(oracle);
    oracle->add_option("--mode", o.mode, "true|modified|both")->check(CLI::IsMember({"true", "modified", "both"}));
    oracle->add_option("--grid", o.grid, "grid points per free dimension");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*solve) return run_solve(o);
        if (*sweep) return run_sweep_cmd(o);
        if (*check) return run_check(o);
        if (*verify) return run_verify(o);
        if (*oracle) return run_oracle(o);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const TooLarge& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kExitSolver;
    }
    return kExitValidation;
}
