#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prosumer/conditions.hpp"
#include "prosumer/market.hpp"
#include "prosumer/solver.hpp"

namespace prosumer {

enum class SweepVariable { SupplyCapacity, InelasticDemand };

std::string_view to_string(SweepVariable variable);

struct SweepSpec {
    SweepVariable variable = SweepVariable::SupplyCapacity;
    double start = 0.0;
    double stop = 0.0;
    int steps = 30;
    MarketConfig base_config;
    /// Keep base_config.eps_price fixed; otherwise it is re-derived from each
    /// point's d_min.
    bool fixed_eps = false;

    void validate() const;
    /// Per-prosumer parameter value at sweep index k, start to stop inclusive.
    double value_at(int k) const;
    MarketConfig config_at(int k) const;
};

struct SweepRow {
    double param_value = 0.0;
    double total_param = 0.0;
    double welfare_competitive = 0.0;
    double welfare_nash = 0.0;
    double welfare_loss = 0.0;
    /// Prosumers whose Nash quantity is below 5 d_min / beta_i - (N-1) d_min.
    int bound_violations = 0;
    std::vector<bool> bound_violated;
    bool non_concave = false;
    double price_competitive = 0.0;
    double price_nash = 0.0;
    std::optional<SolveResult> competitive;
    std::optional<SolveResult> nash;
    /// Solver failure at this point; numeric fields are NaN.
    std::optional<std::string> error;
};

/// Solves both programs at every sweep point. Points run concurrently
/// (PROSUMER_MARKET_THREADS caps the worker count); rows come back in sweep
/// order regardless.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

/// Number of sweep workers: PROSUMER_MARKET_THREADS if set and positive,
/// hardware concurrency otherwise.
unsigned sweep_threads();

inline constexpr std::string_view kCsvHeader =
    "param_value,total_param,welfare_competitive,welfare_nash,welfare_loss,eq21_violations,"
    "non_concave_flag,price_competitive,price_nash";

std::string format_csv(const std::vector<SweepRow>& rows);

/// Writes format_csv(rows). Throws IoError naming the path.
void emit_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

/// Two columns, total parameter and welfare loss, for gnuplot.
void emit_gnuplot(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

struct LoadedConfig {
    MarketConfig market;
    std::optional<SweepSpec> sweep;
};

/// Parses the JSON config format. Unknown keys are rejected. Throws
/// ConfigError on schema or value errors and IoError when unreadable.
LoadedConfig parse_config(std::string_view json_text);
LoadedConfig load_config(const std::filesystem::path& path);

struct EquilibriumReport {
    MarketConfig config;
    SolveResult competitive;
    SolveResult nash;
    /// Checks evaluated at the Nash bids and allocation.
    ConditionReport conditions;
    double welfare_competitive = 0.0;
    double welfare_nash = 0.0;
    double welfare_loss = 0.0;
};

EquilibriumReport solve_equilibria(const MarketConfig& config);

/// `key: value` lines, vectors as space-separated lists.
std::string format_report(const EquilibriumReport& report);
std::string format_conditions(const ConditionReport& report);

}  // namespace prosumer
