#include "prosumer/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "prosumer/errors.hpp"

namespace prosumer {

namespace {

using nlohmann::json;

std::string real(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

template <class T>
T required(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError(std::string("missing key '") + key + "' in " + where);
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "' in " + where + ": " + e.what());
    }
}

template <class T>
std::optional<T> optional_key(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) return std::nullopt;
    return required<T>(obj, key, where);
}

SweepVariable parse_variable(const std::string& name) {
    if (name == "supply_capacity") return SweepVariable::SupplyCapacity;
    if (name == "inelastic_demand") return SweepVariable::InelasticDemand;
    throw ConfigError("sweep.variable must be 'supply_capacity' or 'inelastic_demand', got '" + name + "'");
}

SweepRow solve_point(const SweepSpec& spec, int k) {
    SweepRow row;
    row.param_value = spec.value_at(k);
    const MarketConfig config = spec.config_at(k);
    row.total_param = config.n_prosumers * row.param_value;
    try {
        SolveResult comp = solve_dual(config, Program::True);
        SolveResult nash = solve_dual(config, Program::Modified);
        row.welfare_competitive = comp.welfare_true;
        row.welfare_nash = nash.welfare_true;
        row.welfare_loss = row.welfare_competitive - row.welfare_nash;
        row.price_competitive = comp.price;
        row.price_nash = nash.price;
        row.non_concave = nash.non_concave;
        const auto ok = check_exponential_bound(nash.allocation.quantities, config);
        row.bound_violated.reserve(ok.size());
        for (bool b : ok) row.bound_violated.push_back(!b);
        row.bound_violations = static_cast<int>(std::count(row.bound_violated.begin(), row.bound_violated.end(), true));
        row.competitive = std::move(comp);
        row.nash = std::move(nash);
    } catch (const BracketFailure& e) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.welfare_competitive = row.welfare_nash = row.welfare_loss = nan;
        row.price_competitive = row.price_nash = nan;
        row.error = e.what();
    }
    return row;
}

}  // namespace

std::string_view to_string(SweepVariable variable) {
    return variable == SweepVariable::SupplyCapacity ? "supply_capacity" : "inelastic_demand";
}

void SweepSpec::validate() const {
    if (steps < 2) throw ConfigError("sweep.steps must be at least 2");
    if (!(start > 0.0) || !(stop > 0.0)) throw ConfigError("sweep.start and sweep.stop must be positive");
    if (start == stop) throw ConfigError("sweep.start and sweep.stop must differ");
    base_config.validate();
}

double SweepSpec::value_at(int k) const {
    if (k == steps - 1) return stop;
    return start + (stop - start) * k / (steps - 1);
}

MarketConfig SweepSpec::config_at(int k) const {
    MarketConfig config = base_config;
    const double v = value_at(k);
    if (variable == SweepVariable::SupplyCapacity) {
        config.s_max = v;
    } else {
        config.d_min = v;
        if (!fixed_eps) config.eps_price = default_eps_price(config.n_prosumers, v);
    }
    config.validate();
    return config;
}

unsigned sweep_threads() {
    if (const char* env = std::getenv("PROSUMER_MARKET_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
    spec.validate();
    std::vector<SweepRow> rows(spec.steps);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int k = next++; k < spec.steps; k = next++) rows[k] = solve_point(spec, k);
    };
    const unsigned workers = std::min<unsigned>(sweep_threads(), static_cast<unsigned>(spec.steps));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    }
    return rows;
}

std::string format_csv(const std::vector<SweepRow>& rows) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& r : rows) {
        out += real(r.param_value) + ',' + real(r.total_param) + ',' + real(r.welfare_competitive) + ',' +
               real(r.welfare_nash) + ',' + real(r.welfare_loss) + ',' + std::to_string(r.bound_violations) + ',' +
               (r.non_concave ? '1' : '0') + ',' + real(r.price_competitive) + ',' + real(r.price_nash) + '\n';
    }
    return out;
}

void emit_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
    if (rows.empty()) throw DomainError("emit_csv: no rows");
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open '" + path.string() + "' for writing");
    file << format_csv(rows);
    if (!file) throw IoError("failed writing '" + path.string() + "'");
}

void emit_gnuplot(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open '" + path.string() + "' for writing");
    file << "# total_param welfare_loss\n";
    for (const auto& r : rows) file << real(r.total_param) << ' ' << real(r.welfare_loss) << '\n';
    if (!file) throw IoError("failed writing '" + path.string() + "'");
}

LoadedConfig parse_config(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(doc, {"n_prosumers", "d_min", "s_max", "betas", "sweep", "tolerances"}, "config");

    LoadedConfig out;
    MarketConfig& m = out.market;
    m.n_prosumers = required<int>(doc, "n_prosumers", "config");
    m.d_min = required<double>(doc, "d_min", "config");
    m.s_max = required<double>(doc, "s_max", "config");
    m.betas = required<std::vector<double>>(doc, "betas", "config");
    m.eps_price = default_eps_price(m.n_prosumers, m.d_min);
    bool eps_given = false;
    if (doc.contains("tolerances")) {
        const json& tol = doc.at("tolerances");
        if (!tol.is_object()) throw ConfigError("tolerances must be an object");
        reject_unknown(tol, {"eps_price", "tol_root", "tol_kkt"}, "tolerances");
        if (auto v = optional_key<double>(tol, "eps_price", "tolerances")) {
            m.eps_price = *v;
            eps_given = true;
        }
        if (auto v = optional_key<double>(tol, "tol_root", "tolerances")) m.tol_root = *v;
        if (auto v = optional_key<double>(tol, "tol_kkt", "tolerances")) m.tol_kkt = *v;
    }
    m.validate();

    if (doc.contains("sweep")) {
        const json& sw = doc.at("sweep");
        if (!sw.is_object()) throw ConfigError("sweep must be an object");
        reject_unknown(sw, {"variable", "start", "stop", "steps"}, "sweep");
        SweepSpec spec;
        spec.variable = parse_variable(required<std::string>(sw, "variable", "sweep"));
        spec.start = required<double>(sw, "start", "sweep");
        spec.stop = required<double>(sw, "stop", "sweep");
        spec.steps = optional_key<int>(sw, "steps", "sweep").value_or(30);
        spec.base_config = m;
        spec.fixed_eps = eps_given;
        spec.validate();
        for (int k = 0; k < spec.steps; ++k) spec.config_at(k);
        out.sweep = std::move(spec);
    }
    return out;
}

LoadedConfig load_config(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot read config '" + path.string() + "'");
    std::ostringstream text;
    text << file.rdbuf();
    try {
        return parse_config(text.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

EquilibriumReport solve_equilibria(const MarketConfig& config) {
    EquilibriumReport r;
    r.config = config;
    r.competitive = solve_dual(config, Program::True);
    r.nash = solve_dual(config, Program::Modified);
    r.conditions = check_conditions(r.nash.thetas, r.nash.allocation.quantities, config);
    r.welfare_competitive = r.competitive.welfare_true;
    r.welfare_nash = r.nash.welfare_true;
    r.welfare_loss = r.welfare_competitive - r.welfare_nash;
    return r;
}

namespace {

template <class V>
std::string join(const V& values) {
    std::string out;
    for (const auto& v : values) {
        if (!out.empty()) out += ' ';
        out += real(v);
    }
    return out;
}

std::string bools(const std::vector<bool>& v) {
    std::string out;
    for (bool b : v) {
        if (!out.empty()) out += ' ';
        out += b ? '1' : '0';
    }
    return out;
}

void format_solve(std::ostringstream& os, const char* name, const SolveResult& s) {
    os << name << ".price: " << real(s.price) << '\n';
    os << name << ".quantities: " << join(s.allocation.quantities) << '\n';
    os << name << ".thetas: " << join(s.thetas) << '\n';
    os << name << ".at_capacity: " << bools(s.allocation.at_capacity) << '\n';
    os << name << ".kkt_residuals: " << join(s.allocation.kkt_residuals) << '\n';
    os << name << ".excess: " << real(s.excess) << '\n';
    os << name << ".iterations: " << s.iterations << '\n';
    os << name << ".converged: " << (s.converged ? "yes" : "no") << '\n';
    os << name << ".non_concave: " << (s.non_concave ? "yes" : "no") << '\n';
    os << name << ".welfare_true: " << real(s.welfare_true) << '\n';
}

}  // namespace

std::string format_conditions(const ConditionReport& c) {
    std::ostringstream os;
    os << "conditions.rivals_negative: " << bools(c.rivals_negative) << '\n';
    os << "conditions.bid_interval: " << bools(c.bid_interval) << '\n';
    os << "conditions.concavity_bound: " << bools(c.concavity_bound) << '\n';
    os << "conditions.exponential_bound: " << bools(c.exponential_bound) << '\n';
    os << "conditions.curvature: " << bools(c.curvature) << '\n';
    os << "conditions.all_ok: " << (c.all_ok ? "yes" : "no") << '\n';
    return os.str();
}

std::string format_report(const EquilibriumReport& r) {
    std::ostringstream os;
    os << "n_prosumers: " << r.config.n_prosumers << '\n';
    os << "d_min: " << real(r.config.d_min) << '\n';
    os << "s_max: " << real(r.config.s_max) << '\n';
    os << "betas: " << join(r.config.betas) << '\n';
    format_solve(os, "competitive", r.competitive);
    format_solve(os, "nash", r.nash);
    os << format_conditions(r.conditions);
    os << "welfare_competitive: " << real(r.welfare_competitive) << '\n';
    os << "welfare_nash: " << real(r.welfare_nash) << '\n';
    os << "welfare_loss: " << real(r.welfare_loss) << '\n';
    return os.str();
}

}  // namespace prosumer
