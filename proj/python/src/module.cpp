#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "prosumer/conditions.hpp"
#include "prosumer/errors.hpp"
#include "prosumer/experiments.hpp"
#include "prosumer/market.hpp"
#include "prosumer/oracle.hpp"
#include "prosumer/solver.hpp"

namespace py = pybind11;
using namespace prosumer;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Competitive and Nash equilibria of a uniform-price prosumer market";

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<InvalidBids>(m, "InvalidBids", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<TooLarge>(m, "TooLarge", PyExc_ValueError);
    py::register_exception<BracketFailure>(m, "BracketFailure", PyExc_RuntimeError);
    py::register_exception<UnboundedPayoff>(m, "UnboundedPayoff", PyExc_RuntimeError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::enum_<Program>(m, "Program")
        .value("TRUE", Program::True)
        .value("MODIFIED", Program::Modified);

    py::class_<ExponentialUtility>(m, "ExponentialUtility")
        .def(py::init<double, double>(), py::arg("beta"), py::arg("d_min"))
        .def_property_readonly("beta", &ExponentialUtility::beta)
        .def_property_readonly("d_min", &ExponentialUtility::d_min)
        .def("value", &ExponentialUtility::value)
        .def("deriv", &ExponentialUtility::deriv)
        .def("deriv2", &ExponentialUtility::deriv2)
        .def("inverse_deriv", &ExponentialUtility::inverse_deriv)
        .def("modified_value", [](const ExponentialUtility& u, int n, double q) { return modified_utility(u, n, q); },
             py::arg("n"), py::arg("q"))
        .def("modified_deriv",
             [](const ExponentialUtility& u, int n, double q) { return modified_utility_deriv(u, n, q); },
             py::arg("n"), py::arg("q"));

    py::class_<MarketConfig>(m, "MarketConfig")
        .def(py::init(&MarketConfig::make), py::arg("d_min"), py::arg("s_max"), py::arg("betas"))
        .def_readwrite("n_prosumers", &MarketConfig::n_prosumers)
        .def_readwrite("d_min", &MarketConfig::d_min)
        .def_readwrite("s_max", &MarketConfig::s_max)
        .def_readwrite("betas", &MarketConfig::betas)
        .def_readwrite("eps_price", &MarketConfig::eps_price)
        .def_readwrite("tol_root", &MarketConfig::tol_root)
        .def_readwrite("tol_kkt", &MarketConfig::tol_kkt)
        .def("validate", &MarketConfig::validate)
        .def("q_upper", &MarketConfig::q_upper);

    py::class_<Allocation>(m, "Allocation")
        .def_readonly("quantities", &Allocation::quantities)
        .def_readonly("dual_price", &Allocation::dual_price)
        .def_readonly("kkt_residuals", &Allocation::kkt_residuals)
        .def_readonly("at_capacity", &Allocation::at_capacity);

    py::class_<SolveResult>(m, "SolveResult")
        .def_readonly("program", &SolveResult::program)
        .def_readonly("allocation", &SolveResult::allocation)
        .def_readonly("thetas", &SolveResult::thetas)
        .def_readonly("price", &SolveResult::price)
        .def_readonly("welfare_true", &SolveResult::welfare_true)
        .def_readonly("converged", &SolveResult::converged)
        .def_readonly("iterations", &SolveResult::iterations)
        .def_readonly("excess", &SolveResult::excess)
        .def_readonly("non_concave", &SolveResult::non_concave)
        .def_property_readonly("quantities", [](const SolveResult& r) { return r.allocation.quantities; });

    py::class_<ConditionReport>(m, "ConditionReport")
        .def_readonly("rivals_negative", &ConditionReport::rivals_negative)
        .def_readonly("bid_interval", &ConditionReport::bid_interval)
        .def_readonly("concavity_bound", &ConditionReport::concavity_bound)
        .def_readonly("exponential_bound", &ConditionReport::exponential_bound)
        .def_readonly("curvature", &ConditionReport::curvature)
        .def_readonly("all_ok", &ConditionReport::all_ok);

    py::class_<BestResponseResult>(m, "BestResponseResult")
        .def_readonly("prosumer_index", &BestResponseResult::prosumer_index)
        .def_readonly("theta_star", &BestResponseResult::theta_star)
        .def_readonly("payoff_star", &BestResponseResult::payoff_star)
        .def_readonly("payoff_at_candidate", &BestResponseResult::payoff_at_candidate)
        .def_readonly("gap", &BestResponseResult::gap);

    py::class_<SweepRow>(m, "SweepRow")
        .def_readonly("param_value", &SweepRow::param_value)
        .def_readonly("total_param", &SweepRow::total_param)
        .def_readonly("welfare_competitive", &SweepRow::welfare_competitive)
        .def_readonly("welfare_nash", &SweepRow::welfare_nash)
        .def_readonly("welfare_loss", &SweepRow::welfare_loss)
        .def_readonly("bound_violations", &SweepRow::bound_violations)
        .def_readonly("bound_violated", &SweepRow::bound_violated)
        .def_readonly("non_concave", &SweepRow::non_concave)
        .def_readonly("price_competitive", &SweepRow::price_competitive)
        .def_readonly("price_nash", &SweepRow::price_nash)
        .def_readonly("error", &SweepRow::error);

    py::class_<SweepSpec>(m, "SweepSpec")
        .def_readonly("start", &SweepSpec::start)
        .def_readonly("stop", &SweepSpec::stop)
        .def_readonly("steps", &SweepSpec::steps)
        .def_readonly("base_config", &SweepSpec::base_config)
        .def_property_readonly("variable", [](const SweepSpec& s) { return std::string(to_string(s.variable)); });

    py::class_<LoadedConfig>(m, "LoadedConfig")
        .def_readonly("market", &LoadedConfig::market)
        .def_readonly("sweep", &LoadedConfig::sweep);

    m.def("clearing_price", [](const std::vector<double>& thetas, double d_min) { return clearing_price(thetas, d_min); },
          py::arg("thetas"), py::arg("d_min"));
    m.def("quantity_from_bid", &quantity_from_bid, py::arg("theta"), py::arg("price"), py::arg("d_min"));
    m.def("solve_dual", &solve_dual, py::arg("config"), py::arg("program"),
          py::call_guard<py::gil_scoped_release>());
    m.def("welfare", [](const MarketConfig& c, const std::vector<double>& q) { return welfare(c, q); },
          py::arg("config"), py::arg("quantities"));
    m.def("check_conditions",
          [](const std::vector<double>& thetas, const std::vector<double>& q, const MarketConfig& c) {
              return check_conditions(thetas, q, c);
          },
          py::arg("thetas"), py::arg("quantities"), py::arg("config"));
    m.def("strategic_payoff",
          [](std::size_t i, const std::vector<double>& thetas, const MarketConfig& c) {
              return strategic_payoff(i, thetas, c);
          },
          py::arg("i"), py::arg("thetas"), py::arg("config"));
    m.def("best_response",
          [](std::size_t i, const std::vector<double>& thetas, const MarketConfig& c, int grid) {
              py::gil_scoped_release release;
              return best_response(i, thetas, c, grid);
          },
          py::arg("i"), py::arg("thetas"), py::arg("config"), py::arg("grid_points") = kBestResponseGrid);
    m.def("brute_force_program", &brute_force_program, py::arg("config"), py::arg("program"),
          py::arg("grid_points") = 1000, py::arg("refinements") = 4, py::call_guard<py::gil_scoped_release>());
    m.def("parse_config", [](const std::string& text) { return parse_config(text); }, py::arg("text"));
    m.def("load_config", [](const std::filesystem::path& p) { return load_config(p); }, py::arg("path"));
    m.def("run_sweep", &run_sweep, py::arg("spec"), py::call_guard<py::gil_scoped_release>());
    m.def("format_csv", &format_csv, py::arg("rows"));
    m.attr("CSV_HEADER") = std::string(kCsvHeader);
}
