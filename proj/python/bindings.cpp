#include "cdsbounds/cli_app.hpp"
#include "cdsbounds/errors.hpp"
#include "cdsbounds/gooddeal.hpp"
#include "cdsbounds/hedging.hpp"
#include "cdsbounds/lattice.hpp"
#include "cdsbounds/lp_core.hpp"
#include "cdsbounds/valuation.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace cdsbounds;

PYBIND11_MODULE(_cdsbounds, m) {
    m.doc() = "No-arbitrage and good-deal bounds for illiquid CDS positions";

    py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_RuntimeError);
    py::register_exception<UnsupportedStructure>(m, "UnsupportedStructure", PyExc_RuntimeError);
    py::register_exception<LpFailure>(m, "LpFailure", PyExc_RuntimeError);

    py::enum_<Side>(m, "Side").value("lub", Side::lub).value("glb", Side::glb);
    py::enum_<LpStatus>(m, "LpStatus")
        .value("optimal", LpStatus::optimal)
        .value("infeasible", LpStatus::infeasible)
        .value("unbounded", LpStatus::unbounded);
    py::enum_<Uniqueness>(m, "Uniqueness")
        .value("unique", Uniqueness::unique)
        .value("non_unique", Uniqueness::non_unique)
        .value("probe_failed", Uniqueness::probe_failed);

    py::class_<TenorGrid>(m, "TenorGrid")
        .def(py::init<int, double, double>(), py::arg("quarters"), py::arg("risk_free_rate"),
             py::arg("quarter_length") = 0.25)
        .def_property_readonly("size", &TenorGrid::size)
        .def_property_readonly("horizon", &TenorGrid::horizon)
        .def("time", &TenorGrid::time)
        .def("discount", &TenorGrid::discount)
        .def("interval_of", &TenorGrid::interval_of);

    py::class_<CdsSpec>(m, "CdsSpec")
        .def(py::init<int, double, double>(), py::arg("maturity_index"), py::arg("spread"),
             py::arg("notional") = 1.0)
        .def_readwrite("maturity_index", &CdsSpec::maturity_index)
        .def_readwrite("spread", &CdsSpec::spread)
        .def_readwrite("notional", &CdsSpec::notional);

    py::class_<MarketQuote>(m, "MarketQuote")
        .def(py::init<int, double, double>(), py::arg("maturity_index"), py::arg("upfront"),
             py::arg("spread"))
        .def_readwrite("maturity_index", &MarketQuote::maturity_index)
        .def_readwrite("upfront", &MarketQuote::upfront)
        .def_readwrite("spread", &MarketQuote::spread);

    py::class_<DefaultScenario>(m, "DefaultScenario")
        .def_static("survived", &DefaultScenario::survived)
        .def_static("default_at", &DefaultScenario::default_at)
        .def_readonly("defaulted", &DefaultScenario::defaulted)
        .def_readonly("tau", &DefaultScenario::tau)
        .def_readonly("rho", &DefaultScenario::rho);

    py::class_<HedgePortfolio>(m, "HedgePortfolio")
        .def_readonly("alphas", &HedgePortfolio::alphas)
        .def_readonly("deposit", &HedgePortfolio::deposit)
        .def_readonly("side", &HedgePortfolio::side)
        .def("total_notional", &HedgePortfolio::total_notional);

    py::class_<NoArbBounds>(m, "NoArbBounds")
        .def_readonly("v_lub", &NoArbBounds::v_lub)
        .def_readonly("v_glb", &NoArbBounds::v_glb)
        .def_readonly("hedge_lub", &NoArbBounds::hedge_lub)
        .def_readonly("hedge_glb", &NoArbBounds::hedge_glb);

    py::class_<Position>(m, "Position")
        .def_readonly("deposit", &Position::deposit)
        .def("pv", &Position::pv)
        .def("survived_pv", &Position::survived_pv);

    m.def("pathwise_pv", &pathwise_pv);
    m.def("annuity", &annuity, py::arg("grid"), py::arg("maturity_index"), py::arg("tau") = py::none());
    m.def("multi_cds_bounds", [](const TenorGrid& g, const CdsSpec& c, const std::vector<MarketQuote>& q) {
        return multi_cds_bounds(g, c, q);
    });
    m.def("vanilla_bounds", &vanilla_bounds);
    m.def("plain_vanilla_bounds", &plain_vanilla_bounds);
    m.def("dealer_illiquid", &dealer_illiquid);
    m.def("hedged_position",
          [](const CdsSpec& c, const std::vector<MarketQuote>& q, const HedgePortfolio& h) {
              return hedged_position(c, q, h);
          });

    py::class_<ConstraintSystem>(m, "ConstraintSystem")
        .def_readonly("B", &ConstraintSystem::B)
        .def_readonly("b", &ConstraintSystem::b)
        .def_readonly("c", &ConstraintSystem::c)
        .def_readonly("side", &ConstraintSystem::side);
    m.def("build_system", [](const TenorGrid& g, const CdsSpec& c, const std::vector<MarketQuote>& q,
                             Side s) { return build_system(g, c, q, s); });

    py::class_<LpSolution>(m, "LpSolution")
        .def_readonly("status", &LpSolution::status)
        .def_readonly("variables", &LpSolution::variables)
        .def_readonly("dual", &LpSolution::dual)
        .def_readonly("objective", &LpSolution::objective);
    m.def("solve", [](const ConstraintSystem& s) { return solve(s); });

    py::class_<DualityReport>(m, "DualityReport")
        .def_readonly("gap", &DualityReport::gap)
        .def_readonly("complementary_slackness", &DualityReport::complementary_slackness)
        .def_readonly("primal_violation", &DualityReport::primal_violation);
    m.def("check_duality", &check_duality);

    py::class_<ProbeReport>(m, "ProbeReport")
        .def_readonly("verdict", &ProbeReport::verdict)
        .def_readonly("trials", &ProbeReport::trials)
        .def_readonly("matched", &ProbeReport::matched)
        .def_readonly("max_deviation", &ProbeReport::max_deviation);
    m.def(
        "uniqueness_probe",
        [](const ConstraintSystem& s, const LpSolution& sol, int trials, double scale,
           std::uint64_t seed) { return uniqueness_probe(s, sol, {trials, scale, seed, 1e-6}); },
        py::arg("system"), py::arg("solution"), py::arg("trials") = 100, py::arg("scale") = 1e-7,
        py::arg("seed") = ProbeOptions{}.seed);

    py::class_<RecoveryDensity>(m, "RecoveryDensity")
        .def_static("truncated_normal",
                    [](double loc, double scale) { return RecoveryDensity(TruncatedNormal{loc, scale}); })
        .def_static("two_point",
                    [](double a, double b, double w) { return RecoveryDensity(TwoPoint{a, b, w}); })
        .def_static("tabulated", [](std::vector<double> g, std::vector<double> v) {
            return RecoveryDensity(Tabulated{std::move(g), std::move(v)});
        })
        .def_property_readonly("mean", &RecoveryDensity::mean)
        .def("cdf", &RecoveryDensity::cdf)
        .def("describe", &RecoveryDensity::describe);
    m.def("recovery_a", &recovery_a);
    m.def("recovery_b", &recovery_b);
    m.def("recovery_c", &recovery_c);

    py::class_<PhysicalMeasure>(m, "PhysicalMeasure")
        .def_readonly("hazard", &PhysicalMeasure::hazard)
        .def_readonly("horizon", &PhysicalMeasure::horizon);
    m.def("make_measure", &make_measure);
    m.def("survival_mass", &survival_mass);

    py::class_<Atom>(m, "Atom")
        .def_readonly("location", &Atom::location)
        .def_readonly("mass", &Atom::mass)
        .def_readonly("survival_mass", &Atom::survival_mass);
    py::class_<DensityCurve>(m, "DensityCurve")
        .def_readonly("abscissae", &DensityCurve::abscissae)
        .def_readonly("values", &DensityCurve::values)
        .def_readonly("atoms", &DensityCurve::atoms)
        .def_readonly("under_resolved", &DensityCurve::under_resolved)
        .def("total_mass", &DensityCurve::total_mass)
        .def("first_moment", &DensityCurve::first_moment);
    m.def(
        "mean_pv",
        [](const TenorGrid& g, const Position& p, const PhysicalMeasure& ms, bool full_2d) {
            return mean_pv(g, p, ms, {full_2d});
        },
        py::arg("grid"), py::arg("position"), py::arg("measure"), py::arg("full_2d") = false);
    m.def(
        "density",
        [](const TenorGrid& g, const Position& p, const PhysicalMeasure& ms, int n) {
            DensityOptions o;
            o.grid_size = n;
            return density(g, p, ms, o);
        },
        py::arg("grid"), py::arg("position"), py::arg("measure"), py::arg("grid_size") = 2001);
    py::class_<PvSamples>(m, "PvSamples")
        .def_readonly("defaulted", &PvSamples::defaulted)
        .def_readonly("survived", &PvSamples::survived);
    m.def("simulate_pv", &simulate_pv);
    m.def("ks_distance", &ks_distance);

    m.def("price_from_lambda", &price_from_lambda);
    m.def("price_from_rt", &price_from_rt);
    m.def("rt_from_price", [](Side s, double v, double mean, double price) {
        const auto r = rt_from_price(s, v, mean, price);
        return py::make_tuple(to_string(r.regime), r.r_t);
    });
    m.def("lmax_from_sharpe", &lmax_from_sharpe);
    m.def("price_from_sharpe", &price_from_sharpe);

    py::class_<SweepRow>(m, "SweepRow")
        .def_readonly("pd1", &SweepRow::pd1)
        .def_readonly("label", &SweepRow::label)
        .def_readonly("bid", &SweepRow::bid)
        .def_readonly("ask", &SweepRow::ask);
    m.def("robustness_sweep", [](const TenorGrid& g, const CdsSpec& c, const std::vector<MarketQuote>& q,
                                 const std::vector<double>& pd1,
                                 const std::vector<std::pair<std::string, RecoveryDensity>>& recs,
                                 double r_t) {
        std::vector<NamedRecovery> named;
        for (const auto& [label, rec] : recs)
            named.push_back({label, rec});
        return robustness_sweep(g, c, q, pd1, named, r_t);
    });

    m.def("command_names", &command_names);
    m.def(
        "run",
        [](const std::string& command, const std::filesystem::path& config,
           const std::filesystem::path& out, std::optional<std::uint64_t> seed, bool plots) {
            return run_command(command, load_config(config), out, RunOptions{seed, plots});
        },
        py::arg("command"), py::arg("config"), py::arg("out"), py::arg("seed") = py::none(),
        py::arg("plots") = false);
}
