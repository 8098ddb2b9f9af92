#include "cdsbounds/cli_app.hpp"
#include "cdsbounds/errors.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace cdsbounds;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

const fs::path kData = CDSB_DATA_DIR;

fs::path scratch_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("cdsbounds_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig parse(const std::string& text) { return parse_config(text, kData); }

} // namespace

TEST_CASE("quote files") {
    const auto rows = load_quote_csv(kData / "gm_quotes.csv");
    REQUIRE(rows.size() == 6);
    const double years[] = {1, 2, 3, 4, 5, 7};
    const double upfront[] = {5.25, 12.47, 18.08, 21.56, 24.05, 27.00};
    for (std::size_t k = 0; k < rows.size(); ++k) {
        CHECK(rows[k].maturity_years == years[k]);
        CHECK(rows[k].upfront_pct == upfront[k]);
        CHECK(rows[k].spread_bp == 500.0);
    }
    CHECK(parse_quote_csv("maturity_years,upfront_pct,spread_bp\n\n1, 5.25 ,500\n").size() == 1);
    CHECK_THROWS_AS(parse_quote_csv("years,upfront,spread\n1,5,500\n"), ConfigError);
    CHECK_THROWS_AS(parse_quote_csv("maturity_years,upfront_pct,spread_bp\n1,5\n"), ConfigError);
    CHECK_THROWS_AS(parse_quote_csv("maturity_years,upfront_pct,spread_bp\n1,x,500\n"), ConfigError);
    CHECK_THROWS_AS(parse_quote_csv(""), ConfigError);
    CHECK_THROWS_AS(load_quote_csv(kData / "missing.csv"), ConfigError);
}

TEST_CASE("bundled standard config") {
    const auto c = load_config(kData / "standard.cfg");
    const auto d = default_config();
    REQUIRE(c.quotes.size() == 5);
    for (std::size_t k = 0; k < 5; ++k) {
        CHECK(c.quotes[k].maturity_years == d.quotes[k].maturity_years);
        CHECK(c.quotes[k].upfront_pct == d.quotes[k].upfront_pct);
    }
    CHECK(c.illiquid_spread_bp == 100.0);
    CHECK(c.pd1 == 0.30);
    CHECK(c.r_t == 0.25);
    CHECK(c.seed == 20240501);
    CHECK(c.mc_samples == 1'000'000);
    const auto q = c.market();
    CHECK(q[4].maturity_index == 20);
    CHECK(q[4].upfront == Approx(0.2405).epsilon(1e-15));
    CHECK(q[4].spread == Approx(0.05).epsilon(1e-15));
    CHECK(c.illiquid().spread == Approx(0.01).epsilon(1e-15));
    CHECK(c.grid().size() == 20);
    CHECK(c.measure().recovery.mean() == Approx(0.19981146).epsilon(1e-7));
}

TEST_CASE("config parsing") {
    SUBCASE("comments and whitespace") {
        const auto c = parse("# header\n\n  measure.pd1 =0.45   # trailing\nrun.seed=7\n");
        CHECK(c.pd1 == 0.45);
        CHECK(c.seed == 7);
    }
    SUBCASE("inline quotes and selection") {
        const auto c = parse("market.quotes = 1:5.25:500; 3:18.08:500; 5:24.05:500\n"
                             "market.maturities_years = 5, 1\n");
        REQUIRE(c.quotes.size() == 2);
        CHECK(c.quotes[0].maturity_years == 1.0);
        CHECK(c.quotes[1].maturity_years == 5.0);
    }
    SUBCASE("recovery kinds") {
        CHECK(parse("measure.recovery = C\n").recovery().mean() == Approx(0.39895303).epsilon(1e-7));
        const auto tp = parse("measure.recovery = two_point\nmeasure.recovery_rho_a = 0\n"
                              "measure.recovery_rho_b = 0.4\nmeasure.recovery_weight = 0.5\n");
        CHECK(tp.recovery().mean() == Approx(0.2).epsilon(1e-15));
        const auto tab = parse("measure.recovery = tabulated\nmeasure.recovery_grid = 0, 0.5, 1\n"
                               "measure.recovery_values = 0, 1, 0\n");
        CHECK(tab.recovery().mean() == Approx(0.5).epsilon(1e-15));
        const auto tn = parse("measure.recovery = truncated_normal\nmeasure.recovery_location = 0.3\n"
                              "measure.recovery_scale = 0.1\n");
        CHECK(tn.recovery().mean() == Approx(0.3).epsilon(1e-2));
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(parse("measure.pd = 0.3\n"), ConfigError);
        CHECK_THROWS_AS(parse("measure.pd1 = 0.3\nmeasure.pd1 = 0.4\n"), ConfigError);
        CHECK_THROWS_AS(parse("measure.pd1 = thirty\n"), ConfigError);
        CHECK_THROWS_AS(parse("measure.pd1 = 1.5\n"), ConfigError);
        CHECK_THROWS_AS(parse("measure.pd1\n"), ConfigError);
        CHECK_THROWS_AS(parse("measure.recovery = D\n"), ConfigError);
        CHECK_THROWS_AS(parse("illiquid.maturity_years = 4.1\n"), ConfigError);
        CHECK_THROWS_AS(parse("market.maturities_years = 10\n"), ConfigError);
        CHECK_THROWS_AS(parse("market.quotes = 1:5.25\n"), ConfigError);
        CHECK_THROWS_AS(parse("market.quotes = 2:12:500; 1:5:500\n"), ConfigError);
        CHECK_THROWS_AS(parse("run.seed = -3\n"), ConfigError);
        CHECK_THROWS_AS(parse("run.delta_grid = 1\n"), ConfigError);
        CHECK_THROWS_AS(parse("gooddeal.r_t = -0.1\n"), ConfigError);
        CHECK_THROWS_AS(parse("illiquid.notional = 0\n"), ConfigError);
        CHECK_THROWS_AS(parse("market.quotes_file = nowhere.csv\n"), ConfigError);
        CHECK_THROWS_AS(load_config(kData / "missing.cfg"), ConfigError);
    }
    CHECK(quarters_of(5.0, 0.25) == 20);
    CHECK(quarters_of(0.75, 0.25) == 3);
    CHECK_THROWS_AS(quarters_of(0.1, 0.25), ConfigError);
}

TEST_CASE("csv rendering") {
    CHECK(format_number(0.3915242) == "0.3915242000");
    CHECK(format_number(1.0) == "1.000000000");
    CHECK(format_number(-0.0) == "0.000000000");
    CHECK(format_number(1234567.0) == "1234567.000");
    CHECK(format_number(1e-12) == "1.000000000e-12");
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");

    CsvTable t{{"x", "label"}, {}};
    t.add({1.5, std::string("a")});
    t.add({-2.0, std::string("b")});
    CHECK(t.render() == "x,label\n1.500000000,a\n-2.000000000,b\n");
    CHECK(t.column("label") == 1);
    CHECK_THROWS_AS(t.column("y"), ArgumentError);
    CHECK_THROWS_AS(t.add({1.0}), ArgumentError);

    const auto svg = render_svg(t, "x", {{"x", "identity"}}, "demo");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("identity") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("atomic writes") {
    const auto dir = scratch_dir("atomic");
    write_atomic(dir / "a.csv", "one\n");
    write_atomic(dir / "a.csv", "two\n");
    CHECK(slurp(dir / "a.csv") == "two\n");
    CHECK_FALSE(fs::exists(dir / "a.csv.tmp"));
    CHECK_THROWS(write_atomic(dir / "no_such_dir" / "a.csv", "x"));
}

TEST_CASE("hedge command") {
    const auto dir = scratch_dir("hedge");
    auto cfg = load_config(kData / "standard.cfg");
    const auto files = run_command("hedge", cfg, dir, {});
    REQUIRE(files.size() == 2);
    const auto hedge = slurp(dir / "hedge.csv");
    CHECK(hedge.rfind("side,alpha_1y,alpha_2y,alpha_3y,alpha_4y,alpha_5y,deposit,alpha_total,bound\n", 0) ==
          0);
    CHECK(hedge.find("lub,") != std::string::npos);
    CHECK(hedge.find("glb,") != std::string::npos);
    const auto probe = slurp(dir / "probe.csv");
    CHECK(probe.find("lub,unique,100") != std::string::npos);

    // notionals scale with the illiquid notional, bounds are per unit
    cfg.illiquid_notional = 2.0;
    const auto dir2 = scratch_dir("hedge2");
    run_command("hedge", cfg, dir2, {});
    const auto doubled = slurp(dir2 / "hedge.csv");
    CHECK(doubled != hedge);
    CHECK(doubled.find("2.000000000") != std::string::npos);

    CHECK_THROWS_AS(run_command("nope", cfg, dir, {}), ConfigError);
}

TEST_CASE("plots are optional") {
    const auto dir = scratch_dir("plots");
    const auto cfg = load_config(kData / "standard.cfg");
    run_command("bounds", cfg, dir, {std::nullopt, true});
    CHECK(fs::exists(dir / "bounds.csv"));
    CHECK(fs::exists(dir / "bounds.svg"));
    const auto dir2 = scratch_dir("noplots");
    run_command("bounds", cfg, dir2, {});
    CHECK_FALSE(fs::exists(dir2 / "bounds.svg"));
    CHECK(slurp(dir / "bounds.csv") == slurp(dir2 / "bounds.csv"));
}

TEST_CASE("exit codes") {
    const auto dir = scratch_dir("exit");
    std::ostringstream err;
    CHECK(run_guarded("hedge", kData / "standard.cfg", dir, {}, err) == exit_ok);
    CHECK(err.str().empty());
    CHECK(run_guarded("hedge", kData / "missing.cfg", dir, {}, err) == exit_config);
    CHECK(err.str().find("config error") != std::string::npos);

    const auto bad = dir / "arb.cfg";
    write_atomic(bad, "market.quotes = 1:-50:500; 5:24.05:500\n");
    std::ostringstream err2;
    CHECK(run_guarded("hedge", bad, dir, {}, err2) == exit_lp);
    CHECK(err2.str().find("LP failure") != std::string::npos);

    const auto nomatch = dir / "nomatch.cfg";
    write_atomic(nomatch, "market.maturities_years = 1, 2, 3, 4\n");
    std::ostringstream err3;
    CHECK(run_guarded("scalecheck", nomatch, dir, {}, err3) == exit_config);
    CHECK(command_names().size() == 6);
}
