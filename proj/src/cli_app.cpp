#include "cdsbounds/cli_app.hpp"

#include "cdsbounds/errors.hpp"
#include "cdsbounds/gooddeal.hpp"
#include "cdsbounds/hedging.hpp"
#include "cdsbounds/lattice.hpp"
#include "cdsbounds/lp_core.hpp"
#include "cdsbounds/valuation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>

namespace cdsbounds {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

double parse_double(const std::string& text, const std::string& what) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(v))
        throw ConfigError(fmt::format("{}: '{}' is not a number", what, text));
    return v;
}

std::uint64_t parse_uint(const std::string& text, const std::string& what) {
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc() || ptr != end)
        throw ConfigError(fmt::format("{}: '{}' is not a non-negative integer", what, text));
    return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    for (const auto& item : split(text, ','))
        out.push_back(parse_double(item, what));
    return out;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Table 1 row, maturities 1–5 years.
std::vector<QuoteRow> standard_quotes() {
    return {{1, 5.25, 500}, {2, 12.47, 500}, {3, 18.08, 500}, {4, 21.56, 500}, {5, 24.05, 500}};
}

} // namespace

// ---------------------------------------------------------------------------
// quotes and config

std::vector<QuoteRow> parse_quote_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<QuoteRow> rows;
    bool header = false;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = trim(line);
        if (t.empty())
            continue;
        if (!header) {
            if (t != "maturity_years,upfront_pct,spread_bp")
                throw ConfigError("quote file header must be 'maturity_years,upfront_pct,spread_bp'");
            header = true;
            continue;
        }
        const auto cells = split(t, ',');
        if (cells.size() != 3)
            throw ConfigError(fmt::format("quote file line {}: expected 3 fields", line_no));
        const auto where = fmt::format("quote file line {}", line_no);
        rows.push_back({parse_double(cells[0], where), parse_double(cells[1], where),
                        parse_double(cells[2], where)});
    }
    if (!header)
        throw ConfigError("quote file is empty");
    return rows;
}

std::vector<QuoteRow> load_quote_csv(const fs::path& path) { return parse_quote_csv(read_file(path)); }

int quarters_of(double years, double quarter_years) {
    const double q = years / quarter_years;
    const double r = std::round(q);
    if (r < 1.0 || std::abs(q - r) > 1e-9)
        throw ConfigError(fmt::format("maturity {} y is not a whole number of periods", years));
    return static_cast<int>(r);
}

TenorGrid RunConfig::grid() const {
    return grid_for(illiquid(), market(), r_f, quarter_years);
}

CdsSpec RunConfig::illiquid() const {
    return {quarters_of(illiquid_maturity_years, quarter_years), illiquid_spread_bp * 1e-4, 1.0};
}

QuoteSet RunConfig::market() const {
    QuoteSet out;
    for (const auto& row : quotes)
        out.push_back({quarters_of(row.maturity_years, quarter_years), row.upfront_pct * 1e-2,
                       row.spread_bp * 1e-4});
    return out;
}

RecoveryDensity RunConfig::recovery() const {
    if (recovery_kind == "A")
        return recovery_a();
    if (recovery_kind == "B")
        return recovery_b();
    if (recovery_kind == "C")
        return recovery_c();
    if (recovery_kind == "truncated_normal")
        return RecoveryDensity(truncated);
    if (recovery_kind == "two_point")
        return RecoveryDensity(two_point);
    if (recovery_kind == "tabulated")
        return RecoveryDensity(tabulated);
    throw ConfigError(fmt::format("unknown recovery kind '{}'", recovery_kind));
}

PhysicalMeasure RunConfig::measure() const {
    return make_measure(pd1, grid().horizon(), recovery());
}

RunConfig default_config() {
    RunConfig c;
    c.quotes = standard_quotes();
    return c;
}

RunConfig parse_config(const std::string& text, const fs::path& base_dir) {
    RunConfig c = default_config();
    std::optional<std::vector<QuoteRow>> file_rows;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;

    using Setter = std::function<void(const std::string&, const std::string&)>;
    const auto num = [](double& target) -> Setter {
        return [&target](const std::string& v, const std::string& k) { target = parse_double(v, k); };
    };
    const std::map<std::string, Setter> setters = {
        {"illiquid.maturity_years", num(c.illiquid_maturity_years)},
        {"illiquid.spread_bp", num(c.illiquid_spread_bp)},
        {"illiquid.notional", num(c.illiquid_notional)},
        {"market.quotes_file",
         [&](const std::string& v, const std::string&) {
             const fs::path p(v);
             file_rows = load_quote_csv(p.is_absolute() ? p : base_dir / p);
         }},
        {"market.quotes",
         [&](const std::string& v, const std::string& k) {
             // inline "years:upfront_pct:spread_bp; ..."
             std::vector<QuoteRow> rows;
             for (const auto& item : split(v, ';')) {
                 const auto f = split(item, ':');
                 if (f.size() != 3)
                     throw ConfigError(fmt::format("{}: expected years:upfront_pct:spread_bp", k));
                 rows.push_back({parse_double(f[0], k), parse_double(f[1], k), parse_double(f[2], k)});
             }
             file_rows = rows;
         }},
        {"market.maturities_years",
         [&](const std::string& v, const std::string& k) { c.selected_maturities = parse_list(v, k); }},
        {"grid.quarter_years", num(c.quarter_years)},
        {"grid.r_f", num(c.r_f)},
        {"measure.pd1", num(c.pd1)},
        {"measure.recovery", [&](const std::string& v, const std::string&) { c.recovery_kind = v; }},
        {"measure.recovery_location", num(c.truncated.location)},
        {"measure.recovery_scale", num(c.truncated.scale)},
        {"measure.recovery_rho_a", num(c.two_point.rho_a)},
        {"measure.recovery_rho_b", num(c.two_point.rho_b)},
        {"measure.recovery_weight", num(c.two_point.weight)},
        {"measure.recovery_grid",
         [&](const std::string& v, const std::string& k) { c.tabulated.grid = parse_list(v, k); }},
        {"measure.recovery_values",
         [&](const std::string& v, const std::string& k) { c.tabulated.values = parse_list(v, k); }},
        {"gooddeal.r_t", num(c.r_t)},
        {"gooddeal.s_r",
         [&](const std::string& v, const std::string& k) { c.s_r = parse_double(v, k); }},
        {"run.seed", [&](const std::string& v, const std::string& k) { c.seed = parse_uint(v, k); }},
        {"run.mc_samples",
         [&](const std::string& v, const std::string& k) { c.mc_samples = parse_uint(v, k); }},
        {"run.delta_grid",
         [&](const std::string& v, const std::string& k) {
             c.delta_grid = static_cast<int>(parse_uint(v, k));
         }},
        {"run.histogram_bins",
         [&](const std::string& v, const std::string& k) {
             c.histogram_bins = static_cast<int>(parse_uint(v, k));
         }},
    };

    std::map<std::string, int> seen;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        const auto t = trim(std::string_view(line).substr(0, hash));
        if (t.empty())
            continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(fmt::format("config line {}: expected key = value", line_no));
        const auto key = trim(std::string_view(t).substr(0, eq));
        const auto value = trim(std::string_view(t).substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end())
            throw ConfigError(fmt::format("config line {}: unknown key '{}'", line_no, key));
        if (seen.count(key))
            throw ConfigError(fmt::format("config line {}: duplicate key '{}'", line_no, key));
        seen[key] = line_no;
        it->second(value, key);
    }

    if (file_rows)
        c.quotes = *file_rows;
    if (!c.selected_maturities.empty()) {
        // a filter: rows keep their order in the quote source
        const auto selected = [&](double years) {
            return std::any_of(c.selected_maturities.begin(), c.selected_maturities.end(),
                               [&](double m) { return std::abs(years - m) < 1e-9; });
        };
        for (double m : c.selected_maturities)
            if (std::none_of(c.quotes.begin(), c.quotes.end(), [&](const QuoteRow& r) {
                    return std::abs(r.maturity_years - m) < 1e-9;
                }))
                throw ConfigError(fmt::format("no quote with maturity {} y", m));
        std::erase_if(c.quotes, [&](const QuoteRow& r) { return !selected(r.maturity_years); });
    }

    // validate eagerly so bad input maps to the config exit code
    try {
        if (c.quotes.empty())
            throw ConfigError("no market quotes");
        if (!(c.quarter_years > 0.0))
            throw ConfigError("grid.quarter_years must be positive");
        if (c.illiquid_notional == 0.0)
            throw ConfigError("illiquid.notional must be non-zero");
        if (c.delta_grid < 2 || c.histogram_bins < 1 || c.mc_samples < 1)
            throw ConfigError("run.delta_grid >= 2, run.histogram_bins >= 1, run.mc_samples >= 1");
        if (!(c.r_t >= 0.0))
            throw ConfigError("gooddeal.r_t must be non-negative");
        if (c.s_r && !(*c.s_r >= 0.0))
            throw ConfigError("gooddeal.s_r must be non-negative");
        validate_quotes(c.market());
        (void)c.illiquid();
        (void)c.measure();
    } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
    }
    return c;
}

RunConfig load_config(const fs::path& path) {
    return parse_config(read_file(path), path.parent_path());
}

// ---------------------------------------------------------------------------
// CSV and plots

std::string format_number(double x) {
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    if (x == 0.0)
        x = 0.0; // no "-0"
    return fmt::format("{:#.10g}", x);
}

void CsvTable::add(std::vector<CsvCell> row) {
    CDSB_REQUIRE(row.size() == header.size(), "CSV row width must match the header");
    rows.push_back(std::move(row));
}

std::string CsvTable::render() const {
    std::string out;
    for (std::size_t k = 0; k < header.size(); ++k)
        out += (k ? "," : "") + header[k];
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k)
                out += ',';
            if (const auto* d = std::get_if<double>(&row[k]))
                out += format_number(*d);
            else
                out += std::get<std::string>(row[k]);
        }
        out += '\n';
    }
    return out;
}

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    CDSB_REQUIRE(it != header.end(), "no CSV column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

void write_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out.flush())
            throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string render_svg(const CsvTable& table, const std::string& x_column,
                       const std::vector<PlotSeries>& series, const std::string& title) {
    constexpr double width = 720, height = 440, left = 70, right = 170, top = 40, bottom = 50;
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    const auto xi = table.column(x_column);
    const auto value = [&](const std::vector<CsvCell>& row, std::size_t col) {
        const auto* d = std::get_if<double>(&row[col]);
        return d ? *d : std::numeric_limits<double>::quiet_NaN();
    };

    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& row : table.rows) {
        const double x = value(row, xi);
        if (!std::isfinite(x))
            continue;
        for (const auto& s : series) {
            const double y = value(row, table.column(s.column));
            if (!std::isfinite(y))
                continue;
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
    if (!(x1 > x0)) {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if (!(y1 > y0)) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    const double pw = width - left - right, ph = height - top - bottom;
    const auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    const auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
        "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        "<text x=\"{2}\" y=\"24\" font-size=\"15\">{3}</text>\n"
        "<rect x=\"{4}\" y=\"{5}\" width=\"{6}\" height=\"{7}\" fill=\"none\" stroke=\"black\"/>\n",
        width, height, left, title, left, top, pw, ph);
    for (int t = 0; t <= 4; ++t) {
        const double fx = x0 + (x1 - x0) * t / 4.0, fy = y0 + (y1 - y0) * t / 4.0;
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.4g}</text>\n",
                           px(fx), top + ph + 18, fx);
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.4g}</text>\n",
                           left - 6, py(fy) + 4, fy);
    }
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n",
                       left + pw / 2, height - 10, x_column);
    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto col = table.column(series[s].column);
        const char* colour = palette[s % std::size(palette)];
        std::string pts;
        for (const auto& row : table.rows) {
            const double x = value(row, xi), y = value(row, col);
            if (std::isfinite(x) && std::isfinite(y))
                pts += fmt::format("{:.2f},{:.2f} ", px(x), py(y));
        }
        svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                           colour, pts);
        const double ly = top + 14 + 18.0 * static_cast<double>(s);
        svg += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" "
                           "stroke=\"{3}\" stroke-width=\"2\"/>\n"
                           "<text x=\"{4:.1f}\" y=\"{5:.1f}\">{6}</text>\n",
                           width - right + 12, ly, width - right + 36, colour, width - right + 42,
                           ly + 4, series[s].label);
    }
    svg += "</svg>\n";
    return svg;
}

// ---------------------------------------------------------------------------
// commands

namespace {

constexpr double kDualityTol = 1e-8;
constexpr double kMassTol = 1e-3;
constexpr double kScaleTol = 1e-8;
constexpr double kLinearityTol = 1e-10;

struct Context {
    const RunConfig& config;
    fs::path out_dir;
    RunOptions options;
    TenorGrid grid;
    CdsSpec illiquid;
    QuoteSet quotes;
    PhysicalMeasure measure;
    std::vector<fs::path> written;

    std::uint64_t seed() const { return options.seed.value_or(config.seed); }

    void emit(const std::string& name, const CsvTable& table) {
        const auto path = out_dir / name;
        write_atomic(path, table.render());
        written.push_back(path);
    }
    void plot(const std::string& name, const CsvTable& table, const std::string& x,
              const std::vector<PlotSeries>& series, const std::string& title) {
        if (!options.plots)
            return;
        const auto path = out_dir / name;
        write_atomic(path, render_svg(table, x, series, title));
        written.push_back(path);
    }
};

std::string years_label(double years) { return fmt::format("{:g}y", years); }

struct CheckedLp {
    ConstraintSystem system;
    LpSolution solution;
    DualityReport duality;
};

CheckedLp solve_checked(const TenorGrid& grid, const CdsSpec& illiquid,
                        std::span<const MarketQuote> quotes, Side side) {
    CheckedLp out{build_system(grid, illiquid, quotes, side), {}, {}};
    out.solution = solve(out.system);
    if (out.solution.status != LpStatus::optimal)
        throw LpFailure(out.solution.status,
                        fmt::format("{} hedge at w_old = {} bp", side == Side::lub ? "LUB" : "GLB",
                                    illiquid.spread * 1e4));
    out.duality = check_duality(out.system, out.solution);
    if (out.duality.gap > kDualityTol || out.duality.complementary_slackness > kDualityTol)
        throw ToleranceBreach(fmt::format("duality check failed: gap {:.3g}, slackness {:.3g}",
                                          out.duality.gap, out.duality.complementary_slackness));
    return out;
}

HedgePortfolio to_portfolio(const Eigen::VectorXd& v, Side side) {
    HedgePortfolio h;
    h.alphas.assign(v.data(), v.data() + v.size() - 1);
    h.deposit = v(v.size() - 1);
    h.side = side;
    return h;
}

std::optional<MarketQuote> matched_quote(const Context& ctx) {
    if (const auto p = matching_quote(ctx.illiquid, ctx.quotes))
        return ctx.quotes[*p];
    return std::nullopt;
}

CsvCell cell_or_blank(std::optional<double> v) {
    if (v)
        return *v;
    return std::string();
}

std::vector<double> w_old_sweep() {
    std::vector<double> w;
    for (int bp = 50; bp <= 900; bp += 50)
        w.push_back(bp);
    return w;
}

void cmd_bounds(Context& ctx) {
    const auto match = matched_quote(ctx);
    CsvTable t{{"w_old_bp", "v_lub", "v_glb", "vanilla_lub", "vanilla_glb", "plain_lub", "plain_glb",
                "duality_gap", "slackness"},
               {}};
    for (double bp : w_old_sweep()) {
        CdsSpec ill = ctx.illiquid;
        ill.spread = bp * 1e-4;
        const auto lub = solve_checked(ctx.grid, ill, ctx.quotes, Side::lub);
        const auto glb = solve_checked(ctx.grid, ill, ctx.quotes, Side::glb);
        std::optional<double> vl, vg, pl, pg;
        double gap = std::max(lub.duality.gap, glb.duality.gap);
        double cs = std::max(lub.duality.complementary_slackness, glb.duality.complementary_slackness);
        if (match) {
            const auto single = std::span<const MarketQuote>(&*match, 1);
            const auto l = solve_checked(ctx.grid, ill, single, Side::lub);
            const auto g = solve_checked(ctx.grid, ill, single, Side::glb);
            vl = l.solution.objective;
            vg = g.solution.objective;
            gap = std::max({gap, l.duality.gap, g.duality.gap});
            cs = std::max({cs, l.duality.complementary_slackness, g.duality.complementary_slackness});
            const auto pv = plain_vanilla_bounds(ctx.grid, ill, *match);
            pl = pv.v_lub;
            pg = pv.v_glb;
        }
        t.add({bp, lub.solution.objective, glb.solution.objective, cell_or_blank(vl),
               cell_or_blank(vg), cell_or_blank(pl), cell_or_blank(pg), gap, cs});
    }
    ctx.emit("bounds.csv", t);
    std::vector<PlotSeries> s{{"v_lub", "LUB multi"}, {"v_glb", "GLB multi"}};
    if (match) {
        s.push_back({"vanilla_lub", "LUB vanilla"});
        s.push_back({"vanilla_glb", "GLB vanilla"});
    }
    ctx.plot("bounds.svg", t, "w_old_bp", s, "No-arbitrage bounds vs illiquid spread");
}

void cmd_hedge(Context& ctx) {
    const double scale = std::abs(ctx.config.illiquid_notional);
    std::vector<std::string> header{"side"};
    for (const auto& q : ctx.config.quotes)
        header.push_back("alpha_" + years_label(q.maturity_years));
    for (const char* h : {"deposit", "alpha_total", "bound"})
        header.emplace_back(h);
    CsvTable hedge{header, {}};
    CsvTable probe{{"side", "verdict", "trials", "matched", "moved", "unbounded", "failed",
                    "max_deviation", "duality_gap", "slackness"},
                   {}};
    for (Side side : {Side::lub, Side::glb}) {
        const auto lp = solve_checked(ctx.grid, ctx.illiquid, ctx.quotes, side);
        const auto h = to_portfolio(lp.solution.variables, side);
        const char* name = side == Side::lub ? "lub" : "glb";
        std::vector<CsvCell> row{std::string(name)};
        for (double a : h.alphas)
            row.emplace_back(scale * a);
        row.emplace_back(scale * h.deposit);
        row.emplace_back(scale * h.total_notional());
        row.emplace_back(lp.solution.objective);
        hedge.add(std::move(row));

        const auto report = uniqueness_probe(lp.system, lp.solution);
        probe.add({std::string(name), to_string(report.verdict), double(report.trials),
                   double(report.matched), double(report.moved), double(report.unbounded),
                   double(report.failed), report.max_deviation, lp.duality.gap,
                   lp.duality.complementary_slackness});
    }
    ctx.emit("hedge.csv", hedge);
    ctx.emit("probe.csv", probe);
}

struct NamedPosition {
    std::string name;
    Position position;
    double loss_floor = 0.0; // discretization slack of LP hedges
};

std::vector<NamedPosition> density_positions(const Context& ctx) {
    std::vector<NamedPosition> out;
    const auto match = matched_quote(ctx);
    const MarketQuote single = match ? *match : ctx.quotes.back();
    out.push_back({"single", Position{0.0, {as_cds(single)}}, 0.0});

    const auto bounds = multi_cds_bounds(ctx.grid, ctx.illiquid, ctx.quotes);
    const double slack = midpoint_error_bound(ctx.grid);
    out.push_back({"multi_lub",
                   hedged_position(dealer_illiquid(ctx.illiquid, Side::lub), ctx.quotes, bounds.hedge_lub),
                   slack});
    out.push_back({"multi_glb",
                   hedged_position(dealer_illiquid(ctx.illiquid, Side::glb), ctx.quotes, bounds.hedge_glb),
                   slack});
    if (match) {
        const auto pv = plain_vanilla_bounds(ctx.grid, ctx.illiquid, *match);
        const auto one = std::span<const MarketQuote>(&*match, 1);
        out.push_back({"vanilla_lub",
                       hedged_position(dealer_illiquid(ctx.illiquid, Side::lub), one, pv.hedge_lub), 0.0});
        out.push_back({"vanilla_glb",
                       hedged_position(dealer_illiquid(ctx.illiquid, Side::glb), one, pv.hedge_glb), 0.0});
    }
    return out;
}

void cmd_density(Context& ctx) {
    CsvTable atoms{{"position", "source", "location", "mass", "survival_mass"}, {}};
    CsvTable summary{{"position", "mean_pv", "total_mass", "first_moment", "atom_mass", "mc_atom_mass",
                      "ks_distance", "iq_spread_1_99", "support_min", "support_max", "under_resolved"},
                     {}};
    std::uint64_t stream = 0;
    for (const auto& np : density_positions(ctx)) {
        DensityOptions opt;
        opt.grid_size = ctx.config.delta_grid;
        const auto curve = density(ctx.grid, np.position, ctx.measure, opt);
        const double mean = mean_pv(ctx.grid, np.position, ctx.measure);
        const auto samples =
            simulate_pv(ctx.grid, np.position, ctx.measure, ctx.config.mc_samples, ctx.seed() + stream++);
        const auto mc = histogram_density(samples, ctx.config.histogram_bins);

        if (std::abs(curve.total_mass() - 1.0) > kMassTol ||
            std::abs(curve.first_moment() - mean) > kMassTol)
            throw ToleranceBreach(fmt::format("{} density: mass {:.6f}, first moment {:.6f} vs mean {:.6f}",
                                              np.name, curve.total_mass(), curve.first_moment(), mean));

        CsvTable a{{"delta", "gamma1"}, {}};
        for (std::size_t k = 0; k < curve.abscissae.size(); ++k)
            a.add({curve.abscissae[k], curve.values[k]});
        ctx.emit("density_" + np.name + ".csv", a);
        ctx.plot("density_" + np.name + ".svg", a, "delta", {{"gamma1", "analytic"}},
                 "Payoff density: " + np.name);
        CsvTable m{{"delta", "gamma1"}, {}};
        for (std::size_t k = 0; k < mc.abscissae.size(); ++k)
            m.add({mc.abscissae[k], mc.values[k]});
        ctx.emit("density_" + np.name + "_mc.csv", m);

        for (const auto& at : curve.atoms)
            atoms.add({np.name, std::string("analytic"), at.location, at.mass, at.survival_mass});
        for (const auto& at : mc.atoms)
            atoms.add({np.name, std::string("mc"), at.location, at.mass, at.survival_mass});

        double survival = 0.0;
        for (const auto& at : curve.atoms)
            survival += at.survival_mass;
        const bool has_default = !samples.defaulted.empty() && curve.total_mass() - survival > 0.0;
        std::optional<double> ks, iq;
        if (has_default)
            ks = ks_distance(curve, samples);
        if (curve.continuous_mass() > 0.0)
            iq = interquantile_spread(curve);
        summary.add({np.name, mean, curve.total_mass(), curve.first_moment(), curve.atom_mass(),
                     mc.atom_mass(), cell_or_blank(ks), cell_or_blank(iq), curve.support_min,
                     curve.support_max, std::string(curve.under_resolved ? "yes" : "no")});
    }
    ctx.emit("density_atoms.csv", atoms);
    ctx.emit("density_summary.csv", summary);
}

std::vector<double> rt_grid() {
    std::vector<double> r;
    for (int k = 0; k <= 100; ++k)
        r.push_back(0.01 * k);
    return r;
}

struct SidePair {
    double v_lub, v_glb, mean_lub, mean_glb;
};

void cmd_gooddeal(Context& ctx) {
    const auto positions = density_positions(ctx);
    const auto find = [&](const std::string& name) -> const NamedPosition* {
        for (const auto& p : positions)
            if (p.name == name)
                return &p;
        return nullptr;
    };
    const auto match = matched_quote(ctx);
    const auto bounds = multi_cds_bounds(ctx.grid, ctx.illiquid, ctx.quotes);
    const SidePair multi{bounds.v_lub, bounds.v_glb,
                         mean_pv(ctx.grid, find("multi_lub")->position, ctx.measure),
                         mean_pv(ctx.grid, find("multi_glb")->position, ctx.measure)};
    std::optional<SidePair> vanilla;
    if (match) {
        const auto pv = plain_vanilla_bounds(ctx.grid, ctx.illiquid, *match);
        vanilla = SidePair{pv.v_lub, pv.v_glb,
                           mean_pv(ctx.grid, find("vanilla_lub")->position, ctx.measure),
                           mean_pv(ctx.grid, find("vanilla_glb")->position, ctx.measure)};
    }

    std::vector<std::string> header{"r_t"};
    std::vector<std::pair<std::string, SidePair>> hedges{{"multi", multi}};
    if (vanilla)
        hedges.emplace_back("vanilla", *vanilla);
    for (const auto& [name, _] : hedges)
        for (const char* col : {"ask", "bid", "spread", "lmax_ask", "lmax_bid", "sr_ask", "sr_bid"})
            header.push_back(std::string(col) + "_" + name);
    CsvTable curves{header, {}};
    for (double r : rt_grid()) {
        std::vector<CsvCell> row{r};
        for (const auto& [name, sp] : hedges) {
            const auto ask = good_deal_from_rt(Side::lub, sp.v_lub, sp.mean_lub, r);
            const auto bid = good_deal_from_rt(Side::glb, sp.v_glb, sp.mean_glb, r);
            row.insert(row.end(), {ask.price, bid.price, ask.price - bid.price, ask.l_max, bid.l_max,
                                   ask.s_r, bid.s_r});
        }
        curves.add(std::move(row));
    }
    ctx.emit("gooddeal_curves.csv", curves);
    {
        std::vector<PlotSeries> s;
        for (const auto& [name, _] : hedges) {
            s.push_back({"ask_" + name, "ask " + name});
            s.push_back({"bid_" + name, "bid " + name});
        }
        ctx.plot("gooddeal_prices.svg", curves, "r_t", s, "Good-deal bid and ask vs expected return");
        s.clear();
        for (const auto& [name, _] : hedges) {
            s.push_back({"lmax_ask_" + name, "L_max ask " + name});
            s.push_back({"lmax_bid_" + name, "L_max bid " + name});
        }
        ctx.plot("gooddeal_capital.svg", curves, "r_t", s, "Capital at risk vs expected return");
    }

    const auto point = [&](Side side, const SidePair& sp) {
        const double v = side == Side::lub ? sp.v_lub : sp.v_glb;
        const double m = side == Side::lub ? sp.mean_lub : sp.mean_glb;
        return ctx.config.s_r ? good_deal_from_sharpe(side, v, m, *ctx.config.s_r)
                              : good_deal_from_rt(side, v, m, ctx.config.r_t);
    };
    CsvTable quotes{{"hedge", "side", "v_bound", "mean_pv", "u_min", "u_max", "lambda", "r_t", "price",
                     "l_max", "s_r", "loss_prob", "cond_loss", "worst_loss"},
                    {}};
    for (const auto& [name, sp] : hedges)
        for (Side side : {Side::lub, Side::glb}) {
            const auto g = point(side, sp);
            const auto* np = find(name + (side == Side::lub ? "_lub" : "_glb"));
            DensityOptions opt;
            opt.grid_size = ctx.config.delta_grid;
            const auto curve = density(ctx.grid, np->position, ctx.measure, opt);
            const auto risk = risk_summary(curve, g.lambda, g.mean_pv, np->loss_floor);
            quotes.add({name, std::string(side == Side::lub ? "ask" : "bid"), g.v_bound, g.mean_pv,
                        g.u_min, g.u_max, g.lambda, g.r_t, g.price, g.l_max, g.s_r, risk.loss_prob,
                        cell_or_blank(risk.cond_loss), risk.worst_loss});
        }
    ctx.emit("gooddeal_quotes.csv", quotes);

    std::vector<std::string> wh{"w_old_bp", "ask_multi", "bid_multi"};
    if (match) {
        wh.emplace_back("ask_vanilla");
        wh.emplace_back("bid_vanilla");
    }
    CsvTable wold{wh, {}};
    for (double bp : w_old_sweep()) {
        CdsSpec ill = ctx.illiquid;
        ill.spread = bp * 1e-4;
        const auto b = multi_cds_bounds(ctx.grid, ill, ctx.quotes);
        const auto [ml, mg] = side_means(ctx.grid, ill, ctx.quotes, b, ctx.measure);
        const SidePair sp{b.v_lub, b.v_glb, ml, mg};
        std::vector<CsvCell> row{bp, point(Side::lub, sp).price, point(Side::glb, sp).price};
        if (match) {
            const auto one = std::span<const MarketQuote>(&*match, 1);
            const auto pv = plain_vanilla_bounds(ctx.grid, ill, *match);
            const auto [vl, vg] = side_means(ctx.grid, ill, one, pv, ctx.measure);
            const SidePair vp{pv.v_lub, pv.v_glb, vl, vg};
            row.emplace_back(point(Side::lub, vp).price);
            row.emplace_back(point(Side::glb, vp).price);
        }
        wold.add(std::move(row));
    }
    ctx.emit("gooddeal_wold.csv", wold);
    std::vector<PlotSeries> s{{"ask_multi", "ask multi"}, {"bid_multi", "bid multi"}};
    if (match) {
        s.push_back({"ask_vanilla", "ask vanilla"});
        s.push_back({"bid_vanilla", "bid vanilla"});
    }
    ctx.plot("gooddeal_wold.svg", wold, "w_old_bp", s, "Good-deal quotes vs illiquid spread");
}

void cmd_sweep(Context& ctx) {
    std::vector<double> pd1;
    for (int k = 0; k <= 8; ++k)
        pd1.push_back(0.20 + 0.05 * k);
    const std::vector<NamedRecovery> recs{{"A", recovery_a()}, {"B", recovery_b()}, {"C", recovery_c()}};
    const auto rows = robustness_sweep(ctx.grid, ctx.illiquid, ctx.quotes, pd1, recs, ctx.config.r_t);

    CsvTable t{{"pd1", "recovery", "recovery_mean", "mean_lub", "mean_glb", "bid", "ask", "spread"}, {}};
    CsvTable wide{{"pd1", "bid_A", "ask_A", "bid_B", "ask_B", "bid_C", "ask_C"}, {}};
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& r = rows[k];
        const double rbar = recs[k % recs.size()].recovery.mean();
        if (!std::isfinite(r.bid) || !std::isfinite(r.ask))
            throw ToleranceBreach(fmt::format("non-finite quote at pd1 = {}", r.pd1));
        t.add({r.pd1, r.label, rbar, r.mean_lub, r.mean_glb, r.bid, r.ask, r.ask - r.bid});
    }
    for (std::size_t i = 0; i < pd1.size(); ++i) {
        std::vector<CsvCell> row{pd1[i]};
        for (std::size_t j = 0; j < recs.size(); ++j) {
            row.emplace_back(rows[i * recs.size() + j].bid);
            row.emplace_back(rows[i * recs.size() + j].ask);
        }
        wide.add(std::move(row));
    }
    ctx.emit("sweep.csv", t);
    ctx.emit("sweep_wide.csv", wide);
    ctx.plot("sweep.svg", wide, "pd1",
             {{"ask_A", "ask A"}, {"bid_A", "bid A"}, {"ask_B", "ask B"}, {"bid_B", "bid B"},
              {"ask_C", "ask C"}, {"bid_C", "bid C"}},
             "Bid and ask vs one-year default probability");
}

double sup_norm(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        d = std::max(d, std::abs(a[k] - b[k]));
    return d;
}

void cmd_scalecheck(Context& ctx) {
    const auto match = matched_quote(ctx);
    if (!match)
        throw UnsupportedStructure("scalecheck needs a market quote at the illiquid maturity");
    const double mu = match->spread >= ctx.illiquid.spread ? 1.0 : -1.0;
    const std::vector<double> widths{100.0, 200.0, 400.0};
    const auto one = std::span<const MarketQuote>(&*match, 1);

    CsvTable t{{"hedge", "side", "W_bp", "w_old_bp", "reduced_objective", "price", "mean_pv",
                "vprime_dev", "mean_linearity_dev", "gamma_supnorm", "atom_dev"},
               {}};
    double worst_v = 0.0, worst_g = 0.0, worst_m = 0.0;

    for (const std::string hedge : {"multi", "vanilla"})
        for (Side side : {Side::lub, Side::glb}) {
            const auto ill_at = [&](double w_bp) {
                CdsSpec ill = ctx.illiquid;
                ill.spread = match->spread - mu * w_bp * 1e-4;
                CDSB_REQUIRE(ill.spread >= 0.0, "scalecheck widths need w_old >= 0");
                return ill;
            };
            const auto position_at = [&](double w_bp, Eigen::VectorXd* v_prime, double* objective,
                                         double* price) {
                const CdsSpec ill = ill_at(w_bp);
                if (hedge == "multi") {
                    const auto s = reduce_to_scaled(ctx.grid, ill, ctx.quotes, side);
                    *v_prime = s.v_prime;
                    *objective = s.reduced_objective;
                    *price = s.price();
                    return hedged_position(dealer_illiquid(ill, side), ctx.quotes, s.hedge());
                }
                const auto pv = plain_vanilla_bounds(ctx.grid, ill, *match);
                const auto& h = side == Side::lub ? pv.hedge_lub : pv.hedge_glb;
                const double w = std::abs(match->spread - ill.spread);
                *v_prime = Eigen::VectorXd::Constant(1, (h.deposit) / w);
                *objective = (side == Side::lub ? pv.v_lub - match->upfront : match->upfront - pv.v_glb) / w;
                *price = side == Side::lub ? pv.v_lub : pv.v_glb;
                return hedged_position(dealer_illiquid(ill, side), one, h);
            };

            Eigen::VectorXd v0;
            double obj0 = 0.0, price0 = 0.0;
            const Position base = position_at(widths[0], &v0, &obj0, &price0);
            const double mean0 = mean_pv(ctx.grid, base, ctx.measure);
            DensityOptions opt;
            opt.grid_size = ctx.config.delta_grid;
            for (double w : widths) {
                Eigen::VectorXd v;
                double obj = 0.0, price = 0.0;
                const Position pos = position_at(w, &v, &obj, &price);
                const double mean = mean_pv(ctx.grid, pos, ctx.measure);
                const double f = w / widths[0];
                const double vdev = (v - v0).cwiseAbs().maxCoeff();
                const double mdev = std::abs(mean - f * mean0);

                // Γ at W mapped back to W_0, against Γ at W_0 on the same abscissae
                const auto scaled = scale_density(density(ctx.grid, pos, ctx.measure, opt), f);
                DensityOptions at;
                at.abscissae = scaled.abscissae;
                const auto direct = density(ctx.grid, base, ctx.measure, at);
                const double gdev = sup_norm(scaled.values, direct.values);
                double adev = 0.0;
                for (std::size_t k = 0; k < std::min(scaled.atoms.size(), direct.atoms.size()); ++k)
                    adev = std::max({adev, std::abs(scaled.atoms[k].location - direct.atoms[k].location),
                                     std::abs(scaled.atoms[k].mass - direct.atoms[k].mass)});
                if (scaled.atoms.size() != direct.atoms.size())
                    adev = std::numeric_limits<double>::infinity();

                worst_v = std::max(worst_v, vdev);
                worst_g = std::max({worst_g, gdev, adev});
                worst_m = std::max(worst_m, mdev);
                t.add({hedge, std::string(side == Side::lub ? "lub" : "glb"), w,
                       ill_at(w).spread * 1e4, obj, price, mean, vdev, mdev, gdev, adev});
            }
        }
    ctx.emit("scalecheck.csv", t);
    if (worst_v > kScaleTol || worst_g > kScaleTol || worst_m > kLinearityTol)
        throw ToleranceBreach(fmt::format("scale invariance: v' {:.3g}, density {:.3g}, mean {:.3g}",
                                          worst_v, worst_g, worst_m));
}

} // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"bounds", "hedge", "density", "gooddeal", "sweep",
                                                "scalecheck"};
    return names;
}

std::vector<fs::path> run_command(const std::string& command, const RunConfig& config,
                                  const fs::path& out_dir, const RunOptions& options) {
    Context ctx{config, out_dir, options, config.grid(), config.illiquid(), config.market(),
                config.measure(), {}};
    fs::create_directories(out_dir);
    if (command == "bounds")
        cmd_bounds(ctx);
    else if (command == "hedge")
        cmd_hedge(ctx);
    else if (command == "density")
        cmd_density(ctx);
    else if (command == "gooddeal")
        cmd_gooddeal(ctx);
    else if (command == "sweep")
        cmd_sweep(ctx);
    else if (command == "scalecheck")
        cmd_scalecheck(ctx);
    else
        throw ConfigError(fmt::format("unknown command '{}'", command));
    return ctx.written;
}

int run_guarded(const std::string& command, const fs::path& config_path, const fs::path& out_dir,
                const RunOptions& options, std::ostream& err) {
    try {
        const RunConfig config = load_config(config_path);
        run_command(command, config, out_dir, options);
        return exit_ok;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const ArgumentError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const UnsupportedStructure& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const LpFailure& e) {
        err << "LP failure: " << e.what() << '\n';
        return exit_lp;
    } catch (const ToleranceBreach& e) {
        err << "self-check failed: " << e.what() << '\n';
        return exit_tolerance;
    }
}

} // namespace cdsbounds
