#pragma once

// Run configuration, quote-file ingestion, CSV output and the commands of the
// command-line tool.

#include "cdsbounds/market_model.hpp"
#include "cdsbounds/measure.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace cdsbounds {

/// One row of a quote file, in market units.
struct QuoteRow {
    double maturity_years = 0.0;
    double upfront_pct = 0.0;
    double spread_bp = 0.0;
};

/// Reads `maturity_years,upfront_pct,spread_bp` CSV; the header is mandatory.
std::vector<QuoteRow> parse_quote_csv(const std::string& text);
std::vector<QuoteRow> load_quote_csv(const std::filesystem::path& path);

struct RunConfig {
    double illiquid_maturity_years = 5.0;
    double illiquid_spread_bp = 100.0;
    double illiquid_notional = 1.0;

    std::vector<QuoteRow> quotes;            ///< after selection
    std::vector<double> selected_maturities; ///< empty: every row of the file

    double quarter_years = 0.25;
    double r_f = 0.02;

    double pd1 = 0.30;
    std::string recovery_kind = "A";
    TruncatedNormal truncated{};
    TwoPoint two_point{};
    Tabulated tabulated{};

    double r_t = 0.25;
    std::optional<double> s_r;

    std::uint64_t seed = 20240501;
    std::size_t mc_samples = 1'000'000;
    int delta_grid = 2001;
    int histogram_bins = 200;

    TenorGrid grid() const;
    CdsSpec illiquid() const;
    QuoteSet market() const;
    RecoveryDensity recovery() const;
    PhysicalMeasure measure() const;
};

/// Table 2 defaults with the bundled five quotes (1–5 years, 500 bp).
RunConfig default_config();

/// Flat `section.key = value` text; '#' starts a comment. Unknown keys and
/// malformed values raise ConfigError. Relative quote-file paths resolve
/// against `base_dir`.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

/// Quarter count of a maturity given in years; ConfigError unless whole.
int quarters_of(double years, double quarter_years);

/// Fixed 10-significant-digit rendering used in every CSV.
std::string format_number(double x);

using CsvCell = std::variant<double, std::string>;

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<CsvCell>> rows;

    void add(std::vector<CsvCell> row);
    std::string render() const;
    /// Index of a header column; ArgumentError when absent.
    std::size_t column(const std::string& name) const;
};

/// Writes via a temporary file and rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);

struct PlotSeries {
    std::string column;
    std::string label;
};

/// Line chart of table columns against `x_column` as a standalone SVG.
std::string render_svg(const CsvTable& table, const std::string& x_column,
                       const std::vector<PlotSeries>& series, const std::string& title);

struct RunOptions {
    std::optional<std::uint64_t> seed;
    bool plots = false;
};

enum ExitCode : int {
    exit_ok = 0,
    exit_config = 2,
    exit_lp = 3,
    exit_tolerance = 4,
};

const std::vector<std::string>& command_names();

/// Runs one command, writing its artifacts into `out_dir`. Throws on error;
/// see run_guarded for the exit-code mapping.
std::vector<std::filesystem::path> run_command(const std::string& command, const RunConfig& config,
                                               const std::filesystem::path& out_dir,
                                               const RunOptions& options = {});

/// Loads the config, runs the command and maps failures to exit codes,
/// reporting them on `err`.
int run_guarded(const std::string& command, const std::filesystem::path& config_path,
                const std::filesystem::path& out_dir, const RunOptions& options, std::ostream& err);

} // namespace cdsbounds
