// Command-line front end: configuration, solver dispatch and CSV/JSON output.
#pragma once

#include "stockloan/contracts.hpp"
#include "stockloan/problem.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace stockloan::cli {

inline constexpr int kSchemaVersion = 1;

enum class Solver { Lattice, FD, FSG, Oracle };
std::string to_string(Solver solver);
Solver solver_from_string(const std::string& name);

/// Flat run configuration. JSON keys are the snake_case field names; command
/// line flags are the same names in kebab-case.
struct RunConfig {
    double r = 0.06;
    double delta = 0.03;
    double sigma = 0.4;
    double principal = 0.7;
    double loan_rate = 0.1;
    double maturity = 1.0;
    int regime = 1;
    std::string variant = "standard";
    std::optional<double> cap;
    std::string solver = "lattice";
    double spot = 0.7;
    double accrued = 0.0;
    int steps = 2000;         // lattice
    int oracle_steps = 12;    // path tree
    int space_nodes = 400;    // fd / fsg
    int time_steps = 400;     // fd / fsg
    int a_nodes = 50;         // fsg
    double tol = 1e-7;        // boundary extraction, relative to K
    std::string output;       // empty: stdout
    std::string format = "csv";
    std::string axis;         // sweep
    std::vector<double> values;

    MarketParams market() const;
    LoanContract contract() const;
    LoanVariant loan_variant() const;
    Solver solver_kind() const;
    /// Throws UsageError for unsupported combinations (e.g. regime 4 on the lattice).
    void validate() const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

std::string to_json(const RunConfig& config);
/// Unknown keys and type mismatches are UsageErrors.
RunConfig from_json(const std::string& text);

/// Whether `solver` can price `regime` (capability table).
bool supports(Solver solver, DividendRegime regime);

/// Formats with 17 significant digits.
std::string format_number(double v);

/// Entry point used by the executable; returns the process exit code
/// (0 ok, 2 config/usage error, 3 solver failure).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stockloan::cli
