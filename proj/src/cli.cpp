#include "stockloan/cli.hpp"

#include "stockloan/closedform.hpp"
#include "stockloan/fd1d.hpp"
#include "stockloan/fsg2d.hpp"
#include "stockloan/lattice1d.hpp"
#include "stockloan/oracle.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

namespace stockloan::cli {

using nlohmann::json;

std::string to_string(Solver solver) {
    switch (solver) {
    case Solver::Lattice: return "lattice";
    case Solver::FD: return "fd";
    case Solver::FSG: return "fsg";
    case Solver::Oracle: return "oracle";
    }
    return "unknown";
}

Solver solver_from_string(const std::string& name) {
    if (name == "lattice") return Solver::Lattice;
    if (name == "fd") return Solver::FD;
    if (name == "fsg") return Solver::FSG;
    if (name == "oracle") return Solver::Oracle;
    throw UsageError("unknown solver '" + name + "' (expected lattice|fd|fsg|oracle)");
}

bool supports(Solver solver, DividendRegime regime) {
    switch (solver) {
    case Solver::Lattice:
    case Solver::FD: return regime != DividendRegime::CashReturnedOnRedemption;
    case Solver::FSG: return regime == DividendRegime::CashReturnedOnRedemption;
    case Solver::Oracle: return true;
    }
    return false;
}

std::string format_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

MarketParams RunConfig::market() const { return {r, delta, sigma}; }

LoanContract RunConfig::contract() const {
    return {principal, loan_rate, maturity, regime_from_number(regime)};
}

LoanVariant RunConfig::loan_variant() const {
    if (variant == "standard") return LoanVariant::Standard;
    if (variant == "amortized") return LoanVariant::Amortized;
    if (variant == "withdrawable") return LoanVariant::Withdrawable;
    throw UsageError("unknown variant '" + variant + "' (expected standard|amortized|withdrawable)");
}

Solver RunConfig::solver_kind() const { return solver_from_string(solver); }

void RunConfig::validate() const {
    (void)market();
    const auto c = contract();
    const Solver s = solver_kind();
    const LoanVariant v = loan_variant();
    if (!supports(s, c.regime())) {
        throw UsageError("solver does not support regime: " + to_string(s) + " cannot price regime " +
                         std::to_string(regime));
    }
    if (v != LoanVariant::Standard) {
        if (s != Solver::Lattice && s != Solver::FD) throw UsageError("variants need the lattice or fd solver");
        if (c.regime() != DividendRegime::LenderKeeps) throw UsageError("variants are defined for regime 1");
        if (v == LoanVariant::Withdrawable && !(cap && *cap > 0.0 && *cap < principal)) {
            throw UsageError("withdrawable variant needs cap L with 0 < L < principal");
        }
    }
    if (format != "csv" && format != "json") throw UsageError("format must be csv or json");
    if (!(spot > 0.0)) throw UsageError("spot must be > 0");
    if (!(accrued >= 0.0)) throw UsageError("accrued must be >= 0");
    if (!(tol > 0.0)) throw UsageError("tol must be > 0");
}

std::string to_json(const RunConfig& c) {
    json j;
    j["r"] = c.r;
    j["delta"] = c.delta;
    j["sigma"] = c.sigma;
    j["principal"] = c.principal;
    j["loan_rate"] = c.loan_rate;
    j["maturity"] = c.maturity;
    j["regime"] = c.regime;
    j["variant"] = c.variant;
    j["cap"] = c.cap ? json(*c.cap) : json(nullptr);
    j["solver"] = c.solver;
    j["spot"] = c.spot;
    j["accrued"] = c.accrued;
    j["steps"] = c.steps;
    j["oracle_steps"] = c.oracle_steps;
    j["space_nodes"] = c.space_nodes;
    j["time_steps"] = c.time_steps;
    j["a_nodes"] = c.a_nodes;
    j["tol"] = c.tol;
    j["output"] = c.output;
    j["format"] = c.format;
    j["axis"] = c.axis;
    j["values"] = c.values;
    return j.dump();
}

RunConfig from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw UsageError(std::string("malformed config: ") + e.what());
    }
    if (!j.is_object()) throw UsageError("config must be a JSON object");
    RunConfig c;
    try {
        for (const auto& [key, val] : j.items()) {
            if (key == "r") c.r = val.get<double>();
            else if (key == "delta") c.delta = val.get<double>();
            else if (key == "sigma") c.sigma = val.get<double>();
            else if (key == "principal") c.principal = val.get<double>();
            else if (key == "loan_rate") c.loan_rate = val.get<double>();
            else if (key == "maturity") c.maturity = val.get<double>();
            else if (key == "regime") c.regime = val.get<int>();
            else if (key == "variant") c.variant = val.get<std::string>();
            else if (key == "cap") c.cap = val.is_null() ? std::nullopt : std::optional<double>(val.get<double>());
            else if (key == "solver") c.solver = val.get<std::string>();
            else if (key == "spot") c.spot = val.get<double>();
            else if (key == "accrued") c.accrued = val.get<double>();
            else if (key == "steps") c.steps = val.get<int>();
            else if (key == "oracle_steps") c.oracle_steps = val.get<int>();
            else if (key == "space_nodes") c.space_nodes = val.get<int>();
            else if (key == "time_steps") c.time_steps = val.get<int>();
            else if (key == "a_nodes") c.a_nodes = val.get<int>();
            else if (key == "tol") c.tol = val.get<double>();
            else if (key == "output") c.output = val.get<std::string>();
            else if (key == "format") c.format = val.get<std::string>();
            else if (key == "axis") c.axis = val.get<std::string>();
            else if (key == "values") c.values = val.get<std::vector<double>>();
            else throw UsageError("unknown config key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw UsageError(std::string("bad config value: ") + e.what());
    }
    return c;
}

namespace {

// ---------------------------------------------------------------- output

struct Table {
    std::string command;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> notes;  // emitted as '#' lines after the header
};

void write_csv(std::ostream& os, const Table& t, const RunConfig& c) {
    os << "# stockloan " << t.command << " schema_version=" << kSchemaVersion << '\n';
    os << "# config: " << to_json(c) << '\n';
    for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
    os << '\n';
    for (const auto& n : t.notes) os << "# notice: " << n << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << '\n';
    }
}

void write_json(std::ostream& os, const Table& t, const RunConfig& c) {
    json j;
    j["command"] = t.command;
    j["schema_version"] = kSchemaVersion;
    j["config"] = json::parse(to_json(c));
    j["columns"] = t.header;
    j["rows"] = t.rows;
    j["notices"] = t.notes;
    os << j.dump(2) << '\n';
}

void emit(const Table& t, const RunConfig& c, std::ostream& out) {
    std::ofstream file;
    std::ostream* os = &out;
    if (!c.output.empty()) {
        file.open(c.output, std::ios::binary);
        if (!file) throw UsageError("cannot open output file '" + c.output + "'");
        os = &file;
    }
    if (c.format == "json") {
        write_json(*os, t, c);
    } else {
        write_csv(*os, t, c);
    }
}

// ---------------------------------------------------------------- pricing

struct PriceReport {
    double value = 0.0;
    RegimeClassification classification;
    std::string grid;
    std::string diagnostics;
    std::optional<double> closed_form_value;
    std::string note;
    std::optional<BoundaryLevel> root_boundary;
};

LatticeConfig lattice_config(const RunConfig&, int steps) { return {steps, 8.0}; }

FDConfig fd_config(const RunConfig& c) {
    FDConfig f;
    f.space_nodes = c.space_nodes;
    f.time_steps = c.time_steps;
    return f;
}

FSG2DConfig fsg_config(const RunConfig& c) {
    FSG2DConfig f;
    f.space_nodes = c.space_nodes;
    f.a_nodes = c.a_nodes;
    f.time_steps = c.time_steps;
    return f;
}

Problem1D problem_for(const RunConfig& c) {
    return Problem1D::build(c.market(), c.contract(), c.loan_variant(), c.cap);
}

PricingResult1D run_lattice(const RunConfig& c, int steps) {
    const auto market = c.market();
    const auto contract = c.contract();
    const auto cfg = lattice_config(c, steps);
    switch (c.loan_variant()) {
    case LoanVariant::Amortized: return price_amortized(c.spot, market, contract, cfg);
    case LoanVariant::Withdrawable: return price_withdrawable(c.spot, market, contract, *c.cap, cfg);
    case LoanVariant::Standard: break;
    }
    return solve_lattice(problem_for(c), c.spot, cfg);
}

/// Dividends already delivered belong to the borrower in regime 3.
double delivered(const RunConfig& c) {
    return c.contract().regime() == DividendRegime::DeliveredImmediately ? c.accrued : 0.0;
}

PriceReport compute_price(const RunConfig& c) {
    c.validate();
    const auto market = c.market();
    const auto contract = c.contract();
    PriceReport rep;
    rep.classification = classify(market, contract);

    if (c.loan_variant() == LoanVariant::Standard && rep.classification.closed_form) {
        const auto kind = *rep.classification.closed_form;
        rep.note = "closed-form: " + std::string(to_string(kind));
        const double strike = contract.principal() * std::exp(contract.loan_rate() * contract.maturity());
        if (kind == ClosedFormKind::EuropeanCallEquivalent) {
            rep.closed_form_value = european_call(c.spot, contract.maturity(), market.with_delta(
                contract.regime() == DividendRegime::LenderKeeps ? market.delta() : 0.0), strike);
        } else if (kind == ClosedFormKind::ParityFormula) {
            rep.closed_form_value = parity_price_regime3(c.spot, contract.maturity(), market, contract) + c.accrued;
        }
    }

    switch (c.solver_kind()) {
    case Solver::Lattice: {
        const auto full = run_lattice(c, c.steps);
        rep.value = full.value + delivered(c);
        rep.grid = "steps=" + std::to_string(c.steps);
        if (c.steps >= 2) {
            const double half = run_lattice(c, c.steps / 2).value + delivered(c);
            rep.diagnostics = "half_steps_value=" + format_number(half) +
                              " change=" + format_number(std::abs(rep.value - half));
        }
        rep.root_boundary = extract_boundary(full.surface, c.tol).x_star.back();
        break;
    }
    case Solver::FD: {
        const auto problem = problem_for(c);
        const auto res = solve_vi(problem, c.spot, fd_config(c));
        rep.value = res.value + delivered(c);
        rep.grid = "space_nodes=" + std::to_string(c.space_nodes) + " time_steps=" + std::to_string(c.time_steps);
        const auto cr = residual_report(res.surface, problem, 1e-6 * contract.principal());
        rep.diagnostics = "psor_max_iterations=" + std::to_string(res.max_psor_iterations) +
                          " complementarity=" + format_number(cr.max_violation);
        rep.root_boundary = res.boundary.x_star.back();
        break;
    }
    case Solver::FSG: {
        const auto res = price_regime4(c.spot, c.accrued, market, contract, fsg_config(c));
        rep.value = res.value;
        rep.grid = "space_nodes=" + std::to_string(c.space_nodes) + " a_nodes=" + std::to_string(c.a_nodes) +
                   " time_steps=" + std::to_string(c.time_steps);
        rep.diagnostics = "substeps=" + std::to_string(res.substeps);
        break;
    }
    case Solver::Oracle: {
        if (c.loan_variant() != LoanVariant::Standard) throw UsageError("the oracle prices standard loans only");
        rep.value = oracle_price(contract.regime(), c.spot, c.accrued, market, contract, c.oracle_steps);
        rep.grid = "oracle_steps=" + std::to_string(c.oracle_steps);
        rep.diagnostics = "paths=" + std::to_string(1L << c.oracle_steps);
        break;
    }
    }
    return rep;
}

Table cmd_price(const RunConfig& c) {
    const auto rep = compute_price(c);
    Table t;
    t.command = "price";
    t.header = {"value", "classification", "closed_form", "closed_form_value", "solver", "grid", "diagnostics"};
    t.rows.push_back({format_number(rep.value), std::string(to_string(rep.classification.region)),
                      rep.classification.closed_form ? std::string(to_string(*rep.classification.closed_form)) : "",
                      rep.closed_form_value ? format_number(*rep.closed_form_value) : "", c.solver, rep.grid,
                      rep.diagnostics});
    if (!rep.note.empty()) t.notes.push_back(rep.note);
    return t;
}

Table cmd_boundary(const RunConfig& c) {
    c.validate();
    const auto market = c.market();
    const auto contract = c.contract();
    const auto cls = classify(market, contract);
    const Solver s = c.solver_kind();
    if (s == Solver::Oracle) throw UsageError("boundary extraction needs the lattice, fd or fsg solver");

    Table t;
    t.command = "boundary";
    const bool two_d = s == Solver::FSG;
    t.header = two_d ? std::vector<std::string>{"tau", "a", "x_star"} : std::vector<std::string>{"tau", "x_star"};
    if (c.loan_variant() == LoanVariant::Standard && !cls.has_redemption_boundary()) {
        std::string why = "redemption region is " + std::string(to_string(cls.region));
        if (cls.closed_form) why += " (closed-form: " + std::string(to_string(*cls.closed_form)) + ")";
        t.notes.push_back(why);
        return t;
    }
    if (two_d) {
        const auto res = price_regime4(c.spot, c.accrued, market, contract, fsg_config(c));
        const auto b = extract_boundary_surface(res.surface, c.tol);
        for (std::size_t k = 0; k < b.tau.size(); ++k) {
            for (std::size_t ia = 0; ia < b.a.size(); ++ia) {
                t.rows.push_back({format_number(b.tau[k]), format_number(b.a[ia]), b.x_star[k][ia].to_string()});
            }
        }
        return t;
    }
    const ValueSurface1D surface =
        s == Solver::Lattice ? run_lattice(c, c.steps).surface : solve_vi(problem_for(c), c.spot, fd_config(c)).surface;
    const auto b = extract_boundary(surface, c.tol);
    for (std::size_t k = 0; k < b.size(); ++k) {
        t.rows.push_back({format_number(b.tau[k]), b.x_star[k].to_string()});
    }
    return t;
}

Table cmd_perpetual(const RunConfig& c) {
    const auto market = c.market();
    const auto contract = c.contract();
    Table t;
    t.command = "perpetual";
    t.header = {"alpha_plus", "alpha_minus", "x_star_inf", "c1"};
    auto row = [&](const PerpetualResult& p) {
        t.rows.push_back({format_number(p.alpha_plus), format_number(p.alpha_minus), p.x_star_inf.to_string(),
                          p.c1 ? format_number(*p.c1) : ""});
    };
    switch (contract.regime()) {
    case DividendRegime::LenderKeeps: row(perpetual_regime1(market, contract)); break;
    case DividendRegime::ReinvestedReturnedOnRedemption: row(perpetual_regime2(market, contract)); break;
    case DividendRegime::DeliveredImmediately: {
        const auto p = perpetual_regime3(market, contract);
        t.rows.push_back({"", "", p.boundary().to_string(), ""});
        t.notes.push_back("perpetual value equals the stock price");
        break;
    }
    case DividendRegime::CashReturnedOnRedemption:
        throw UsageError("no perpetual closed form for cash dividends returned on redemption");
    }
    return t;
}

void set_axis(RunConfig& c, const std::string& axis, double v) {
    if (axis == "r") c.r = v;
    else if (axis == "delta") c.delta = v;
    else if (axis == "sigma") c.sigma = v;
    else if (axis == "principal") c.principal = v;
    else if (axis == "loan_rate") c.loan_rate = v;
    else if (axis == "maturity") c.maturity = v;
    else if (axis == "spot") c.spot = v;
    else if (axis == "accrued") c.accrued = v;
    else if (axis == "cap") c.cap = v;
    else throw UsageError("unknown sweep axis '" + axis + "'");
}

int thread_budget() {
    const char* env = std::getenv("STOCKLOAN_THREADS");
    if (!env || !*env) return 1;
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1) throw UsageError("STOCKLOAN_THREADS must be a positive integer");
    return static_cast<int>(std::min<long>(n, 256));
}

/// Evaluates f(i) for i in [0, n) on up to `threads` workers; results keep index order.
template <class T>
std::vector<T> parallel_map(std::size_t n, int threads, const std::function<T(std::size_t)>& f) {
    std::vector<T> out(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                out[i] = f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto count = static_cast<std::size_t>(std::max(1, threads));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < std::min(count, n); ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

Table cmd_sweep(const RunConfig& c) {
    if (c.axis.empty()) throw UsageError("sweep needs --axis");
    if (c.values.empty()) throw UsageError("sweep needs --values (or --from/--to/--count)");
    RunConfig probe = c;
    set_axis(probe, c.axis, c.values.front());

    Table t;
    t.command = "sweep";
    t.header = {c.axis, "value", "x_star_at_T"};
    const auto reports = parallel_map<PriceReport>(c.values.size(), thread_budget(), [&](std::size_t i) {
        RunConfig point = c;
        set_axis(point, c.axis, c.values[i]);
        return compute_price(point);
    });
    for (std::size_t i = 0; i < reports.size(); ++i) {
        t.rows.push_back({format_number(c.values[i]), format_number(reports[i].value),
                          reports[i].root_boundary ? reports[i].root_boundary->to_string() : ""});
    }
    return t;
}

RunConfig figure_config(const RunConfig& c, int which) {
    RunConfig f = c;
    f.r = 0.06;
    f.loan_rate = 0.1;
    f.delta = 0.03;
    f.principal = 0.7;
    f.sigma = which == 2 ? 0.15 : 0.4;
    f.maturity = which <= 2 ? 5.0 : 3.0;
    f.spot = f.principal;
    f.accrued = 0.0;
    f.variant = "standard";
    return f;
}

Table cmd_figure(const RunConfig& base, int which) {
    if (which < 1 || which > 4) throw UsageError("figure must be 1, 2, 3 or 4");
    RunConfig c = figure_config(base, which);
    Table t;
    t.command = "figure " + std::to_string(which);
    if (which <= 2) {
        t.header = {"curve", "tau", "x_star"};
        const std::size_t stride = std::max(1, c.steps / 100);
        for (int regime = 1; regime <= 3; ++regime) {
            c.regime = regime;
            c.solver = "lattice";
            const auto b = extract_boundary(run_lattice(c, c.steps).surface, c.tol);
            for (std::size_t k = 0; k < b.size(); k += stride) {
                t.rows.push_back({"x" + std::to_string(regime), format_number(b.tau[k]), b.x_star[k].to_string()});
            }
        }
        return t;
    }

    c.regime = 4;
    c.solver = "fsg";
    const auto res = price_regime4(c.spot, 0.0, c.market(), c.contract(), fsg_config(c));
    const auto b = extract_boundary_surface(res.surface, c.tol);
    if (which == 3) {
        t.header = {"tau", "a", "x_star"};
        for (std::size_t k = 0; k < b.tau.size(); ++k) {
            for (std::size_t ia = 0; ia < b.a.size(); ++ia) {
                t.rows.push_back({format_number(b.tau[k]), format_number(b.a[ia]), b.x_star[k][ia].to_string()});
            }
        }
        return t;
    }

    // Snapshots, with the reinvested-dividend boundary x₂*(τ) as the upper reference.
    RunConfig c2 = c;
    c2.regime = 2;
    c2.solver = "lattice";
    const auto b2 = extract_boundary(run_lattice(c2, c2.steps).surface, c2.tol);
    t.header = {"tau", "a", "x_star", "x2_star"};
    for (double snap : {0.25, 0.5, 1.0, 2.0, 3.0}) {
        const std::size_t k = res.surface.layer_near(snap);
        const std::size_t k2 = b2.index_near(snap);
        for (std::size_t ia = 0; ia < b.a.size(); ++ia) {
            t.rows.push_back({format_number(b.tau[k]), format_number(b.a[ia]), b.x_star[k][ia].to_string(),
                              b2.x_star[k2].to_string()});
        }
    }
    return t;
}

Table cmd_oracle_check(const RunConfig& c) {
    c.validate();
    if (c.loan_variant() != LoanVariant::Standard) throw UsageError("oracle-check covers standard loans only");
    const auto market = c.market();
    const auto contract = c.contract();
    const double oracle = oracle_price(contract.regime(), c.spot, c.accrued, market, contract, c.oracle_steps);
    double solver_value = 0.0;
    switch (c.solver_kind()) {
    case Solver::Lattice:
        solver_value = run_lattice(c, c.oracle_steps).value + delivered(c);
        break;
    case Solver::FD:
        solver_value = solve_vi(problem_for(c), c.spot, fd_config(c)).value + delivered(c);
        break;
    case Solver::FSG:
        solver_value = price_regime4(c.spot, c.accrued, market, contract, fsg_config(c)).value;
        break;
    case Solver::Oracle:
        solver_value = oracle;
        break;
    }
    Table t;
    t.command = "oracle-check";
    t.header = {"regime", "spot", "accrued", "oracle_steps", "oracle_value", "solver", "solver_value", "abs_diff"};
    t.rows.push_back({std::to_string(c.regime), format_number(c.spot), format_number(c.accrued),
                      std::to_string(c.oracle_steps), format_number(oracle), c.solver, format_number(solver_value),
                      format_number(std::abs(oracle - solver_value))});
    return t;
}

// ---------------------------------------------------------------- parsing

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Overrides {
    std::vector<std::function<void(RunConfig&)>> apply;
};

template <class T>
void bind_flag(CLI::App* app, Overrides& ov, const std::string& flag, T RunConfig::*field, std::shared_ptr<T> slot,
          const std::string& help) {
    CLI::Option* opt = app->add_option(flag, *slot, help);
    ov.apply.push_back([opt, slot, field](RunConfig& c) {
        if (opt->count() > 0) c.*field = *slot;
    });
}

void add_config_flags(CLI::App* app, Overrides& ov, std::string& config_path) {
    app->add_option("--config", config_path, "JSON config file; flags override its values");
    bind_flag(app, ov, "--r", &RunConfig::r, std::make_shared<double>(), "riskless rate");
    bind_flag(app, ov, "--delta", &RunConfig::delta, std::make_shared<double>(), "dividend yield");
    bind_flag(app, ov, "--sigma", &RunConfig::sigma, std::make_shared<double>(), "volatility");
    bind_flag(app, ov, "--principal", &RunConfig::principal, std::make_shared<double>(), "loan principal K");
    bind_flag(app, ov, "--loan-rate", &RunConfig::loan_rate, std::make_shared<double>(), "loan rate");
    bind_flag(app, ov, "--maturity", &RunConfig::maturity, std::make_shared<double>(), "maturity T in years");
    bind_flag(app, ov, "--regime", &RunConfig::regime, std::make_shared<int>(), "dividend regime 1..4");
    bind_flag(app, ov, "--variant", &RunConfig::variant, std::make_shared<std::string>(),
         "standard|amortized|withdrawable");
    bind_flag(app, ov, "--solver", &RunConfig::solver, std::make_shared<std::string>(), "lattice|fd|fsg|oracle");
    bind_flag(app, ov, "--spot", &RunConfig::spot, std::make_shared<double>(), "spot price at t=0");
    bind_flag(app, ov, "--accrued", &RunConfig::accrued, std::make_shared<double>(), "accrued dividends at t=0");
    bind_flag(app, ov, "--steps", &RunConfig::steps, std::make_shared<int>(), "lattice steps");
    bind_flag(app, ov, "--oracle-steps", &RunConfig::oracle_steps, std::make_shared<int>(), "path-tree steps (<= 14)");
    bind_flag(app, ov, "--space-nodes", &RunConfig::space_nodes, std::make_shared<int>(), "fd/fsg log-x nodes");
    bind_flag(app, ov, "--time-steps", &RunConfig::time_steps, std::make_shared<int>(), "fd/fsg time steps");
    bind_flag(app, ov, "--a-nodes", &RunConfig::a_nodes, std::make_shared<int>(), "fsg accrued-dividend nodes");
    bind_flag(app, ov, "--tol", &RunConfig::tol, std::make_shared<double>(), "boundary tolerance relative to K");
    bind_flag(app, ov, "--output", &RunConfig::output, std::make_shared<std::string>(), "output file (default stdout)");
    bind_flag(app, ov, "--format", &RunConfig::format, std::make_shared<std::string>(), "csv|json");
    auto cap = std::make_shared<double>();
    CLI::Option* cap_opt = app->add_option("--cap", *cap, "withdrawal price L");
    ov.apply.push_back([cap_opt, cap](RunConfig& c) {
        if (cap_opt->count() > 0) c.cap = *cap;
    });
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stock loan pricing engine"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;
    int figure_number = 0;
    std::string axis;
    std::vector<double> values;
    double from = 0.0, to = 0.0;
    int count = 0;

    auto* price = app.add_subcommand("price", "price a loan");
    auto* boundary = app.add_subcommand("boundary", "optimal redeeming boundary as CSV");
    auto* perpetual = app.add_subcommand("perpetual", "perpetual closed-form boundary");
    auto* sweep = app.add_subcommand("sweep", "value and boundary against one parameter");
    auto* figure = app.add_subcommand("figure", "regenerate the data behind a figure");
    auto* oracle = app.add_subcommand("oracle-check", "compare a solver with the path-tree oracle");
    // Subcommand options are parsed into one shared set of slots.
    for (auto* sub : {price, boundary, perpetual, sweep, figure, oracle}) {
        Overrides local;
        add_config_flags(sub, local, config_path);
        for (auto& f : local.apply) ov.apply.push_back(std::move(f));
    }
    sweep->add_option("--axis", axis, "parameter to sweep");
    auto* values_opt = sweep->add_option("--values", values, "comma-separated values")->delimiter(',');
    auto* from_opt = sweep->add_option("--from", from, "range start");
    sweep->add_option("--to", to, "range end");
    sweep->add_option("--count", count, "number of range points");
    figure->add_option("which", figure_number, "figure number 1-4")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        RunConfig c;
        if (!config_path.empty()) c = from_json(read_file(config_path));
        for (const auto& f : ov.apply) f(c);
        if (sweep->parsed()) {
            if (!axis.empty()) c.axis = axis;
            if (values_opt->count() > 0) c.values = values;
            if (from_opt->count() > 0) {
                if (count < 2) throw UsageError("--count must be >= 2 for a range");
                c.values.clear();
                for (int i = 0; i < count; ++i) c.values.push_back(from + (to - from) * i / (count - 1));
            }
        }
        if (c.format != "csv" && c.format != "json") throw UsageError("format must be csv or json");

        Table table;
        if (price->parsed()) table = cmd_price(c);
        else if (boundary->parsed()) table = cmd_boundary(c);
        else if (perpetual->parsed()) table = cmd_perpetual(c);
        else if (sweep->parsed()) table = cmd_sweep(c);
        else if (figure->parsed()) table = cmd_figure(c, figure_number);
        else table = cmd_oracle_check(c);
        emit(table, c, out);
        return 0;
    } catch (const UsageError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "solver failure: " << e.what() << '\n';
        return 3;
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, out, err);
}

}  // namespace stockloan::cli
