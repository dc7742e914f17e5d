// bbr: command-line driver for kernels, evolution, entanglement, scans, t1 and the mode sum

#include <chrono>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bbr/bbr.hpp"

namespace fs = std::filesystem;
using namespace bbr;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

// Flag help for every configuration key, with units.
const std::map<std::string, std::string>& key_help() {
    static const std::map<std::string, std::string> h{
        {"temperature_K", "bath temperature in K (0 selects the vacuum)"},
        {"dipole_nm", "dipole length d in nm"},
        {"dipole_m", "dipole length d in m"},
        {"separation_m", "separation R in m"},
        {"t0_over_tau", "light travel time R/c0 in units of tau (sets R)"},
        {"y_max", "dimensionless cutoff omega_max tau (sets omega_max)"},
        {"omega_max_eV", "cutoff energy hbar omega_max in eV"},
        {"omega_max_rad_s", "cutoff frequency omega_max in rad/s"},
        {"gamma", "sin-wave bath coupling fraction in [0, 1]"},
        {"cutoff_kind", "sharp | power_law"},
        {"cutoff_p", "power-law exponent p > 2"},
        {"t_over_tau", "time t in units of tau"},
        {"t_seconds", "time t in s"},
        {"temperature_mode", "thermal | coth_one | zero_t"},
        {"strategy", "auto | quadrature | closed_form | long_time"},
        {"oscillation_budget", "largest y_max max(t, t0) integrated by quadrature"},
        {"state", "path of a 4x4 density matrix CSV with a+bi entries"},
        {"grid_x_min", "first x coordinate (axis units)"},
        {"grid_x_max", "last x coordinate (axis units)"},
        {"grid_nx", "number of x points"},
        {"grid_y_min", "first y coordinate (axis units)"},
        {"grid_y_max", "last y coordinate (axis units)"},
        {"grid_ny", "number of y points"},
        {"alpha0", "fine-structure constant used by the asymptotic map"},
        {"t1_seconds", "target time t1 in s; predict-t1 then solves for R"},
        {"search_max_decades", "find-t1 window end, log10(t/t0)"},
        {"points_per_decade", "find-t1 coarse grid density"},
        {"u1", "unit dipole direction of system 1, x,y,z"},
        {"u2", "unit dipole direction of system 2, x,y,z"},
        {"box_ratio", "mode-sum box edge L in units of R"},
        {"n_max", "mode-sum lattice half-width"},
        {"convergence", "1 adds an R sweep at R, 2R, 5R, 10R"},
    };
    return h;
}

std::string iso_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Options {
    std::string config_path;
    std::string out_dir;
    unsigned threads = default_threads();
    std::string format = "both";
    std::map<std::string, std::string> flags; // key -> value given on the command line
};

/// Collects results and writes them plus the manifest.
class Run {
public:
    Run(std::string subcommand, const Options& o) : sub_(std::move(subcommand)), opt_(o), start_(iso_now()) {
        t0_ = std::chrono::steady_clock::now();
        KeyValues kv;
        if (!o.config_path.empty()) kv = parse_key_values(read_file(o.config_path), o.config_path);
        config_ = Config(kv);
        KeyValues overrides;
        for (const auto& [k, v] : o.flags) overrides[k] = v;
        config_.merge(overrides);
        echo_ = config_;
    }

    const Config& config() const { return config_; }
    Config& config() { return config_; }
    unsigned threads() const { return opt_.threads; }
    bool writes_files() const { return !opt_.out_dir.empty(); }
    bool want(const std::string& fmt) const { return opt_.format == "both" || opt_.format == fmt; }

    PhysicalParams params() {
        const auto p = physical_params(config_);
        echo_ = canonical_config(echo_, p);
        result_["derived"] = derived_json(p);
        return p;
    }
    json& result() { return result_; }
    void warn(const std::string& w) { warnings_.push_back(w); }

    void output(const std::string& name, const std::string& content) {
        if (!writes_files()) return;
        ensure_dir();
        write_file_atomic(fs::path(opt_.out_dir) / name, content);
        outputs_.push_back(name);
    }

    void finish() {
        if (!writes_files()) return;
        output("config.txt", format_key_values(echo_.values()));
        json m;
        m["tool"] = "bbr";
        m["version"] = kVersion;
        m["subcommand"] = sub_;
        m["constant_set"] = kConstantSetName;
        m["constants"] = constants_json();
        json cfg = json::object();
        for (const auto& [k, v] : echo_.values()) cfg[k] = v;
        m["config"] = cfg;
        m["threads"] = opt_.threads;
        m["format"] = opt_.format;
        m["started"] = start_;
        m["finished"] = iso_now();
        m["runtime_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
        m["outputs"] = outputs_;
        m["warnings"] = warnings_;
        for (auto it = result_.begin(); it != result_.end(); ++it) m[it.key()] = it.value();
        write_file_atomic(fs::path(opt_.out_dir) / "manifest.json", m.dump(2) + "\n");
    }

private:
    void ensure_dir() {
        std::error_code ec;
        fs::create_directories(opt_.out_dir, ec);
        if (ec) throw IoError("cannot create " + opt_.out_dir + ": " + ec.message());
    }

    std::string sub_;
    Options opt_;
    std::string start_;
    std::chrono::steady_clock::time_point t0_;
    Config config_, echo_;
    json result_ = json::object();
    std::vector<std::string> warnings_;
    std::vector<std::string> outputs_;
};

TemperatureMode parse_mode(const std::string& s) {
    if (s == "thermal") return TemperatureMode::Thermal;
    if (s == "coth_one") return TemperatureMode::CothOne;
    if (s == "zero_t") return TemperatureMode::ZeroT;
    throw ConfigError("temperature_mode", "expected thermal, coth_one or zero_t, got '" + s + "'");
}

Strategy parse_strategy(const std::string& s) {
    if (s == "auto") return Strategy::AutoSelect;
    if (s == "quadrature") return Strategy::Quadrature;
    if (s == "closed_form") return Strategy::ClosedFormCothOne;
    if (s == "long_time") return Strategy::LongTimeAsymptote;
    throw ConfigError("strategy", "expected auto, quadrature, closed_form or long_time, got '" + s + "'");
}

/// Dimensionless kernel query from the physical configuration and t_over_tau | t_seconds.
KernelQuery kernel_query(Run& run, const PhysicalParams& p) {
    const Config& c = run.config();
    const auto d = derive_dimensionless(p);
    KernelQuery q;
    if (c.has("t_over_tau") == c.has("t_seconds"))
        throw ConfigError("t_over_tau", c.has("t_seconds") ? "conflicts with t_seconds" : "missing required key (or t_seconds)");
    if (c.has("t_over_tau")) {
        if (d.zero_temperature) throw ConfigError("t_over_tau", "needs temperature_K > 0; use t_seconds");
        q.t = c.number("t_over_tau");
    } else {
        q.t = c.number("t_seconds") / d.time_unit();
    }
    if (!(q.t >= 0.0)) throw ConfigError(c.has("t_over_tau") ? "t_over_tau" : "t_seconds", "must be >= 0");
    q.t0 = d.zero_temperature ? 1.0 : *d.t0_over_tau;
    q.y_max = d.y_max;
    q.cutoff = p.cutoff;
    q.temperature_mode = parse_mode(c.text_or("temperature_mode", d.zero_temperature ? "zero_t" : "thermal"));
    q.strategy = parse_strategy(c.text_or("strategy", "auto"));
    q.oscillation_budget = c.number_or("oscillation_budget", kDefaultOscillationBudget);
    if (!(q.oscillation_budget > 0.0)) throw ConfigError("oscillation_budget", "must be > 0");
    return q;
}

json kernels_json(const BathKernels& k, const KernelQuery& q, double A) {
    return {{"t", q.t},
            {"t0", q.t0},
            {"y_max", q.y_max},
            {"A", A},
            {"f1", k.f1},
            {"f2", k.f2},
            {"phi1", k.phi1},
            {"phi2", k.phi2},
            {"phi_minus", k.phi_minus},
            {"error_estimate", k.error_estimate},
            {"path", to_string(k.path)}};
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

int cmd_kernels(Run& run) {
    const auto p = run.params();
    const auto q = kernel_query(run, p);
    const auto k = evaluate_kernels(q);
    const auto j = kernels_json(k, q, derive_dimensionless(p).A);
    run.result()["kernels"] = j;
    print_json(j);
    run.output("kernels.json", j.dump(2) + "\n");
    return 0;
}

DensityMatrix4 state_from_config(const Config& c) {
    return c.has("state") ? read_state_csv(c.text("state")) : initial_product_state();
}

int cmd_evolve(Run& run) {
    const auto p = run.params();
    const auto q = kernel_query(run, p);
    const auto k = evaluate_kernels(q);
    const double A = derive_dimensionless(p).A;
    const auto r = evolve(state_from_config(run.config()), k, A, p.gamma);
    const double C = concurrence(r), E = eof_from_concurrence(C);
    const std::string csv = matrix_csv(r.matrix());
    std::cout << csv << "C=" << format_double(C) << " E=" << format_double(E) << "\n";
    run.result()["kernels"] = kernels_json(k, q, A);
    run.result()["concurrence"] = C;
    run.result()["eof"] = E;
    run.output("state.csv", csv);
    return 0;
}

int cmd_eof(Run& run) {
    if (!run.config().has("state")) throw ConfigError("state", "missing required key");
    const auto r = read_state_csv(run.config().text("state"));
    const double C = concurrence(r), E = eof_from_concurrence(C);
    std::cout << "C=" << format_double(C) << " E=" << format_double(E) << "\n";
    run.result()["concurrence"] = C;
    run.result()["eof"] = E;
    return 0;
}

void write_grid(Run& run, const std::string& stem, const ScanGrid& g) {
    if (run.want("csv")) run.output(stem + ".csv", grid_csv(g));
    if (run.want("pgm")) run.output(stem + ".pgm", grid_pgm(g));
    json h = json::object();
    for (const auto& [k, v] : g.histogram()) h[k] = v;
    run.result()["strategy_histogram"] = h;
    run.result()["failed_cells"] = g.diagnostics.size();
    for (const auto& d : g.diagnostics) run.warn(d);
    double mx = 0.0;
    for (double v : g.values)
        if (!std::isnan(v)) mx = std::max(mx, v);
    run.result()["grid_max"] = mx;
    std::cout << stem << ": " << g.x_axis.n << "x" << g.y_axis.n << " cells, max EoF " << format_double(mx) << ", "
              << g.diagnostics.size() << " failed\n";
}

void report_onset(Run& run, const ScanGrid& g) {
    try {
        const auto f = fit_onset(g, 0.01);
        run.result()["onset_fit"] = {{"threshold", 0.01}, {"slope", f.slope}, {"intercept", f.intercept},
                                     {"columns", f.x.size()}};
        std::cout << "onset EoF=0.01: slope " << format_double(f.slope) << ", intercept " << format_double(f.intercept)
                  << " (" << f.x.size() << " columns)\n";
    } catch (const SearchError& e) {
        run.warn(std::string("onset fit: ") + e.what());
    }
}

int cmd_scan_fig1(Run& run) {
    const auto p = run.params();
    Fig1Spec s;
    apply_grid_keys(run.config(), s.x, s.y);
    s.oscillation_budget = run.config().number_or("oscillation_budget", kScanOscillationBudget);
    const auto g = scan_fig1(p, s, run.threads());
    write_grid(run, "fig1", g);
    report_onset(run, g);
    return 0;
}

int cmd_scan_fig2(Run& run) {
    Fig2Spec s;
    apply_grid_keys(run.config(), s.x, s.y);
    const double alpha0 = run.config().number_or("alpha0", kCodata2018.alpha0);
    if (!(alpha0 > 0.0)) throw ConfigError("alpha0", "must be > 0");
    const auto g = scan_fig2(alpha0, s, run.threads());
    write_grid(run, "fig2", g);
    return 0;
}

int cmd_scan_fig3(Run& run) {
    Config& c = run.config();
    if (!c.has("separation_m") && !c.has("t0_over_tau")) c.set("t0_over_tau", "1e6");
    const auto p = run.params();
    Fig3Spec s;
    s.t0_over_tau = *derive_dimensionless(p).t0_over_tau;
    apply_grid_keys(c, s.x, s.y);
    if (s.x.min < 0.0 || s.x.max > 1.0) throw ConfigError("grid_x_min", "gamma axis must lie in [0, 1]");
    s.oscillation_budget = c.number_or("oscillation_budget", kScanOscillationBudget);
    const auto g = scan_fig3(p, s, run.threads());
    write_grid(run, "fig3", g);
    return 0;
}

double dipole_from(const Config& c) {
    if (c.has("dipole_nm") && c.has("dipole_m")) throw ConfigError("dipole_m", "conflicts with dipole_nm");
    const std::string key = c.has("dipole_m") ? "dipole_m" : "dipole_nm";
    const double d = c.number(key) * (key == "dipole_nm" ? 1e-9 : 1.0);
    if (!(d > 0.0)) throw ConfigError(key, "must be > 0");
    return d;
}

int cmd_predict_t1(Run& run) {
    const Config& c = run.config();
    if (c.has("t1_seconds")) {
        const double t1 = c.number("t1_seconds");
        if (!(t1 > 0.0)) throw ConfigError("t1_seconds", "must be > 0");
        const double R = separation_for_t1(t1, dipole_from(c));
        run.result()["separation_m"] = R;
        std::cout << "R=" << format_double(R) << " m (" << format_double(R / 1e3) << " km)\n";
        return 0;
    }
    const double t1 = predict_t1(run.params());
    run.result()["t1_seconds"] = t1;
    std::cout << "t1=" << format_double(t1) << " s\n";
    return 0;
}

int cmd_find_t1(Run& run) {
    const auto p = run.params();
    T1SearchSpec s;
    s.log10_max_over_t0 = run.config().number_or("search_max_decades", s.log10_max_over_t0);
    s.points_per_decade = run.config().integer_or("points_per_decade", s.points_per_decade);
    s.oscillation_budget = run.config().number_or("oscillation_budget", s.oscillation_budget);
    if (s.points_per_decade < 2) throw ConfigError("points_per_decade", "must be >= 2");
    const auto r = find_t1_numeric(p, s);
    const double pred = predict_t1(p);
    run.result()["t1"] = {{"t_seconds", r.t_seconds}, {"t_over_tau", r.t_over_tau}, {"eof", r.eof},
                          {"y_max_pinned", r.y_max_pinned}, {"evaluations", r.evaluations},
                          {"predicted_seconds", pred}, {"ratio", r.t_seconds / pred}};
    std::cout << "t1=" << format_double(r.t_seconds) << " s (EoF " << format_double(r.eof) << "), closed form "
              << format_double(pred) << " s, ratio " << format_double(r.t_seconds / pred) << "\n";
    return 0;
}

int cmd_eff_int(Run& run) {
    const Config& c = run.config();
    const double R = c.number_or("separation_m", 1e-6);
    if (!(R > 0.0)) throw ConfigError("separation_m", "must be > 0");
    const double d = c.has("dipole_nm") || c.has("dipole_m") ? dipole_from(c) : 10e-9;
    const Vec3 z{0.0, 0.0, 1.0};
    const Vec3 u1 = c.has("u1") ? c.vector3("u1") : z;
    const Vec3 u2 = c.has("u2") ? c.vector3("u2") : z;
    const double box = c.number_or("box_ratio", kDefaultBoxRatio);
    auto make = [&](double r) {
        auto cfg = default_mode_sum_config({0.0, 0.0, r}, u1, u2, d, box);
        if (c.has("n_max")) cfg.n_max = c.integer_or("n_max", cfg.n_max);
        return cfg;
    };
    try {
        make(R).validate();
    } catch (const GeometryError& e) {
        throw ConfigError(c.has("u1") || c.has("u2") ? "u1" : "box_ratio", e.what());
    }
    std::string csv = "R_m,L_m,n_max,eta_s,coefficient_J,analytic_J,rel_err\n";
    auto add = [&](const ConvergenceRow& r) {
        csv += format_double(r.R) + "," + format_double(r.L) + "," + std::to_string(r.n_max) + "," +
               format_double(r.eta) + "," + format_double(r.coefficient) + "," + format_double(r.analytic) + "," +
               format_double(r.rel_err) + "\n";
    };
    std::vector<ModeSumConfig> cfgs{make(R)};
    if (c.integer_or("convergence", 0) != 0)
        for (double f : {2.0, 5.0, 10.0}) cfgs.push_back(make(f * R));
    const auto table = convergence_study(cfgs, run.threads());
    for (const auto& r : table.rows) add(r);
    const auto& ex = table.rows[3];
    std::cout << "mode sum " << format_double(ex.coefficient) << " J, dipole form " << format_double(ex.analytic)
              << " J, relative error " << format_double(ex.rel_err) << "\n";
    run.result()["effective_interaction"] = {{"extrapolated_J", ex.coefficient}, {"analytic_J", ex.analytic},
                                             {"rel_err", ex.rel_err}};
    if (table.slope) {
        run.result()["effective_interaction"]["slope"] = *table.slope;
        std::cout << "log-log slope " << format_double(*table.slope) << "\n";
    }
    run.output("effint.csv", csv);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reservoir-induced entanglement by black-body radiation: kernels, evolution, scans and t1"};
    app.require_subcommand(1);
    Options opt;

    struct Sub {
        const char* name;
        const char* help;
        std::function<int(Run&)> fn;
        std::vector<std::string> keys;
    };
    const std::vector<std::string> phys{"temperature_K", "dipole_nm",       "dipole_m", "separation_m",
                                        "t0_over_tau",   "y_max",           "omega_max_eV",
                                        "omega_max_rad_s", "gamma",         "cutoff_kind", "cutoff_p"};
    auto with = [&](std::vector<std::string> extra) {
        std::vector<std::string> k = phys;
        k.insert(k.end(), extra.begin(), extra.end());
        return k;
    };
    const std::vector<std::string> grid{"grid_x_min", "grid_x_max", "grid_nx", "grid_y_min", "grid_y_max", "grid_ny"};
    std::vector<Sub> subs{
        {"kernels", "Evaluate f1, f2, phi1, phi2 and phi_minus at one time",
         cmd_kernels, with({"t_over_tau", "t_seconds", "temperature_mode", "strategy", "oscillation_budget"})},
        {"evolve", "Evolve a two-qubit state and report C and E", cmd_evolve,
         with({"t_over_tau", "t_seconds", "temperature_mode", "strategy", "oscillation_budget", "state"})},
        {"eof", "Concurrence and entanglement of formation of a state CSV", cmd_eof, {"state"}},
        {"scan-fig1", "EoF over log10(t0/tau) and log10(t/tau) at gamma = 1", cmd_scan_fig1,
         with({"grid_x_min", "grid_x_max", "grid_nx", "grid_y_min", "grid_y_max", "grid_ny", "oscillation_budget"})},
        {"scan-fig2", "Long-time EoF over v and phi_minus", cmd_scan_fig2,
         {"grid_x_min", "grid_x_max", "grid_nx", "grid_y_min", "grid_y_max", "grid_ny", "alpha0"}},
        {"scan-fig3", "EoF over gamma and log10(t/tau); t0/tau defaults to 1e6", cmd_scan_fig3,
         with({"grid_x_min", "grid_x_max", "grid_nx", "grid_y_min", "grid_y_max", "grid_ny", "oscillation_budget"})},
        {"predict-t1", "Closed-form t1, or the separation R for a given t1", cmd_predict_t1, with({"t1_seconds"})},
        {"find-t1", "Locate the first EoF maximum numerically", cmd_find_t1,
         with({"search_max_decades", "points_per_decade", "oscillation_budget"})},
        {"eff-int", "Mode-sum effective interaction against the dipole-dipole form", cmd_eff_int,
         {"separation_m", "dipole_nm", "dipole_m", "u1", "u2", "box_ratio", "n_max", "convergence"}},
    };

    std::map<std::string, std::string> values;
    std::string dipole_um;
    std::vector<std::pair<CLI::App*, const Sub*>> apps;
    for (const auto& s : subs) {
        CLI::App* sc = app.add_subcommand(s.name, s.help);
        sc->add_option("--config", opt.config_path, "flat key = value file; flags override its keys");
        sc->add_option("--out", opt.out_dir, "output directory for result files and manifest.json");
        sc->add_option("--threads", opt.threads, "worker threads for scans and mode sums")->check(CLI::PositiveNumber);
        sc->add_option("--format", opt.format, "grid output: csv | pgm | both")
            ->check(CLI::IsMember({"csv", "pgm", "both"}));
        for (const auto& k : s.keys) sc->add_option("--" + k, values[k], key_help().at(k));
        if (std::find(s.keys.begin(), s.keys.end(), "grid_nx") != s.keys.end()) {
            sc->add_option("--nx", values["grid_nx"], "alias of --grid_nx");
            sc->add_option("--ny", values["grid_ny"], "alias of --grid_ny");
        }
        if (std::string(s.name) == "predict-t1") {
            sc->add_option("--dipole-um", dipole_um, "dipole length d in micrometres");
            sc->add_option("--t1-seconds", values["t1_seconds"], "alias of --t1_seconds");
        }
        apps.emplace_back(sc, &s);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    for (const auto& [k, v] : values)
        if (!v.empty()) opt.flags[k] = v;
    if (!dipole_um.empty()) {
        const auto d = parse_double(dipole_um);
        if (!d) {
            std::cerr << "error: dipole-um: expected a number\n";
            return kExitConfig;
        }
        opt.flags["dipole_m"] = format_double(*d * 1e-6);
    }

    for (const auto& [sc, s] : apps) {
        if (!sc->parsed()) continue;
        try {
            Run run(s->name, opt);
            const int rc = s->fn(run);
            run.finish();
            return rc;
        } catch (const ConfigError& e) {
            std::cerr << "configuration error: " << e.what() << "\n";
            return kExitConfig;
        } catch (const StrategyRefused& e) {
            std::cerr << "strategy refused: " << e.what() << "\n";
            return kExitNumerical;
        } catch (const SearchError& e) {
            std::cerr << "search failed: " << e.what() << "\n";
            return kExitNumerical;
        } catch (const IoError& e) {
            std::cerr << "i/o error: " << e.what() << "\n";
            return kExitIo;
        } catch (const Error& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitConfig;
        }
    }
    return kExitConfig;
}
