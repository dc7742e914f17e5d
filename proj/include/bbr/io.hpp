// io.hpp: number formatting, grid/state files, flat key=value configuration and run manifests

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "bbr/constants.hpp"
#include "bbr/effint.hpp"
#include "bbr/errors.hpp"
#include "bbr/params.hpp"
#include "bbr/scan.hpp"
#include "bbr/state.hpp"

namespace bbr {

// ---------------------------------------------------------------- numbers

/// Shortest decimal that round-trips to the same double; '.' separator regardless of locale.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

/// Parses a complete decimal number; returns nullopt on trailing garbage.
inline std::optional<double> parse_double(std::string_view s) {
    const std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    std::size_t start = t[0] == '+' ? 1 : 0;
    double v = 0.0;
    const auto r = std::from_chars(t.data() + start, t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size()) return std::nullopt;
    return v;
}

/// Formats as "a+bi" or "a-bi".
inline std::string format_complex(cplx z) {
    const bool neg = std::signbit(z.imag());
    return format_double(z.real()) + (neg ? "-" : "+") + format_double(std::abs(z.imag())) + "i";
}

/// Accepts "a", "bi", "a+bi", "a-bi", "i", "-i" with optional exponents.
inline std::optional<cplx> parse_complex(std::string_view s) {
    std::string t;
    for (char c : s)
        if (c != ' ' && c != '\t') t += c;
    if (t.empty()) return std::nullopt;
    if (t.back() != 'i' && t.back() != 'j') {
        const auto r = parse_double(t);
        return r ? std::optional<cplx>(cplx(*r, 0.0)) : std::nullopt;
    }
    t.pop_back();
    std::size_t split = std::string::npos;
    for (std::size_t i = t.size(); i-- > 1;)
        if ((t[i] == '+' || t[i] == '-') && t[i - 1] != 'e' && t[i - 1] != 'E') {
            split = i;
            break;
        }
    auto imag_of = [](const std::string& u) -> std::optional<double> {
        if (u.empty() || u == "+") return 1.0;
        if (u == "-") return -1.0;
        return parse_double(u);
    };
    if (split == std::string::npos) {
        const auto im = imag_of(t);
        return im ? std::optional<cplx>(cplx(0.0, *im)) : std::nullopt;
    }
    const auto re = parse_double(t.substr(0, split));
    const auto im = imag_of(t.substr(split));
    if (!re || !im) return std::nullopt;
    return cplx(*re, *im);
}

// ---------------------------------------------------------------- files

/// Writes via a temporary sibling and renames, so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open " + tmp + " for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!f) throw IoError("write failed for " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp + " to " + path.string() + ": " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

/// One row per cell: x coordinate, y coordinate, EoF, source.
inline std::string grid_csv(const ScanGrid& g) {
    std::string out = g.x_axis.name + "," + g.y_axis.name + ",eof,source\n";
    for (int iy = 0; iy < g.y_axis.n; ++iy)
        for (int ix = 0; ix < g.x_axis.n; ++ix) {
            out += format_double(g.x_axis.coordinate(ix));
            out += ',';
            out += format_double(g.y_axis.coordinate(iy));
            out += ',';
            out += format_double(g.at(ix, iy));
            out += ',';
            out += to_string(g.source(ix, iy));
            out += '\n';
        }
    return out;
}

inline constexpr std::uint8_t kPgmFailedCell = 127;

/// Binary PGM, 255 - round(255 EoF): black is maximal entanglement. The top row is the largest y.
inline std::string grid_pgm(const ScanGrid& g) {
    std::string out = "P5\n" + std::to_string(g.x_axis.n) + " " + std::to_string(g.y_axis.n) + "\n255\n";
    for (int iy = g.y_axis.n - 1; iy >= 0; --iy)
        for (int ix = 0; ix < g.x_axis.n; ++ix) {
            const double v = g.at(ix, iy);
            const std::uint8_t px = std::isnan(v)
                                        ? kPgmFailedCell
                                        : static_cast<std::uint8_t>(255 - std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
            out += static_cast<char>(px);
        }
    return out;
}

/// Four lines of four comma-separated complex entries; '#' starts a comment.
inline Matrix4c parse_matrix_csv(const std::string& text, const std::string& source = "state") {
    Matrix4c m;
    int row = 0;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        if (trim(line).empty()) continue;
        if (row == 4) throw ConfigError("state", source + ":" + std::to_string(lineno) + ": more than four rows");
        std::istringstream ls(line);
        std::string cell;
        int col = 0;
        while (std::getline(ls, cell, ',')) {
            const auto z = parse_complex(cell);
            if (!z || col == 4)
                throw ConfigError("state", source + ":" + std::to_string(lineno) + ": bad entry '" + trim(cell) + "'");
            m(row, col++) = *z;
        }
        if (col != 4) throw ConfigError("state", source + ":" + std::to_string(lineno) + ": expected four entries");
        ++row;
    }
    if (row != 4) throw ConfigError("state", source + ": expected four rows");
    return m;
}

inline DensityMatrix4 read_state_csv(const std::filesystem::path& path) {
    return DensityMatrix4::from_matrix(parse_matrix_csv(read_file(path), path.string()));
}

inline std::string matrix_csv(const Matrix4c& m) {
    std::string out;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) out += (c ? "," : "") + format_complex(m(r, c));
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------- configuration

using KeyValues = std::map<std::string, std::string>;

/// Flat "key = value" lines; '#' starts a comment. Duplicate keys are an error.
inline KeyValues parse_key_values(const std::string& text, const std::string& source = "config") {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
        if (!kv.emplace(key, trim(std::string_view(line).substr(eq + 1))).second)
            throw ConfigError(key, "given more than once");
    }
    return kv;
}

inline std::string format_key_values(const KeyValues& kv) {
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

/// Every key a configuration file may contain.
inline const std::set<std::string>& known_config_keys() {
    static const std::set<std::string> keys{
        // physical setup
        "temperature_K", "dipole_nm", "dipole_m", "separation_m", "t0_over_tau", "y_max", "omega_max_eV",
        "omega_max_rad_s", "gamma", "cutoff_kind", "cutoff_p",
        // kernel and evolution queries
        "t_over_tau", "t_seconds", "temperature_mode", "strategy", "oscillation_budget", "state",
        // grids
        "grid_x_min", "grid_x_max", "grid_nx", "grid_y_min", "grid_y_max", "grid_ny",
        // asymptotic map
        "alpha0",
        // t1
        "t1_seconds", "search_max_decades", "points_per_decade",
        // effective interaction
        "u1", "u2", "box_ratio", "n_max", "convergence"};
    return keys;
}

/// Typed access to a validated key set.
class Config {
public:
    Config() = default;
    explicit Config(KeyValues kv) : kv_(std::move(kv)) {
        for (const auto& [k, v] : kv_)
            if (!known_config_keys().count(k)) throw ConfigError(k, "unknown key");
    }

    const KeyValues& values() const { return kv_; }
    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    /// Later values replace earlier ones.
    void merge(const KeyValues& overrides) {
        for (const auto& [k, v] : overrides) {
            if (!known_config_keys().count(k)) throw ConfigError(k, "unknown key");
            kv_[k] = v;
        }
    }
    void set(const std::string& key, const std::string& value) { merge({{key, value}}); }
    void erase(const std::string& key) { kv_.erase(key); }

    std::string text(const std::string& key) const {
        const auto it = kv_.find(key);
        if (it == kv_.end()) throw ConfigError(key, "missing required key");
        return it->second;
    }
    std::string text_or(const std::string& key, const std::string& fallback) const {
        return has(key) ? text(key) : fallback;
    }
    double number(const std::string& key) const {
        const auto v = parse_double(text(key));
        if (!v || !std::isfinite(*v)) throw ConfigError(key, "expected a finite number, got '" + text(key) + "'");
        return *v;
    }
    double number_or(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }
    int integer_or(const std::string& key, int fallback) const {
        if (!has(key)) return fallback;
        const double v = number(key);
        if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(key, "expected an integer");
        return static_cast<int>(v);
    }
    /// "x,y,z"
    Vec3 vector3(const std::string& key) const {
        std::istringstream in(text(key));
        std::string part;
        double v[3];
        int n = 0;
        while (std::getline(in, part, ',')) {
            const auto x = parse_double(part);
            if (!x || n == 3) throw ConfigError(key, "expected three comma-separated numbers");
            v[n++] = *x;
        }
        if (n != 3) throw ConfigError(key, "expected three comma-separated numbers");
        return {v[0], v[1], v[2]};
    }

private:
    KeyValues kv_;
};

/// Builds validated physical parameters. Exactly one key of each group must be present:
/// dipole_nm | dipole_m, separation_m | t0_over_tau, y_max | omega_max_eV | omega_max_rad_s.
inline PhysicalParams physical_params(const Config& c, const PhysicalConstants& k = kCodata2018) {
    auto one_of = [&](std::initializer_list<const char*> keys) -> std::string {
        std::string found;
        for (const char* key : keys)
            if (c.has(key)) {
                if (!found.empty()) throw ConfigError(key, "conflicts with " + found);
                found = key;
            }
        if (found.empty()) throw ConfigError(*keys.begin(), "missing required key");
        return found;
    };
    PhysicalParams p;
    p.temperature_K = c.number("temperature_K");
    if (p.temperature_K < 0.0) throw ConfigError("temperature_K", "must be >= 0");
    const bool finite_t = p.temperature_K > 0.0;

    const std::string dk = one_of({"dipole_nm", "dipole_m"});
    p.dipole_m = c.number(dk) * (dk == "dipole_nm" ? 1e-9 : 1.0);
    if (!(p.dipole_m > 0.0)) throw ConfigError(dk, "must be > 0");

    const std::string sk = one_of({"separation_m", "t0_over_tau"});
    if (sk == "t0_over_tau" && !finite_t) throw ConfigError(sk, "needs temperature_K > 0");
    p.separation_m = sk == "separation_m" ? c.number(sk) : c.number(sk) * thermal_time(p.temperature_K, k) * k.c0;
    if (!(p.separation_m > 0.0)) throw ConfigError(sk, "must be > 0");

    const std::string ck = one_of({"y_max", "omega_max_eV", "omega_max_rad_s"});
    if (ck == "y_max") {
        if (!finite_t) throw ConfigError(ck, "needs temperature_K > 0");
        p.omega_max = c.number(ck) / thermal_time(p.temperature_K, k);
    } else if (ck == "omega_max_eV") {
        p.omega_max = omega_from_eV(c.number(ck), k);
    } else {
        p.omega_max = c.number(ck);
    }
    if (!(p.omega_max > 0.0)) throw ConfigError(ck, "must be > 0");

    p.gamma = c.number_or("gamma", 1.0);
    if (!(p.gamma >= 0.0 && p.gamma <= 1.0)) throw ConfigError("gamma", "must lie in [0, 1]");

    const std::string kind = c.text_or("cutoff_kind", "sharp");
    if (kind == "sharp") {
        if (c.has("cutoff_p")) throw ConfigError("cutoff_p", "only valid with cutoff_kind = power_law");
        p.cutoff = CutoffSpec::sharp();
    } else if (kind == "power_law") {
        p.cutoff = CutoffSpec::power_law(c.number("cutoff_p"));
        if (!(p.cutoff.p > 2.0)) throw ConfigError("cutoff_p", "must be > 2");
    } else {
        throw ConfigError("cutoff_kind", "expected sharp or power_law, got '" + kind + "'");
    }
    p.validate();
    return p;
}

/// Canonical SI keys that reproduce p exactly when parsed back.
inline KeyValues physical_keys(const PhysicalParams& p) {
    KeyValues kv{{"temperature_K", format_double(p.temperature_K)},
                 {"dipole_m", format_double(p.dipole_m)},
                 {"separation_m", format_double(p.separation_m)},
                 {"omega_max_rad_s", format_double(p.omega_max)},
                 {"gamma", format_double(p.gamma)},
                 {"cutoff_kind", to_string(p.cutoff.kind)}};
    if (!p.cutoff.is_sharp()) kv["cutoff_p"] = format_double(p.cutoff.p);
    return kv;
}

/// Replaces every physical key in c by its canonical SI form.
inline Config canonical_config(const Config& c, const PhysicalParams& p) {
    KeyValues kv = c.values();
    for (const char* k : {"dipole_nm", "t0_over_tau", "y_max", "omega_max_eV", "cutoff_p"}) kv.erase(k);
    for (const auto& [k, v] : physical_keys(p)) kv[k] = v;
    return Config(kv);
}

/// Overrides the axis of a grid spec from grid_{x,y}_{min,max} and grid_n{x,y}.
inline void apply_grid_keys(const Config& c, AxisSpec& x, AxisSpec& y) {
    x.min = c.number_or("grid_x_min", x.min);
    x.max = c.number_or("grid_x_max", x.max);
    x.n = c.integer_or("grid_nx", x.n);
    y.min = c.number_or("grid_y_min", y.min);
    y.max = c.number_or("grid_y_max", y.max);
    y.n = c.integer_or("grid_ny", y.n);
    if (x.n < 1) throw ConfigError("grid_nx", "must be >= 1");
    if (y.n < 1) throw ConfigError("grid_ny", "must be >= 1");
    if (x.n > 1 && !(x.max > x.min)) throw ConfigError("grid_x_max", "must exceed grid_x_min");
    if (y.n > 1 && !(y.max > y.min)) throw ConfigError("grid_y_max", "must exceed grid_y_min");
}

// ---------------------------------------------------------------- manifest

inline nlohmann::ordered_json constants_json(const PhysicalConstants& k = kCodata2018) {
    return {{"name", kConstantSetName}, {"alpha0", k.alpha0}, {"c0", k.c0},     {"hbar", k.hbar},
            {"kB", k.kB},               {"eps0", k.eps0},     {"e_charge", k.e_charge}};
}

inline nlohmann::ordered_json derived_json(const PhysicalParams& p, const PhysicalConstants& k = kCodata2018) {
    const auto d = derive_dimensionless(p, k);
    nlohmann::ordered_json j{{"t0_seconds", d.t0_seconds}, {"y_max", d.y_max}, {"v", d.v}, {"A", d.A}};
    if (d.tau) {
        j["tau_seconds"] = *d.tau;
        j["t0_over_tau"] = *d.t0_over_tau;
        j["c_constant"] = c_constant_from_A(d.A);
    }
    j["predicted_t1_seconds"] = predict_t1(p, k);
    return j;
}

} // namespace bbr
