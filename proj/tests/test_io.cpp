#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <sys/wait.h>

#include "bbr/bbr.hpp"

using namespace bbr;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
};

Result run_cli(const std::string& args) {
    const std::string cmd = std::string(BBR_CLI_PATH) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    std::string out;
    char buf[4096];
    while (std::size_t n = fread(buf, 1, sizeof buf, p)) out.append(buf, n);
    const int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path temp_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("bbr_test_io_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

fs::path source_path(const std::string& rel) { return fs::path(BBR_SOURCE_DIR) / rel; }

Config minimal() {
    return Config(parse_key_values("temperature_K = 2.73\ndipole_nm = 10\nt0_over_tau = 100\ny_max = 300\n"));
}

std::string config_error_key(const Config& c) {
    try {
        physical_params(c);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "";
}

} // namespace

TEST(Numbers, ShortestRoundTrip) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const double x = u(rng) * std::pow(10.0, 40.0 * u(rng));
        const auto s = format_double(x);
        EXPECT_EQ(s.find(','), std::string::npos);
        ASSERT_TRUE(parse_double(s).has_value());
        EXPECT_EQ(*parse_double(s), x);
    }
    EXPECT_EQ(format_double(0.25), "0.25");
    EXPECT_EQ(format_double(1e-300), "1e-300");
    EXPECT_FALSE(parse_double("1.5x").has_value());
    EXPECT_FALSE(parse_double("").has_value());
}

TEST(Numbers, ComplexParsing) {
    EXPECT_EQ(*parse_complex("0.5"), cplx(0.5, 0.0));
    EXPECT_EQ(*parse_complex("0.5+0.25i"), cplx(0.5, 0.25));
    EXPECT_EQ(*parse_complex(" -1e-3 - 2.5e+2i "), cplx(-1e-3, -250.0));
    EXPECT_EQ(*parse_complex("-i"), cplx(0.0, -1.0));
    EXPECT_EQ(*parse_complex("2i"), cplx(0.0, 2.0));
    EXPECT_EQ(*parse_complex("1+i"), cplx(1.0, 1.0));
    EXPECT_FALSE(parse_complex("abc").has_value());
    EXPECT_FALSE(parse_complex("1+2").has_value());
    for (const cplx z : {cplx(0.1, -0.3), cplx(-2.0, 1e-17), cplx(1.0, -0.0)}) {
        const auto back = *parse_complex(format_complex(z));
        EXPECT_EQ(back, z);
        EXPECT_EQ(std::signbit(back.imag()), std::signbit(z.imag()));
    }
}

TEST(StateCsv, RoundTripAndErrors) {
    const auto r = evolve(initial_product_state(), BathKernels{1e-3, 2e-3, 0.7, 0.1, 0.6, 0.0, KernelPath::Quadrature}, 1.0);
    const Matrix4c back = parse_matrix_csv(matrix_csv(r.matrix()));
    EXPECT_EQ(max_abs(back - r.matrix()), 0.0);
    EXPECT_THROW(parse_matrix_csv("1,0,0\n0,0,0,0\n0,0,0,0\n0,0,0,0\n"), ConfigError);
    EXPECT_THROW(parse_matrix_csv("1,0,0,0\n0,0,0,0\n0,0,0,0\n"), ConfigError);
    EXPECT_THROW(parse_matrix_csv("1,0,0,q\n0,0,0,0\n0,0,0,0\n0,0,0,0\n"), ConfigError);
    EXPECT_THROW(DensityMatrix4::from_matrix(parse_matrix_csv("1,0,0,0\n0,1,0,0\n0,0,0,0\n0,0,0,0\n")), NotAState);
    EXPECT_THROW(read_state_csv("/nonexistent/bell.csv"), IoError);
    const auto bell = read_state_csv(source_path("configs/bell.csv"));
    EXPECT_NEAR(concurrence(bell), 1.0, 1e-12);
}

TEST(GridFiles, CsvAndPgmEncoding) {
    AxisSpec x{"x", AxisScale::Linear, 0.0, 1.0, 3}, y{"y", AxisScale::Log10, 0.0, 1.0, 2};
    const std::vector<double> vals{0.0, 0.5, 1.0, std::nan(""), 0.25, 0.999};
    const auto g = run_grid(x, y, [&](int ix, int iy) {
        const double v = vals[static_cast<std::size_t>(iy * 3 + ix)];
        if (std::isnan(v)) throw DomainError("boom");
        return CellResult{v, CellSource::Quadrature, {}};
    });
    const std::string pgm = grid_pgm(g);
    const std::string header = "P5\n3 2\n255\n";
    ASSERT_EQ(pgm.size(), header.size() + 6);
    EXPECT_EQ(pgm.substr(0, header.size()), header);
    const auto px = [&](std::size_t i) { return static_cast<unsigned char>(pgm[header.size() + i]); };
    // top row is iy = 1
    EXPECT_EQ(px(0), kPgmFailedCell);
    EXPECT_EQ(px(1), 255 - 64);
    EXPECT_EQ(px(2), 0);
    EXPECT_EQ(px(3), 255);
    EXPECT_EQ(px(4), 255 - 128);
    EXPECT_EQ(px(5), 0);
    const std::string csv = grid_csv(g);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "x,y,eof,source");
    EXPECT_NE(csv.find("\n0.5,0,0.5,quadrature\n"), std::string::npos);
    EXPECT_NE(csv.find("\n0,1,nan,failed\n"), std::string::npos);
}

TEST(AtomicWrite, ReplacesContentWithoutLeftovers) {
    const auto d = temp_dir("atomic");
    write_file_atomic(d / "a.txt", "one");
    write_file_atomic(d / "a.txt", "two");
    EXPECT_EQ(read_file(d / "a.txt"), "two");
    EXPECT_FALSE(fs::exists(d / "a.txt.tmp"));
    EXPECT_THROW(write_file_atomic(d / "missing" / "a.txt", "x"), IoError);
}

TEST(Config, KeyValueSyntax) {
    const auto kv = parse_key_values("# comment\n a = 1 \nb=two # trailing\n\n");
    EXPECT_EQ(kv.at("a"), "1");
    EXPECT_EQ(kv.at("b"), "two");
    EXPECT_THROW(parse_key_values("novalue\n"), ConfigError);
    try {
        parse_key_values("gamma = 1\ngamma = 0\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "gamma");
    }
    try {
        Config(parse_key_values("temprature_K = 3\n"));
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "temprature_K");
    }
}

TEST(Config, MinimalFileAccepted) {
    const auto p = physical_params(minimal());
    const double tau = thermal_time(2.73);
    EXPECT_EQ(p.dipole_m, 10e-9);
    EXPECT_NEAR(p.separation_m / (100.0 * tau * kCodata2018.c0), 1.0, 1e-15);
    EXPECT_NEAR(derive_dimensionless(p).y_max, 300.0, 1e-12);
    EXPECT_NEAR(*derive_dimensionless(p).t0_over_tau, 100.0, 1e-12);
    EXPECT_TRUE(p.cutoff.is_sharp());
}

TEST(Config, ErrorsNameTheKey) {
    Config c = minimal();
    c.set("gamma", "1.5");
    EXPECT_EQ(config_error_key(c), "gamma");
    c = minimal();
    c.set("cutoff_kind", "power_law");
    EXPECT_EQ(config_error_key(c), "cutoff_p");
    c.set("cutoff_p", "2");
    EXPECT_EQ(config_error_key(c), "cutoff_p");
    c = minimal();
    c.erase("dipole_nm");
    EXPECT_EQ(config_error_key(c), "dipole_nm");
    c = minimal();
    c.erase("temperature_K");
    EXPECT_EQ(config_error_key(c), "temperature_K");
    c = minimal();
    c.set("separation_m", "1e-3");
    EXPECT_EQ(config_error_key(c), "t0_over_tau");
    c = minimal();
    c.set("cutoff_kind", "gaussian");
    EXPECT_EQ(config_error_key(c), "cutoff_kind");
    c = minimal();
    c.set("temperature_K", "0");
    EXPECT_EQ(config_error_key(c), "t0_over_tau");
    c = minimal();
    c.set("dipole_nm", "abc");
    EXPECT_EQ(config_error_key(c), "dipole_nm");
}

TEST(Config, CanonicalEchoReproducesParameters) {
    Config c = minimal();
    c.set("cutoff_kind", "power_law");
    c.set("cutoff_p", "3.5");
    c.set("grid_nx", "7");
    const auto p = physical_params(c);
    const Config echo = canonical_config(c, p);
    const auto q = physical_params(Config(parse_key_values(format_key_values(echo.values()))));
    EXPECT_EQ(q.temperature_K, p.temperature_K);
    EXPECT_EQ(q.dipole_m, p.dipole_m);
    EXPECT_EQ(q.separation_m, p.separation_m);
    EXPECT_EQ(q.omega_max, p.omega_max);
    EXPECT_EQ(q.gamma, p.gamma);
    EXPECT_EQ(q.cutoff.p, p.cutoff.p);
    EXPECT_EQ(echo.text("grid_nx"), "7");
}

TEST(Config, GridKeys) {
    Config c;
    c.set("grid_nx", "0");
    AxisSpec x, y;
    try {
        apply_grid_keys(c, x, y);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "grid_nx");
    }
}

TEST(Cli, HelpOnEverySubcommand) {
    for (const char* s : {"kernels", "evolve", "eof", "scan-fig1", "scan-fig2", "scan-fig3", "predict-t1", "find-t1",
                          "eff-int"}) {
        const auto r = run_cli(std::string(s) + " --help");
        EXPECT_EQ(r.code, 0) << s;
        EXPECT_NE(r.out.find("--config"), std::string::npos) << s;
        EXPECT_NE(r.out.find("--out"), std::string::npos) << s;
    }
    EXPECT_EQ(run_cli("--help").code, 0);
}

TEST(Cli, PredictT1Distance) {
    const auto r = run_cli("predict-t1 --dipole-um 1 --t1-seconds 4.35e17");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto pos = r.out.find("R=");
    ASSERT_NE(pos, std::string::npos);
    const double R = std::stod(r.out.substr(pos + 2));
    EXPECT_NEAR(R / 8.4e3, 1.0, 0.02);
}

TEST(Cli, EofOfBellState) {
    const auto r = run_cli("eof --state " + source_path("configs/bell.csv").string());
    ASSERT_EQ(r.code, 0) << r.out;
    double C = 0, E = 0;
    ASSERT_EQ(std::sscanf(r.out.c_str(), "C=%lf E=%lf", &C, &E), 2) << r.out;
    EXPECT_NEAR(C, 1.0, 1e-12);
    EXPECT_NEAR(E, 1.0, 1e-12);
}

TEST(Cli, ExitCodes) {
    const std::string cfg = " --config " + source_path("configs/minimal.cfg").string();
    auto r = run_cli("kernels" + cfg + " --t_over_tau 1000 --gamma 1.5");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("gamma"), std::string::npos);
    r = run_cli("kernels" + cfg + " --t_over_tau 1000 --cutoff_kind power_law");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("cutoff_p"), std::string::npos);
    r = run_cli("kernels" + cfg + " --t_over_tau 1e9 --strategy quadrature");
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.out.find("oscillation budget"), std::string::npos);
    r = run_cli("eof --state /nonexistent/state.csv");
    EXPECT_EQ(r.code, 1);
    r = run_cli("kernels --config /nonexistent/x.cfg --t_over_tau 1");
    EXPECT_EQ(r.code, 1);
    r = run_cli("kernels" + cfg);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("t_over_tau"), std::string::npos);
    r = run_cli("bogus-command");
    EXPECT_EQ(r.code, 2);
}

TEST(Cli, ScanFig2WritesGridAndManifest) {
    const auto d = temp_dir("fig2");
    const auto r = run_cli("scan-fig2 --nx 100 --ny 100 --threads 2 --out " + d.string());
    ASSERT_EQ(r.code, 0) << r.out;
    const auto m = nlohmann::json::parse(read_file(d / "manifest.json"));
    EXPECT_GE(m.at("grid_max").get<double>(), 0.999);
    EXPECT_EQ(m.at("constant_set"), kConstantSetName);
    EXPECT_EQ(m.at("strategy_histogram").at("asymptotic_map"), 10000);
    for (const auto& f : m.at("outputs")) EXPECT_TRUE(fs::exists(d / f.get<std::string>())) << f;
    const std::string pgm = read_file(d / "fig2.pgm");
    EXPECT_EQ(pgm.substr(0, 15), "P5\n100 100\n255\n");
    EXPECT_EQ(pgm.size(), 15u + 10000u);
    // the phi = pi/2 row (iy = 49 or 50) at v = 0 is nearly black
    const unsigned char near_half = static_cast<unsigned char>(pgm[15 + (99 - 50) * 100]);
    EXPECT_LE(near_half, 1);
}

TEST(Cli, ManifestEchoReproducesOutputs) {
    const auto a = temp_dir("echo_a"), b = temp_dir("echo_b");
    const std::string args = " --temperature_K 2.73 --dipole_nm 10 --t0_over_tau 1e6 --omega_max_eV 1 --nx 6 --ny 9 "
                             "--format csv --out ";
    auto r = run_cli("scan-fig3" + args + a.string());
    ASSERT_EQ(r.code, 0) << r.out;
    r = run_cli("scan-fig3 --config " + (a / "config.txt").string() + " --out " + b.string());
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(read_file(a / "fig3.csv"), read_file(b / "fig3.csv"));
    EXPECT_EQ(read_file(a / "config.txt"), read_file(b / "config.txt"));
    EXPECT_FALSE(fs::exists(a / "fig3.pgm"));
    const auto m = nlohmann::json::parse(read_file(a / "manifest.json"));
    EXPECT_NEAR(m.at("derived").at("t0_over_tau").get<double>(), 1e6, 1e-6);
    EXPECT_EQ(m.at("config").at("cutoff_kind"), "sharp");
}

TEST(Cli, KernelsAndFindT1) {
    const std::string cfg = " --config " + source_path("configs/minimal.cfg").string();
    auto r = run_cli("kernels" + cfg + " --t_over_tau 1000");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_NEAR(j.at("phi_minus").get<double>() * 1e6 / 1000.0, std::numbers::pi, 0.05);
    r = run_cli("find-t1" + cfg);
    ASSERT_EQ(r.code, 0) << r.out;
    const auto pos = r.out.find("ratio ");
    ASSERT_NE(pos, std::string::npos);
    EXPECT_NEAR(std::stod(r.out.substr(pos + 6)), 1.0, 0.05);
}
