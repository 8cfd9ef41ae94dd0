#include <doctest.h>

#include "starpinch/cli.hpp"
#include "starpinch/errors.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

using namespace starpinch;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code = -1;
    std::string out;
    std::string err;
};

CliRun run(std::vector<std::string> args) {
    args.insert(args.begin(), "starpinch");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    CliRun r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "starpinch_test_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string write_config(const fs::path& dir, const std::string& text) {
    const auto path = dir / "config.ini";
    std::ofstream(path) << text;
    return path.string();
}

std::string slurp(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

const char* kSphereConfig = R"([surface]
n = 2
delta = -1
rho0 = 0.8
[experiment]
r = 1
seed = 3
hausdorff_order = 8
[quadrature]
order = 12
check_order = 24
)";

const char* kPerturbedConfig = R"([surface]
n = 2
delta = 0
rho0 = 0.8
basis = harmonic
perturbation = 7:0.1
[experiment]
r = 1
seed = 5
hausdorff_order = 8
[quadrature]
order = 12
check_order = 24
)";

} // namespace

TEST_CASE("config parsing") {
    std::istringstream is(kPerturbedConfig);
    const auto cfg = parse_config(is);
    CHECK(cfg.n == 2);
    CHECK(cfg.basis == BasisKind::Harmonic);
    REQUIRE(cfg.perturbation.size() == 1);
    CHECK(cfg.perturbation[0].index == 7);
    CHECK(cfg.perturbation[0].amplitude == 0.1);
    CHECK(cfg.quad_order_check == 24);
    CHECK(cfg.seed == 5);

    auto bad = [](const std::string& text) {
        std::istringstream s(text);
        return parse_config(s);
    };
    CHECK_THROWS_WITH_AS(bad("[surface]\nn = 2\ncolour = red\n"), doctest::Contains("surface.colour"), ConfigError);
    CHECK_THROWS_WITH_AS(bad("[surface]\nn = 2\nthis line has no equals sign\n"), doctest::Contains("line 3"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(bad("[surface]\nrho0 = abc\n"), doctest::Contains("surface.rho0"), ConfigError);
    CHECK_THROWS_AS(bad("[quadrature]\norder = 16\ncheck_order = 20\n"), ConfigError);
    CHECK_THROWS_AS(bad("[experiment]\nr = 2\n"), ConfigError);
    CHECK_THROWS_AS(bad("[surface]\ndelta = 1\nrho0 = 1.6\n"), ConfigError);  // beyond the quarter circumference
    CHECK_THROWS_AS(bad("[surface]\nbasis = harmonic\nperturbation = -1:0.1\n"), ConfigError);
    CHECK_THROWS_AS(bad("[wrong]\nx = 1\n"), ConfigError);
}

TEST_CASE("config hash") {
    // standard SHA-256 test vector
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    std::istringstream is(kPerturbedConfig);
    auto a = parse_config(is);
    auto b = a;
    b.threads = 4;
    b.out_dir = "elsewhere";
    CHECK(config_hash(a) == config_hash(b));
    b.seed += 1;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(config_hash(a).size() == 64);
}

TEST_CASE("report command") {
    const auto dir = scratch("report");
    const auto cfg = write_config(dir, kSphereConfig);
    const auto r = run({"--config", cfg, "--out", dir.string(), "report"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(j["epsilon"]["identically_zero"].get<bool>());
    CHECK(j["starshaped"].get<bool>());
    CHECK(j["header"]["config_hash"].get<std::string>().size() == 64);
    CHECK(j["H"].size() == 3);

    CHECK(run({"--config", (dir / "missing.ini").string(), "report"}).code == 3);
    const auto bad = write_config(dir, "[surface]\nn = 2\nunknown_key = 1\n");
    const auto rb = run({"--config", bad, "--out", dir.string(), "report"});
    CHECK(rb.code == 3);
    CHECK(rb.err.find("surface.unknown_key") != std::string::npos);

    const auto broken = write_config(dir, R"([surface]
n = 2
rho0 = 1
basis = harmonic
perturbation = 6:-3
)");
    const auto rn = run({"--config", broken, "--out", dir.string(), "report"});
    CHECK(rn.code == 1);
    CHECK(rn.err.find("node") != std::string::npos);
    CHECK(run({"--out", dir.string(), "report"}).code == 3);
    CHECK(run({"--config", cfg, "bogus"}).code == 3);
}

TEST_CASE("identities command") {
    const auto dir = scratch("identities");
    const auto cfg = write_config(dir, kSphereConfig);
    const auto ok = run({"--config", cfg, "--out", dir.string(), "identities", "--sweep", "6,12"});
    CHECK(ok.code == 0);
    CHECK(ok.err.empty());
    const auto csv = slurp(dir / "identities.csv");
    CHECK(csv.find("hsiung_minkowski_k0") != std::string::npos);
    CHECK(csv.find("lemma_gap_r1") != std::string::npos);
    CHECK(csv.find("# config_hash: ") != std::string::npos);
    CHECK(slurp(dir / "identities_sweep.csv").find("12,1,") != std::string::npos);

    const auto perturbed = write_config(dir, kPerturbedConfig);
    const auto wrong = run({"--config", perturbed, "--out", dir.string(), "identities", "--wrong-sign"});
    CHECK(wrong.code == 2);
    CHECK(wrong.err.find("hsiung_minkowski") != std::string::npos);
}

TEST_CASE("pinch and scaling commands") {
    const auto dir = scratch("pinch");
    const auto cfg = write_config(dir, kSphereConfig);
    const auto r = run({"--config", cfg, "--out", dir.string(), "pinch"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "pinch.json"));
    CHECK(j["report"]["applicable"].get<bool>());
    CHECK(j["report"]["dH"].get<double>() <= 1e-8);
    CHECK(j["header"]["provenance"].contains("sphere"));

    const auto perturbed = write_config(dir, kPerturbedConfig);
    CHECK(run({"--config", perturbed, "--out", dir.string(), "scaling"}).code == 3);
    const auto s = run({"--config", perturbed, "--out", dir.string(), "scaling", "--amplitudes", "0.8,0.4,0.2,0.1"});
    CHECK(s.code == 0);
    std::istringstream csv(slurp(dir / "scaling.csv"));
    std::string line;
    int data = 0;
    bool header_seen = false, regression_seen = false;
    while (std::getline(csv, line)) {
        if (line == "amplitude,eps_l1,eps_linf,tau_l2,tau_lnp1,R0,B_sup,rho0,dH,bound,applicable") header_seen = true;
        else if (line.rfind("# regression: slope=", 0) == 0) regression_seen = true;
        else if (!line.empty() && line[0] != '#') ++data;
    }
    CHECK(header_seen);
    CHECK(regression_seen);
    CHECK(data == 4);
    CHECK(run({"--config", perturbed, "--out", dir.string(), "scaling", "--amplitudes", "0.01,0.02"}).code == 3);
}

TEST_CASE("outputs are byte-identical across runs and thread counts") {
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    const auto cfg = write_config(a, kPerturbedConfig);
    REQUIRE(run({"--config", cfg, "--out", a.string(), "--threads", "1", "pinch"}).code == 0);
    REQUIRE(run({"--config", cfg, "--out", b.string(), "--threads", "3", "pinch"}).code == 0);
    CHECK(slurp(a / "pinch.json") == slurp(b / "pinch.json"));
    REQUIRE(run({"--config", cfg, "--out", a.string(), "--threads", "1", "identities"}).code == 0);
    REQUIRE(run({"--config", cfg, "--out", b.string(), "--threads", "2", "identities"}).code == 0);
    CHECK(slurp(a / "identities.csv") == slurp(b / "identities.csv"));
}

TEST_CASE("calibrate command") {
    const auto a = scratch("cal_a");
    const auto b = scratch("cal_b");
    const std::vector<std::string> args = {"--seed", "11", "calibrate", "--n", "2", "--r", "1", "--samples", "10000"};
    auto with_out = [&](const fs::path& dir, std::vector<std::string> extra) {
        std::vector<std::string> v = {"--out", dir.string(), "--threads", dir == a ? "1" : "2"};
        v.insert(v.end(), extra.begin(), extra.end());
        return v;
    };
    REQUIRE(run(with_out(a, args)).code == 0);
    REQUIRE(run(with_out(b, args)).code == 0);
    CHECK(slurp(a / "calibration.ini") == slurp(b / "calibration.ini"));

    // margin 0 records the raw infimum; n = 2 gives 1/2 from the exact identity
    auto raw = args;
    raw.insert(raw.end(), {"--margin", "0"});
    REQUIRE(run(with_out(a, raw)).code == 0);
    std::ifstream is(a / "calibration.ini");
    const auto cal = read_calibration(is);
    CHECK(cal.c_n == cal.c_n_raw);
    CHECK(cal.c_n == doctest::Approx(0.5).epsilon(1e-9));

    auto few = args;
    few[8] = "100";
    CHECK(run(with_out(a, few)).code == 3);

    // a calibration file feeds r = 2 runs
    REQUIRE(run({"--out", a.string(), "--seed", "1", "calibrate", "--n", "3", "--r", "2", "--samples", "10000"}).code ==
            0);
    const auto cfg = write_config(a, std::string(R"([surface]
n = 3
delta = 1
rho0 = 0.7
perturbation = 6:0.02
[experiment]
r = 2
hausdorff_order = 6
[quadrature]
order = 8
[constants]
calibration = calibration.ini
)"));
    const auto r = run({"--config", cfg, "--out", a.string(), "pinch"});
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(a / "pinch.json"));
    CHECK(j["header"]["provenance"]["c_n"].get<std::string>().find("calibration file") != std::string::npos);
}
