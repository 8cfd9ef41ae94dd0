#include "starpinch/cli.hpp"

#include "starpinch/errors.hpp"
#include "starpinch/identities.hpp"
#include "starpinch/integrals.hpp"
#include "starpinch/pinch.hpp"
#include "starpinch/symfun.hpp"

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <json.hpp>
#include <map>
#include <openssl/evp.h>
#include <set>
#include <sstream>

namespace starpinch {

namespace {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr const char* kToolName = "starpinch";
constexpr int kFormatVersion = 1;

const std::map<std::string, std::set<std::string>>& allowed_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"surface", {"n", "delta", "rho0", "basis", "perturbation"}},
        {"experiment", {"r", "h", "seed", "amplitudes", "hausdorff_order", "threads"}},
        {"quadrature", {"order", "check_order"}},
        {"constants",
         {"eps0", "c_RS", "alpha", "Kn_MS", "c_n_phi", "c_n", "b_consts", "calibration", "calibration_samples",
          "calibration_margin", "K1_mode"}},
        {"output", {"dir"}},
    };
    return keys;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& raw) {
    const std::string text = trim(raw);
    T value{};
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto res = std::from_chars(first, last, value);
    if (text.empty() || res.ec != std::errc() || res.ptr != last)
        throw ConfigError(fmt::format("key '{}': cannot parse '{}' as a number", key, raw));
    if constexpr (std::is_floating_point_v<T>)
        if (!std::isfinite(value)) throw ConfigError(fmt::format("key '{}': value must be finite", key));
    return value;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<PerturbationTerm> parse_perturbation(const std::string& text) {
    std::vector<PerturbationTerm> terms;
    for (const auto& item : split_list(text)) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw ConfigError(fmt::format("key 'surface.perturbation': expected index:amplitude, got '{}'", item));
        terms.push_back({parse_number<int>("surface.perturbation", item.substr(0, colon)),
                         parse_number<double>("surface.perturbation", item.substr(colon + 1))});
    }
    return terms;
}

std::vector<double> parse_amplitudes(const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) out.push_back(parse_number<double>("experiment.amplitudes", item));
    return out;
}

BasisKind parse_basis(const std::string& text) {
    const std::string t = trim(text);
    if (t == "harmonic") return BasisKind::Harmonic;
    if (t == "monomial") return BasisKind::Monomial;
    throw ConfigError(fmt::format("key 'surface.basis': expected harmonic or monomial, got '{}'", text));
}

std::string fmt_double(double x) { return fmt::format("{:.17g}", x); }

std::string fmt_optional(const std::optional<double>& x) { return x ? fmt_double(*x) : std::string("default"); }

// ---------------------------------------------------------------------------
// Output helpers

struct Header {
    std::string command;
    std::string hash;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> provenance;
};

Json header_json(const Header& h) {
    Json j;
    j["tool"] = kToolName;
    j["format_version"] = kFormatVersion;
    j["command"] = h.command;
    j["config_hash"] = h.hash;
    j["seed"] = h.seed;
    Json prov = Json::object();
    for (const auto& [k, v] : h.provenance) prov[k] = v;
    j["provenance"] = prov;
    return j;
}

std::string header_comment(const Header& h, const std::string& prefix) {
    std::string s = fmt::format("{} tool: {} (format {})\n", prefix, kToolName, kFormatVersion);
    s += fmt::format("{} command: {}\n", prefix, h.command);
    s += fmt::format("{} config_hash: {}\n", prefix, h.hash);
    s += fmt::format("{} seed: {}\n", prefix, h.seed);
    for (const auto& [k, v] : h.provenance) s += fmt::format("{} provenance.{}: {}\n", prefix, k, v);
    return s;
}

fs::path output_path(const ExperimentConfig& cfg, const std::string& name) {
    const fs::path dir(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError(fmt::format("cannot create output directory '{}': {}", cfg.out_dir, ec.message()));
    return dir / name;
}

void write_file(const fs::path& path, const std::string& body) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError(fmt::format("cannot open '{}' for writing", path.string()));
    os << body;
    if (!os) throw ConfigError(fmt::format("write to '{}' failed", path.string()));
}

Json surface_json(const ExperimentConfig& cfg) {
    Json j;
    j["n"] = cfg.n;
    j["delta"] = cfg.delta;
    j["rho0"] = cfg.rho0;
    j["basis"] = to_string(cfg.basis);
    Json terms = Json::array();
    for (const auto& t : cfg.perturbation) terms.push_back({{"index", t.index}, {"amplitude", t.amplitude}});
    j["perturbation"] = terms;
    return j;
}

Json constants_json(const ProofConstants& c) {
    Json j;
    j["K1"] = c.K1;
    j["K2"] = c.K2;
    j["K3"] = c.K3;
    j["eps1"] = c.eps1;
    j["eps0"] = c.eps0;
    j["c_RS"] = c.c_RS;
    j["alpha"] = c.alpha;
    j["gamma"] = c.gamma;
    j["c_n_phi"] = c.c_n_phi;
    j["Kn_MS"] = c.Kn_MS;
    j["C"] = c.C;
    j["c_n"] = c.c_n;
    j["b_consts"] = c.b;
    j["K1_mode"] = to_string(c.k1_mode);
    Json deps = Json::object();
    for (const auto& [k, v] : c.dependencies) deps[k] = v;
    j["dependencies"] = deps;
    return j;
}

std::map<std::string, std::string> base_provenance(const ExperimentConfig& cfg) {
    std::map<std::string, std::string> p;
    p["h"] = cfg.h ? "configured" : "volume-normalized mean of H_r";
    p["quadrature"] = fmt::format("order {}, check order {}", cfg.quad_order, cfg.quad_order_check);
    return p;
}

// ---------------------------------------------------------------------------
// Commands

struct CommandOptions {
    bool wrong_sign = false;
    std::vector<int> sweep;
    std::vector<double> amplitudes;
};

int cmd_report(const ExperimentConfig& cfg, std::ostream& out) {
    const auto surface = make_surface(cfg);
    const auto rule = build_rule(cfg.n, cfg.quad_order);
    const auto sampled = sample_surface(surface, rule, {}, cfg.threads);
    const auto star = starshape_report(sampled);

    std::vector<CurvatureProfile> prof;
    prof.reserve(sampled.points.size());
    for (const auto& p : sampled.points) prof.push_back(curvature_profile(p.principal()));

    Json j;
    Header hdr{"report", config_hash(cfg), cfg.seed, base_provenance(cfg)};
    j["header"] = header_json(hdr);
    j["surface"] = surface_json(cfg);
    j["nodes"] = rule.size();
    j["area"] = surface_volume(sampled);
    j["starshaped"] = true;
    j["support_sign"] = star.sign;
    j["R0"] = star.R0;
    j["R"] = star.R;
    j["B_sup"] = B_sup_norm(sampled);
    Json hk = Json::array();
    for (int k = 0; k <= cfg.n; ++k) {
        std::vector<double> f(prof.size());
        for (std::size_t i = 0; i < prof.size(); ++i) f[i] = prof[i].H[static_cast<std::size_t>(k)];
        const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
        hk.push_back({{"k", k}, {"min", *lo}, {"max", *hi}, {"mean", mean_value(sampled, f)}});
    }
    j["H"] = hk;

    std::vector<double> Hr(prof.size());
    double minH_rplus1 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < prof.size(); ++i) {
        Hr[i] = prof[i].H[static_cast<std::size_t>(cfg.r)];
        minH_rplus1 = std::min(minH_rplus1, prof[i].H[static_cast<std::size_t>(cfg.r + 1)]);
    }
    const double h = cfg.h ? *cfg.h : mean_value(sampled, Hr);
    std::vector<double> eps(Hr.size());
    for (std::size_t i = 0; i < Hr.size(); ++i) eps[i] = Hr[i] - h;
    const double linf = lp_norm(sampled, eps, std::numeric_limits<double>::infinity());
    j["epsilon"] = {{"r", cfg.r},
                    {"h", h},
                    {"l1", lp_norm(sampled, eps, 1.0)},
                    {"linf", linf},
                    {"identically_zero", linf <= 1e-10 * std::max(1.0, std::abs(h))},
                    {"min_H_rplus1", minH_rplus1}};

    const auto path = output_path(cfg, "report.json");
    write_file(path, j.dump(2) + "\n");
    out << fmt::format("report written to {}\n", path.string());
    return 0;
}

int cmd_identities(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    const auto surface = make_surface(cfg);
    EvalOptions eo;
    eo.wrong_sign_convention = opt.wrong_sign;
    const auto sampled = sample_surface(surface, build_rule(cfg.n, cfg.quad_order), eo, cfg.threads);

    std::vector<ResidualReport> rows;
    for (int k = 0; k < cfg.n; ++k)
        rows.push_back(hsiung_minkowski_residual(surface, k, cfg.quad_order, cfg.quad_order_check, 1e-8, eo,
                                                 cfg.threads));

    ResidualReport gauss = identity_report("gauss_algebraic", 0.0, 1e-12);
    for (const auto& p : sampled.points) {
        const auto g = gauss_algebraic_check(p, cfg.delta);
        if (std::abs(g.report.value) > std::abs(gauss.value)) gauss = g.report;
    }
    gauss.name = "gauss_algebraic";
    rows.push_back(gauss);
    rows.push_back(cauchy_schwarz_chain_check(sampled));

    auto prov = base_provenance(cfg);
    if (opt.wrong_sign) prov["sign_convention"] = "debug: B = +h(Dbar nu, .)";
    if (!opt.wrong_sign) {
        const auto q = surface_quantities(sampled, cfg.delta, cfg.r, cfg.h);
        const auto cc = resolve_constants(cfg);
        const auto consts = assemble_constants(q, cc);
        for (const auto& [k, v] : consts.provenance) prov[k] = v;
        auto lemma = lemma1_gap(sampled, cfg.r, consts.K1);
        lemma.name = fmt::format("lemma_gap_r{}", cfg.r);
        rows.push_back(lemma);
        rows.push_back(tau_l2_epsilon_bound(sampled, cfg.r, q.h, consts.K2));
    }
    rows.push_back(michael_simon_ratio(sampled, cfg.Kn_MS ? *cfg.Kn_MS : default_michael_simon_constant(cfg.n)));

    const Header hdr{"identities", config_hash(cfg), cfg.seed, prov};
    std::ostringstream body;
    body << header_comment(hdr, "#");
    write_residual_csv(body, rows);
    const auto path = output_path(cfg, "identities.csv");
    write_file(path, body.str());
    out << fmt::format("identities written to {}\n", path.string());

    if (!opt.sweep.empty()) {
        std::ostringstream sw;
        sw << header_comment(hdr, "#");
        sw << "order,k,residual\n";
        for (int order : opt.sweep) {
            const auto s = sample_surface(surface, build_rule(cfg.n, order), eo, cfg.threads);
            for (int k = 0; k < cfg.n; ++k)
                sw << fmt::format("{},{},{:.17g}\n", order, k, hsiung_minkowski_value(s, k, cfg.delta));
        }
        const auto spath = output_path(cfg, "identities_sweep.csv");
        write_file(spath, sw.str());
        out << fmt::format("quadrature sweep written to {}\n", spath.string());
    }

    bool ok = true;
    for (const auto& r : rows) {
        if (r.pass) continue;
        ok = false;
        err << fmt::format("FAILED {}: value {:.6g}, tolerance {:.3g}, refinement {:.3g}\n", r.name, r.value,
                           r.tolerance, r.refinement_error);
    }
    return ok ? 0 : 2;
}

Json pinch_json(const PinchReport& rep) {
    Json j;
    j["n"] = rep.n;
    j["r"] = rep.r;
    j["delta"] = rep.delta;
    j["h"] = rep.h;
    j["h_default"] = rep.h_default;
    j["eps_l1"] = rep.eps_l1;
    j["eps_l1_refinement"] = rep.eps_l1_refinement;
    j["eps_linf"] = rep.eps_linf;
    j["eps_mean"] = rep.eps_mean;
    j["tau_l2"] = rep.tau_l2;
    j["tau_lnp1"] = rep.tau_lnp1;
    j["R0"] = rep.R0;
    j["R"] = rep.R;
    j["B_sup"] = rep.B_sup;
    j["volume"] = rep.volume;
    j["min_H_rplus1"] = rep.minH_rplus1;
    j["min_H_partial"] = rep.minH_partial;
    j["sphere"] = {{"center", std::vector<double>(rep.sphere_center.data(),
                                                  rep.sphere_center.data() + rep.sphere_center.size())},
                   {"rho0", rep.rho0},
                   {"fit_rms", rep.fit_rms}};
    j["dH"] = rep.dH;
    j["dH_surface_to_sphere"] = rep.dH_surface_to_sphere;
    j["dH_sphere_to_surface"] = rep.dH_sphere_to_surface;
    j["dH_refinement"] = rep.dH_refinement;
    j["bound"] = rep.bound;
    j["applicable"] = rep.applicable;
    j["structural_pass"] = rep.structural_pass;
    j["bound_holds"] = rep.bound_holds;
    Json gates = Json::array();
    for (const auto& g : rep.gates.checks) gates.push_back({{"name", g.name}, {"pass", g.pass}, {"detail", g.detail}});
    j["gates"] = gates;
    if (rep.constants_available)
        j["constants"] = constants_json(rep.constants);
    else
        j["constants_error"] = rep.constants_error;
    return j;
}

PinchConfig pinch_config(const ExperimentConfig& cfg) {
    PinchConfig pc;
    pc.quad_order = cfg.quad_order;
    pc.quad_order_check = cfg.quad_order_check;
    pc.hausdorff_order = cfg.hausdorff_order;
    pc.h = cfg.h;
    pc.constants = resolve_constants(cfg);
    pc.seed = cfg.seed;
    pc.threads = cfg.threads;
    return pc;
}

int cmd_pinch(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto surface = make_surface(cfg);
    const auto rep = run_pinch(surface, cfg.r, pinch_config(cfg));
    auto prov = base_provenance(cfg);
    for (const auto& [k, v] : rep.constants.provenance) prov[k] = v;
    prov["sphere"] = "fitted geodesic sphere (least-squares geodesic radius) used as S_rho0";
    Json j;
    j["header"] = header_json({"pinch", config_hash(cfg), cfg.seed, prov});
    j["surface"] = surface_json(cfg);
    j["report"] = pinch_json(rep);
    const auto path = output_path(cfg, "pinch.json");
    write_file(path, j.dump(2) + "\n");
    out << fmt::format("pinch report written to {} (dH = {:.6g}, bound = {:.6g}, applicable = {})\n", path.string(),
                       rep.dH, rep.bound, rep.applicable);
    if (rep.applicable && !rep.bound_holds) {
        err << fmt::format("FAILED bound: dH = {:.6g} exceeds C ||eps||_1^gamma = {:.6g}\n", rep.dH, rep.bound);
        return 2;
    }
    return 0;
}

int cmd_scaling(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    const auto amps = opt.amplitudes.empty() ? cfg.amplitudes : opt.amplitudes;
    if (amps.empty()) throw ConfigError("scaling: no amplitudes given (experiment.amplitudes or --amplitudes)");
    const auto surface = make_surface(cfg);
    const auto pc = pinch_config(cfg);
    const auto res = scaling_study(surface, amps, cfg.r, pc);

    auto prov = base_provenance(cfg);
    prov["c_n"] = pc.constants.c_n_source;
    prov["family"] = "surface perturbation coefficients multiplied by each amplitude";
    prov["sphere"] = "fitted geodesic sphere (least-squares geodesic radius) used as S_rho0";
    const Header hdr{"scaling", config_hash(cfg), cfg.seed, prov};
    std::ostringstream body;
    body << header_comment(hdr, "#");
    body << "amplitude,eps_l1,eps_linf,tau_l2,tau_lnp1,R0,B_sup,rho0,dH,bound,applicable\n";
    bool bound_ok = true;
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        const auto& r = res.rows[i];
        body << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{}\n",
                            r.amplitude, r.eps_l1, r.eps_linf, r.tau_l2, r.tau_lnp1, r.R0, r.B_sup, r.rho0, r.dH,
                            r.bound, r.applicable ? "true" : "false");
        if (!r.failure.empty()) body << fmt::format("# row {} failed: {}\n", i, r.failure);
        if (r.applicable && r.dH > r.bound + r.dH_refinement + 1e-9) {
            bound_ok = false;
            err << fmt::format("FAILED bound at amplitude {:.6g}: dH = {:.6g} > {:.6g}\n", r.amplitude, r.dH, r.bound);
        }
    }
    const auto& reg = res.regression;
    if (reg.defined)
        body << fmt::format("# regression: slope={:.17g}, intercept={:.17g}, residual={:.17g}, points={}\n", reg.slope,
                            reg.intercept, reg.residual, reg.points);
    else
        body << fmt::format("# regression: undefined, points={}\n", reg.points);
    body << fmt::format("# monotone: {}\n", res.monotone ? "true" : "false");
    const auto path = output_path(cfg, "scaling.csv");
    write_file(path, body.str());
    out << fmt::format("scaling table written to {}\n", path.string());
    return bound_ok ? 0 : 2;
}

struct CalibrateArgs {
    std::optional<int> n;
    std::optional<int> r;
    std::uint64_t samples = 100000;
    double margin = 0.1;
};

int cmd_calibrate(const ExperimentConfig& cfg, const CalibrateArgs& a, std::ostream& out) {
    const int n = a.n ? *a.n : cfg.n;
    const int r = a.r ? *a.r : cfg.r;
    const auto cal = calibrate(n, r, a.samples, cfg.seed, a.margin, cfg.threads);
    const std::string canon =
        fmt::format("calibrate\nn={}\nr={}\nsamples={}\nseed={}\nmargin={:.17g}\n", n, r, a.samples, cfg.seed, a.margin);
    const Header hdr{"calibrate",
                     sha256_hex(canon),
                     cfg.seed,
                     {{"c_n", "brute-force infimum of the sharpened Newton ratio minus the margin"},
                      {"b_consts", "brute-force infimum of the Maclaurin chain ratio minus the margin"}}};
    std::ostringstream body;
    body << header_comment(hdr, ";");
    write_calibration(body, cal);
    const auto path = output_path(cfg, "calibration.ini");
    write_file(path, body.str());
    out << fmt::format("calibration written to {} (c_n = {:.6g})\n", path.string(), cal.c_n);
    return 0;
}

} // namespace

// ---------------------------------------------------------------------------
// Configuration

ExperimentConfig parse_config(std::istream& is, const std::string& base_dir) {
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(fmt::format("config line {}: {}", e.line(), e.message()));
    }
    const auto& allowed = allowed_keys();
    for (const auto& [section, body] : tree) {
        const auto it = allowed.find(section);
        if (it == allowed.end() || body.empty())
            throw ConfigError(fmt::format("unknown config section or top-level key '{}'", section));
        for (const auto& kv : body)
            if (!it->second.count(kv.first))
                throw ConfigError(fmt::format("unknown config key '{}.{}'", section, kv.first));
    }
    auto get = [&](const std::string& key) -> std::optional<std::string> {
        const auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'));
        if (!v) return std::nullopt;
        return trim(*v);
    };

    ExperimentConfig cfg;
    if (auto v = get("surface.n")) cfg.n = parse_number<int>("surface.n", *v);
    if (auto v = get("surface.delta")) cfg.delta = parse_number<double>("surface.delta", *v);
    if (auto v = get("surface.rho0")) cfg.rho0 = parse_number<double>("surface.rho0", *v);
    if (auto v = get("surface.basis")) cfg.basis = parse_basis(*v);
    if (auto v = get("surface.perturbation")) cfg.perturbation = parse_perturbation(*v);

    if (auto v = get("experiment.r")) cfg.r = parse_number<int>("experiment.r", *v);
    if (auto v = get("experiment.h")) cfg.h = parse_number<double>("experiment.h", *v);
    if (auto v = get("experiment.seed")) cfg.seed = parse_number<std::uint64_t>("experiment.seed", *v);
    if (auto v = get("experiment.amplitudes")) cfg.amplitudes = parse_amplitudes(*v);
    if (auto v = get("experiment.hausdorff_order"))
        cfg.hausdorff_order = parse_number<int>("experiment.hausdorff_order", *v);
    if (auto v = get("experiment.threads")) cfg.threads = parse_number<int>("experiment.threads", *v);

    if (auto v = get("quadrature.order")) cfg.quad_order = parse_number<int>("quadrature.order", *v);
    if (auto v = get("quadrature.check_order")) cfg.quad_order_check = parse_number<int>("quadrature.check_order", *v);
    else cfg.quad_order_check = 2 * cfg.quad_order;

    if (auto v = get("constants.eps0")) cfg.eps0 = parse_number<double>("constants.eps0", *v);
    if (auto v = get("constants.c_RS")) cfg.c_RS = parse_number<double>("constants.c_RS", *v);
    if (auto v = get("constants.alpha")) cfg.alpha = parse_number<double>("constants.alpha", *v);
    if (auto v = get("constants.Kn_MS")) cfg.Kn_MS = parse_number<double>("constants.Kn_MS", *v);
    if (auto v = get("constants.c_n_phi")) cfg.c_n_phi = parse_number<double>("constants.c_n_phi", *v);
    if (auto v = get("constants.c_n")) {
        cfg.c_n = parse_number<double>("constants.c_n", *v);
        cfg.c_n_source = "configured";
    }
    if (auto v = get("constants.b_consts")) cfg.b_consts = *v;
    if (auto v = get("constants.calibration_samples"))
        cfg.calibration_samples = parse_number<std::uint64_t>("constants.calibration_samples", *v);
    if (auto v = get("constants.calibration_margin"))
        cfg.calibration_margin = parse_number<double>("constants.calibration_margin", *v);
    if (auto v = get("constants.K1_mode")) {
        try {
            cfg.k1_mode = parse_k1_mode(*v);
        } catch (const ConfigError& e) {
            throw ConfigError(fmt::format("key 'constants.K1_mode': {}", e.what()));
        }
    }
    if (auto v = get("constants.calibration")) {
        if (cfg.c_n) throw ConfigError("keys 'constants.c_n' and 'constants.calibration' are mutually exclusive");
        const fs::path p = fs::path(*v).is_absolute() ? fs::path(*v) : fs::path(base_dir) / *v;
        std::ifstream cis(p);
        if (!cis) throw ConfigError(fmt::format("key 'constants.calibration': cannot open '{}'", p.string()));
        const auto cal = read_calibration(cis);
        if (cal.n != cfg.n || cal.r != cfg.r)
            throw ConfigError(fmt::format("calibration file is for n = {}, r = {}; config has n = {}, r = {}", cal.n,
                                          cal.r, cfg.n, cfg.r));
        cfg.c_n = cal.c_n;
        std::string b;
        for (std::size_t k = 3; k < cal.b.size(); ++k)
            b += fmt::format("{}{}:{:.17g}", b.empty() ? "" : ", ", k, cal.b[k]);
        cfg.b_consts = b;
        cfg.c_n_source = fmt::format("calibration file (seed {}, samples {}, margin {})", cal.seed, cal.samples,
                                     cal.margin);
    }
    if (auto v = get("output.dir")) cfg.out_dir = *v;

    validate_config(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError(fmt::format("cannot open config file '{}'", path));
    const auto dir = fs::path(path).parent_path();
    return parse_config(is, dir.empty() ? std::string(".") : dir.string());
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.n != 2 && cfg.n != 3) throw ConfigError(fmt::format("surface.n = {}: supported values are 2 and 3", cfg.n));
    if (cfg.r < 1 || cfg.r > cfg.n - 1)
        throw ConfigError(fmt::format("experiment.r = {} outside 1..{}", cfg.r, cfg.n - 1));
    if (!(cfg.rho0 > 0.0)) throw ConfigError("surface.rho0 must be positive");
    if (cfg.quad_order < 4) throw ConfigError("quadrature.order must be at least 4");
    if (cfg.quad_order_check < 2 * cfg.quad_order)
        throw ConfigError(fmt::format("quadrature.check_order = {} must be at least 2 * order = {}",
                                      cfg.quad_order_check, 2 * cfg.quad_order));
    if (cfg.hausdorff_order < 4) throw ConfigError("experiment.hausdorff_order must be at least 4");
    if (cfg.threads < 1) throw ConfigError("experiment.threads must be at least 1");
    if (cfg.h && !(*cfg.h > 0.0)) throw ConfigError("experiment.h must be positive");
    if (!(cfg.eps0 > 0.0) || !(cfg.c_RS > 0.0) || !(cfg.alpha > 0.0))
        throw ConfigError("constants eps0, c_RS and alpha must be positive");
    if (cfg.c_n && !(*cfg.c_n > 0.0)) throw ConfigError("constants.c_n must be positive");
    if (cfg.calibration_samples < 10000) throw ConfigError("constants.calibration_samples must be at least 10^4");
    if (!(cfg.calibration_margin >= 0.0 && cfg.calibration_margin < 1.0))
        throw ConfigError("constants.calibration_margin must lie in [0, 1)");
    if (!cfg.b_consts.empty()) {
        try {
            parse_b_consts(cfg.b_consts, cfg.r);
        } catch (const std::logic_error& e) {
            throw ConfigError(fmt::format("key 'constants.b_consts': {}", e.what()));
        }
    }
    for (double a : cfg.amplitudes)
        if (!(a > 0.0)) throw ConfigError("experiment.amplitudes must be positive");

    // The model and the basis indices are checked by the surface constructor.
    const auto surface = make_surface(cfg);
    const double limit = surface.model().max_geodesic_radius();
    if (!(cfg.rho0 < limit))
        throw ConfigError(fmt::format("surface.rho0 = {} exceeds the chart limit {:.6g}", cfg.rho0, limit));
    if (std::isfinite(limit)) {
        double largest = 1.0;
        for (double a : cfg.amplitudes) largest = std::max(largest, a);
        const auto widest = surface.with_perturbation_scale(largest);
        const auto rule = build_rule(cfg.n, cfg.quad_order_check);
        for (const auto& u : rule.nodes)
            if (!(widest.radius_at(u) < limit))
                throw ConfigError(fmt::format("surface radius reaches the chart limit {:.6g} (delta > 0)", limit));
    }
}

std::string canonical_config(const ExperimentConfig& cfg) {
    std::string s;
    s += fmt::format("n={}\ndelta={}\nrho0={}\nbasis={}\n", cfg.n, fmt_double(cfg.delta), fmt_double(cfg.rho0),
                     to_string(cfg.basis));
    for (const auto& t : cfg.perturbation) s += fmt::format("term={}:{}\n", t.index, fmt_double(t.amplitude));
    s += fmt::format("r={}\nh={}\nseed={}\nhausdorff_order={}\n", cfg.r, fmt_optional(cfg.h), cfg.seed,
                     cfg.hausdorff_order);
    for (double a : cfg.amplitudes) s += fmt::format("amplitude={}\n", fmt_double(a));
    s += fmt::format("quad_order={}\nquad_order_check={}\n", cfg.quad_order, cfg.quad_order_check);
    s += fmt::format("eps0={}\nc_RS={}\nalpha={}\nKn_MS={}\nc_n_phi={}\nc_n={}\nb_consts={}\n", fmt_double(cfg.eps0),
                     fmt_double(cfg.c_RS), fmt_double(cfg.alpha), fmt_optional(cfg.Kn_MS), fmt_optional(cfg.c_n_phi),
                     fmt_optional(cfg.c_n), cfg.b_consts);
    s += fmt::format("calibration_samples={}\ncalibration_margin={}\nK1_mode={}\n", cfg.calibration_samples,
                     fmt_double(cfg.calibration_margin), to_string(cfg.k1_mode));
    return s;
}

std::string sha256_hex(const std::string& text) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw NumericalError("SHA-256 digest failed");
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

std::string config_hash(const ExperimentConfig& cfg) { return sha256_hex(canonical_config(cfg)); }

RadialSurface make_surface(const ExperimentConfig& cfg) {
    return RadialSurface(cfg.n, SpaceFormModel(cfg.delta, cfg.n + 1), cfg.rho0, cfg.basis, cfg.perturbation);
}

ConstantsConfig resolve_constants(const ExperimentConfig& cfg) {
    ConstantsConfig cc;
    cc.eps0 = cfg.eps0;
    cc.c_RS = cfg.c_RS;
    cc.alpha = cfg.alpha;
    cc.Kn_MS = cfg.Kn_MS;
    cc.c_n_phi = cfg.c_n_phi;
    cc.k1_mode = cfg.k1_mode;
    if (cfg.r < 2) {
        cc.c_n_source = "not required for r = 1";
        return cc;
    }
    if (cfg.c_n) {
        cc.c_n = *cfg.c_n;
        cc.b = parse_b_consts(cfg.b_consts, cfg.r);
        cc.c_n_source = cfg.c_n_source;
        return cc;
    }
    const auto cal = calibrate(cfg.n, cfg.r, cfg.calibration_samples, cfg.seed, cfg.calibration_margin, cfg.threads);
    cc.c_n = cal.c_n;
    cc.b = cal.b;
    cc.c_n_source = fmt::format("calibrated in run (seed {}, samples {}, margin {})", cal.seed, cal.samples, cal.margin);
    return cc;
}

// ---------------------------------------------------------------------------
// Entry point

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stability experiments for starshaped hypersurfaces in space forms", kToolName};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> quad_order;
    std::optional<std::string> out_dir;
    std::optional<int> threads;
    app.add_option("--config", config_path, "Experiment configuration (INI)");
    app.add_option("--seed", seed, "Override experiment.seed");
    app.add_option("--quad-order", quad_order, "Override quadrature.order (check order becomes twice this)");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--threads", threads, "Worker threads (results do not depend on it)");

    CommandOptions opt;
    CalibrateArgs cal;
    auto* report = app.add_subcommand("report", "Curvature summary of the configured surface");
    auto* identities = app.add_subcommand("identities", "Residuals of the integral identities and inequalities");
    identities->add_flag("--wrong-sign", opt.wrong_sign, "Debug: flip the sign convention of B");
    identities->add_option("--sweep", opt.sweep, "Quadrature orders for a residual decay table")->delimiter(',');
    auto* pinch = app.add_subcommand("pinch", "Full stability experiment on the configured surface");
    auto* scaling = app.add_subcommand("scaling", "Stability experiment over a family of amplitudes");
    scaling->add_option("--amplitudes", opt.amplitudes, "Strictly decreasing amplitudes")->delimiter(',');
    auto* calib = app.add_subcommand("calibrate", "Calibrate c_n and the b constants");
    calib->add_option("--n", cal.n, "Dimension");
    calib->add_option("--r", cal.r, "Curvature order");
    calib->add_option("--samples", cal.samples, "Number of random samples (at least 10^4)");
    calib->add_option("--margin", cal.margin, "Safety margin subtracted from the infimum");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }

    try {
        ExperimentConfig cfg;
        if (!config_path.empty())
            cfg = load_config(config_path);
        else if (!calib->parsed())
            throw ConfigError("--config is required for this command");
        if (seed) cfg.seed = *seed;
        if (quad_order) {
            cfg.quad_order = *quad_order;
            cfg.quad_order_check = 2 * *quad_order;
        }
        if (out_dir) cfg.out_dir = *out_dir;
        if (threads) cfg.threads = *threads;
        if (!config_path.empty()) validate_config(cfg);
        if (cfg.threads < 1) throw ConfigError("--threads must be at least 1");

        if (report->parsed()) return cmd_report(cfg, out);
        if (identities->parsed()) return cmd_identities(cfg, opt, out, err);
        if (pinch->parsed()) return cmd_pinch(cfg, out, err);
        if (scaling->parsed()) return cmd_scaling(cfg, opt, out, err);
        if (calib->parsed()) return cmd_calibrate(cfg, cal, out);
        return 3;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return 3;
    } catch (const HypothesisError& e) {
        err << "hypothesis violation: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 2;
    }
}

} // namespace starpinch
