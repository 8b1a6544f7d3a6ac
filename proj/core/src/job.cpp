#include "acdiag/job.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "acdiag/analysis.hpp"
#include "acdiag/expr.hpp"
#include "acdiag/extraction.hpp"

namespace acdiag::job {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("failed writing " + path.string());
}

void write_json(const fs::path& path, const json& doc) {
    write_file(path, doc.dump(2) + "\n");
}

// deterministic uniform in [0,1) from the raw engine output
double unit_draw(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const char* ctx) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok)
            throw ConfigError(std::string("unknown key '") + it.key() +
                              "' in " + ctx);
    }
}

double parse_extended_real(const json& j, const char* ctx) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return Interval::inf();
        if (s == "-inf") return -Interval::inf();
    }
    throw ConfigError(std::string("expected a number or \"[+-]inf\" for ") + ctx);
}

Interval parse_interval(const json& j) {
    if (!j.is_object()) throw ConfigError("'domain' must be an object");
    check_keys(j, {"lo", "hi", "closed_lo", "closed_hi"}, "domain");
    Interval itv;
    itv.lo = j.contains("lo") ? parse_extended_real(j.at("lo"), "domain.lo") : 0.0;
    itv.hi = j.contains("hi") ? parse_extended_real(j.at("hi"), "domain.hi") : 1.0;
    itv.closed_lo = j.value("closed_lo", std::isfinite(itv.lo));
    itv.closed_hi = j.value("closed_hi", std::isfinite(itv.hi));
    try {
        itv.validate();
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return itv;
}

NormedTarget parse_target(const json& j) {
    if (!j.is_object()) throw ConfigError("'target' must be an object");
    check_keys(j, {"dim", "norm", "p"}, "target");
    int dim = j.value("dim", 1);
    std::string norm = j.value("norm", std::string("l2"));
    try {
        if (norm == "l1") return NormedTarget::l1(dim);
        if (norm == "l2") return NormedTarget::l2(dim);
        if (norm == "linf") return NormedTarget::linf(dim);
        if (norm == "pseudo") {
            if (!j.contains("p"))
                throw ConfigError("pseudo norm requires 'p'");
            return NormedTarget::pseudo(j.at("p").get<double>());
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("unknown norm kind '" + norm + "'");
}

std::vector<std::string> parse_expr_field(const json& j, const char* ctx) {
    if (j.is_string()) return {j.get<std::string>()};
    if (j.is_array()) {
        std::vector<std::string> out;
        for (const auto& e : j) {
            if (!e.is_string())
                throw ConfigError(std::string(ctx) + ": expressions must be "
                                                     "strings");
            out.push_back(e.get<std::string>());
        }
        if (out.empty())
            throw ConfigError(std::string(ctx) + ": expression list is empty");
        return out;
    }
    throw ConfigError(std::string(ctx) + " must be a string or string array");
}

GSpec parse_gspec(const json& j, int n_max, double eps_coeff, double eps_ratio) {
    if (!j.is_object()) throw ConfigError("'g' must be an object");
    check_keys(j, {"expr", "stages", "tail_bounds"}, "g");
    GSpec g;
    if (j.contains("expr")) g.exprs = parse_expr_field(j.at("expr"), "g.expr");
    if (j.contains("stages")) {
        for (const auto& e : j.at("stages")) {
            if (!e.is_string())
                throw ConfigError("g.stages must be strings");
            g.stage_exprs.push_back(e.get<std::string>());
        }
        if (g.stage_exprs.empty()) throw ConfigError("g.stages is empty");
        if (!j.contains("tail_bounds"))
            throw ConfigError("g.stages requires g.tail_bounds");
        const json& tb = j.at("tail_bounds");
        if (tb.is_array()) {
            for (const auto& t : tb) g.stage_tails.push_back(t.get<double>());
        } else if (tb.is_object()) {
            check_keys(tb, {"coeff", "ratio"}, "g.tail_bounds");
            double coeff = tb.value("coeff", eps_coeff);
            double ratio = tb.value("ratio", eps_ratio);
            for (std::size_t n = 1; n <= g.stage_exprs.size(); ++n)
                g.stage_tails.push_back(coeff *
                                        std::pow(ratio, static_cast<double>(n)));
        } else {
            throw ConfigError("g.tail_bounds must be an array or "
                              "{coeff, ratio}");
        }
        if (g.stage_tails.size() != g.stage_exprs.size())
            throw ConfigError("g.tail_bounds size must match g.stages");
    }
    (void)n_max;
    if (g.exprs.empty() == g.stage_exprs.empty())
        throw ConfigError("g needs exactly one of 'expr' or 'stages'");
    return g;
}

}  // namespace

Command command_from_name(const std::string& name) {
    if (name == "extend") return Command::Extend;
    if (name == "extract") return Command::Extract;
    if (name == "analyze") return Command::Analyze;
    if (name == "roundtrip") return Command::Roundtrip;
    if (name == "demo") return Command::Demo;
    throw ConfigError("unknown command '" + name + "'");
}

std::string command_name(Command c) {
    switch (c) {
        case Command::Extend: return "extend";
        case Command::Extract: return "extract";
        case Command::Analyze: return "analyze";
        case Command::Roundtrip: return "roundtrip";
        case Command::Demo: return "demo";
    }
    return "?";
}

void JobConfig::validate() const {
    if (n_max < 2) throw ConfigError("n_max must be >= 2");
    if (levels < 1) throw ConfigError("levels must be >= 1");
    if (!(diagonal_tol > 0.0)) throw ConfigError("tolerances.diagonal must be > 0");
    if (!(eps_coeff > 0.0) || !(eps_ratio > 0.0 && eps_ratio < 1.0))
        throw ConfigError("eps_schedule needs coeff > 0 and ratio in (0,1)");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (sections < 0) throw ConfigError("sections must be >= 0");
    if (surface_csv_points < 2 || diagonal_points < 2 || extract_samples < 2 ||
        roundtrip_samples < 2)
        throw ConfigError("grid sizes must be >= 2");
    switch (command) {
        case Command::Extend:
        case Command::Roundtrip:
            if (!g.present())
                throw ConfigError(command_name(command) + " requires 'g'");
            if (!surface_exprs.empty())
                throw ConfigError(command_name(command) +
                                  " takes 'g', not 'surface'");
            break;
        case Command::Extract:
            if (surface_exprs.empty())
                throw ConfigError("extract requires 'surface'");
            if (g.present())
                throw ConfigError("extract takes 'surface', not 'g'");
            break;
        case Command::Analyze:
            if (g.present() == !surface_exprs.empty())
                throw ConfigError("analyze requires exactly one of 'g' or "
                                  "'surface'");
            break;
        case Command::Demo:
            if (demo != "step" && demo != "xsin" && demo != "weierstrass" &&
                demo != "pseudonorm")
                throw ConfigError("unknown demo '" + demo + "'");
            break;
    }
    if (g.is_series() && target.dim != 1)
        throw ConfigError("stage-list g requires a dim-1 target");
}

JobConfig config_from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config root must be an object");
    check_keys(doc,
               {"command", "demo", "domain", "target", "g", "surface", "n_max",
                "levels", "tolerances", "eps_schedule", "grids", "sections",
                "modulus_eps", "pseudo", "seed", "threads", "out"},
               "config");

    JobConfig cfg;
    if (!doc.contains("command")) throw ConfigError("config requires 'command'");
    cfg.command = command_from_name(doc.at("command").get<std::string>());
    cfg.demo = doc.value("demo", cfg.demo);
    if (doc.contains("domain")) cfg.domain = parse_interval(doc.at("domain"));
    if (doc.contains("target")) cfg.target = parse_target(doc.at("target"));
    cfg.n_max = doc.value("n_max", cfg.n_max);
    cfg.levels = doc.value("levels", cfg.levels);
    if (doc.contains("eps_schedule")) {
        const json& es = doc.at("eps_schedule");
        check_keys(es, {"coeff", "ratio"}, "eps_schedule");
        cfg.eps_coeff = es.value("coeff", cfg.eps_coeff);
        cfg.eps_ratio = es.value("ratio", cfg.eps_ratio);
    }
    if (doc.contains("g"))
        cfg.g = parse_gspec(doc.at("g"), cfg.n_max, cfg.eps_coeff, cfg.eps_ratio);
    if (doc.contains("surface"))
        cfg.surface_exprs = [&] {
            const json& s = doc.at("surface");
            if (!s.is_object()) throw ConfigError("'surface' must be an object");
            check_keys(s, {"expr"}, "surface");
            if (!s.contains("expr"))
                throw ConfigError("'surface' requires 'expr'");
            return parse_expr_field(s.at("expr"), "surface.expr");
        }();
    if (doc.contains("tolerances")) {
        const json& t = doc.at("tolerances");
        check_keys(t, {"diagonal", "roundtrip"}, "tolerances");
        cfg.diagonal_tol = t.value("diagonal", cfg.diagonal_tol);
        cfg.roundtrip_tol = t.value("roundtrip", cfg.roundtrip_tol);
    }
    if (doc.contains("grids")) {
        const json& gr = doc.at("grids");
        check_keys(gr,
                   {"surface_csv", "diagonal", "extract_samples",
                    "roundtrip_samples", "variation_points", "ac_cells"},
                   "grids");
        cfg.surface_csv_points = gr.value("surface_csv", cfg.surface_csv_points);
        cfg.diagonal_points = gr.value("diagonal", cfg.diagonal_points);
        cfg.extract_samples = gr.value("extract_samples", cfg.extract_samples);
        cfg.roundtrip_samples =
            gr.value("roundtrip_samples", cfg.roundtrip_samples);
        cfg.variation_points = gr.value("variation_points", cfg.variation_points);
        cfg.ac_cells = gr.value("ac_cells", cfg.ac_cells);
    }
    cfg.sections = doc.value("sections", cfg.sections);
    if (doc.contains("modulus_eps"))
        cfg.modulus_eps = doc.at("modulus_eps").get<std::vector<double>>();
    if (doc.contains("pseudo")) {
        const json& p = doc.at("pseudo");
        check_keys(p, {"p", "scales"}, "pseudo");
        cfg.pseudo_p = p.value("p", cfg.pseudo_p);
        if (p.contains("scales"))
            cfg.pseudo_scales = p.at("scales").get<std::vector<double>>();
    }
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.threads = doc.value("threads", cfg.threads);
    cfg.out_dir = doc.value("out", cfg.out_dir);
    return cfg;
}

JobConfig config_from_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json_text(ss.str());
}

JobConfig demo_config(const std::string& name) {
    JobConfig cfg;
    cfg.command = Command::Demo;
    cfg.demo = name;
    cfg.domain = Interval::closed(0.0, 1.0);
    cfg.target = NormedTarget::l2(1);
    if (name == "step") {
        for (int n = 1; n <= cfg.n_max; ++n) {
            cfg.g.stage_exprs.push_back("ramp(0.5-1/" + std::to_string(n) +
                                        ",0.5,x)");
            // the stage sequence is monotone with pointwise range <= 1, but
            // there is no smaller uniform tail: sup_x of the remaining
            // increments stays 1 at every stage
            cfg.g.stage_tails.push_back(1.0);
        }
    } else if (name == "xsin") {
        cfg.g.exprs = {"x*sin(1/x)"};
    } else if (name == "weierstrass") {
        std::string e;
        for (int k = 1; k <= 8; ++k) {
            if (k > 1) e += "+";
            e += fmt17(std::ldexp(1.0, -k)) + "*cos(" +
                 std::to_string(static_cast<long>(std::pow(3.0, k))) + "*x)";
        }
        cfg.g.exprs = {e};
    } else if (name == "pseudonorm") {
        cfg.target = NormedTarget::pseudo(0.5);
    } else {
        throw ConfigError("unknown demo '" + name + "'");
    }
    return cfg;
}

void apply_env_overrides(JobConfig& cfg) {
    auto get = [](const char* key) -> const char* { return std::getenv(key); };
    auto as_double = [](const char* key, const char* v) {
        char* end = nullptr;
        double d = std::strtod(v, &end);
        if (end == v || *end != '\0')
            throw ConfigError(std::string(key) + ": invalid number");
        return d;
    };
    auto as_long = [&](const char* key, const char* v) {
        double d = as_double(key, v);
        if (d != std::floor(d))
            throw ConfigError(std::string(key) + ": expected an integer");
        return static_cast<long long>(d);
    };
    auto set_int = [&](const char* key, auto& field) {
        if (const char* v = get(key))
            field = static_cast<std::remove_reference_t<decltype(field)>>(
                as_long(key, v));
    };
    auto set_double = [&](const char* key, double& field) {
        if (const char* v = get(key)) field = as_double(key, v);
    };
    if (const char* v = get("ACDIAG_COMMAND")) cfg.command = command_from_name(v);
    if (const char* v = get("ACDIAG_DEMO")) cfg.demo = v;
    if (const char* v = get("ACDIAG_OUT")) cfg.out_dir = v;
    set_int("ACDIAG_SEED", cfg.seed);
    set_int("ACDIAG_THREADS", cfg.threads);
    set_int("ACDIAG_N_MAX", cfg.n_max);
    set_int("ACDIAG_LEVELS", cfg.levels);
    set_int("ACDIAG_SECTIONS", cfg.sections);
    set_int("ACDIAG_SURFACE_CSV", cfg.surface_csv_points);
    set_int("ACDIAG_DIAGONAL_POINTS", cfg.diagonal_points);
    set_int("ACDIAG_EXTRACT_SAMPLES", cfg.extract_samples);
    set_int("ACDIAG_ROUNDTRIP_SAMPLES", cfg.roundtrip_samples);
    set_int("ACDIAG_VARIATION_POINTS", cfg.variation_points);
    set_int("ACDIAG_AC_CELLS", cfg.ac_cells);
    set_double("ACDIAG_DIAGONAL_TOL", cfg.diagonal_tol);
    set_double("ACDIAG_ROUNDTRIP_TOL", cfg.roundtrip_tol);
    set_double("ACDIAG_EPS_COEFF", cfg.eps_coeff);
    set_double("ACDIAG_EPS_RATIO", cfg.eps_ratio);
    set_double("ACDIAG_PSEUDO_P", cfg.pseudo_p);
}

ContinuousMap make_univariate(const std::vector<std::string>& exprs,
                              const NormedTarget& target) {
    if (static_cast<int>(exprs.size()) != target.dim)
        throw ConfigError("g needs one expression per target coordinate");
    std::vector<expr::Expression> parsed;
    for (const auto& s : exprs) parsed.push_back(expr::Expression::parse(s, 1));
    return [parsed](double x) {
        Vec v(parsed.size());
        for (std::size_t k = 0; k < parsed.size(); ++k) v[k] = parsed[k](x);
        return v;
    };
}

BivariateMap make_bivariate(const std::vector<std::string>& exprs,
                            const NormedTarget& target) {
    if (static_cast<int>(exprs.size()) != target.dim)
        throw ConfigError("surface needs one expression per target coordinate");
    std::vector<expr::Expression> parsed;
    for (const auto& s : exprs) parsed.push_back(expr::Expression::parse(s, 2));
    return [parsed](double x, double y) {
        Vec v(parsed.size());
        for (std::size_t k = 0; k < parsed.size(); ++k) v[k] = parsed[k](x, y);
        return v;
    };
}

BaireSeries make_declared_series(const GSpec& g, const Interval& domain,
                                 const NormedTarget& target) {
    if (!g.is_series()) throw ConfigError("g does not declare a stage list");
    if (target.dim != 1) throw ConfigError("stage-list g requires dim 1");
    BaireSeries s;
    s.domain = domain;
    s.target = target;
    for (const auto& src : g.stage_exprs) {
        expr::Expression e = expr::Expression::parse(src, 1);
        s.stages.push_back([e](double x) { return Vec{e(x)}; });
    }
    s.tail_bounds = g.stage_tails;
    s.validate();
    return s;
}

extension::ExtensionSurface build_from_config(const JobConfig& cfg) {
    extension::SurfaceBuildOptions opts;
    opts.n_max = cfg.n_max;
    opts.eps_schedule = smoothing::EpsSchedule{cfg.eps_coeff, cfg.eps_ratio};
    if (cfg.g.is_series()) {
        BaireSeries declared =
            make_declared_series(cfg.g, cfg.domain, cfg.target);
        return extension::build_surface(declared, opts);
    }
    ContinuousMap g = make_univariate(cfg.g.exprs, cfg.target);
    return extension::build_surface(g, cfg.domain, cfg.target, opts);
}

namespace {

json interval_json(const Interval& itv) {
    json j;
    j["lo"] = std::isfinite(itv.lo) ? json(itv.lo) : json("-inf");
    j["hi"] = std::isfinite(itv.hi) ? json(itv.hi) : json("inf");
    j["closed_lo"] = itv.closed_lo;
    j["closed_hi"] = itv.closed_hi;
    return j;
}

json target_json(const NormedTarget& t) {
    json j;
    j["dim"] = t.dim;
    j["norm"] = t.kind_name();
    if (t.kind == NormKind::PseudoP) j["p"] = t.p;
    return j;
}

// bounded stand-in for report grids on unbounded domains
Interval output_interval(const JobConfig& cfg,
                         const extension::ExtensionSurface* s) {
    if (cfg.domain.bounded())
        return Interval::closed(cfg.domain.lo, cfg.domain.hi);
    if (s) {
        auto [lo, hi] = s->exhaustion.segment(s->n_max());
        return Interval::closed(lo, hi);
    }
    double lo = cfg.domain.bounded_below() ? cfg.domain.lo : -8.0;
    double hi = cfg.domain.bounded_above() ? cfg.domain.hi : 8.0;
    return Interval::closed(lo, hi);
}

std::vector<double> sample_points(const Interval& box, const Interval& domain,
                                  int count) {
    auto grid = grids::uniform(box.lo, box.hi, static_cast<std::size_t>(count));
    std::vector<double> pts;
    for (double x : grid)
        if (domain.contains(x)) pts.push_back(x);
    return pts;
}

struct DiagonalCheck {
    double max_err = 0.0;
    double max_residual = 0.0;
    double budget = 0.0;
    std::string reference;
    bool pass = false;
};

DiagonalCheck diagonal_check(const JobConfig& cfg,
                             const extension::ExtensionSurface& s) {
    Interval box = output_interval(cfg, &s);
    auto pts = sample_points(box, cfg.domain, cfg.diagonal_points);

    ContinuousMap reference;
    DiagonalCheck out;
    if (cfg.g.is_series()) {
        // compare against the declared top stage: the diagonal branch must
        // reproduce the truncated series up to the mollification dust
        expr::Expression top = expr::Expression::parse(
            cfg.g.stage_exprs.back(), 1);
        reference = [top](double x) { return Vec{top(x)}; };
        extension::SurfaceBuildOptions opts;  // mirror of build_from_config
        opts.eps_schedule = smoothing::EpsSchedule{cfg.eps_coeff, cfg.eps_ratio};
        out.budget = cfg.diagonal_tol +
                     opts.declared_stage_eps_factor *
                         opts.eps_schedule.eps(s.n_max());
        out.reference = "declared_top_stage";
    } else {
        reference = make_univariate(cfg.g.exprs, cfg.target);
        out.budget = cfg.diagonal_tol + s.truncation_residual();
        out.reference = "g";
    }

    for (double x : pts) {
        auto fv = extension::eval_surface(s, x, x, cfg.diagonal_tol);
        out.max_err =
            std::max(out.max_err, cfg.target.distance(fv.value, reference(x)));
        out.max_residual = std::max(out.max_residual, fv.residual);
    }
    out.pass = out.max_err <= out.budget;
    return out;
}

json certificate_json(const JobConfig& cfg, const extension::ExtensionSurface& s,
                      const DiagonalCheck& diag) {
    json doc;
    doc["schema"] = "acdiag/extension-certificate/v1";
    doc["command"] = command_name(cfg.command);
    doc["seed"] = cfg.seed;
    doc["domain"] = interval_json(cfg.domain);
    doc["target"] = target_json(cfg.target);
    doc["n_max"] = s.n_max();
    doc["eps_schedule"] = {{"coeff", cfg.eps_coeff}, {"ratio", cfg.eps_ratio}};

    json segs = json::array();
    for (int n = 1; n <= s.n_max(); ++n) {
        auto [lo, hi] = s.exhaustion.segment(n);
        segs.push_back({{"lo", lo}, {"hi", hi}});
    }
    doc["exhaustion"] = segs;

    json bands = json::array();
    for (int n = 1; n <= s.scheme.bands(); ++n) {
        std::size_t i = static_cast<std::size_t>(n - 1);
        json b;
        b["n"] = n;
        b["delta"] = s.scheme.delta_n(n);
        b["delta_next"] = s.scheme.delta_n(n + 1);
        b["K"] = s.scheme.K[i];
        b["L"] = s.scheme.L[i];
        b["M"] = s.scheme.M[i];
        b["C"] = s.scheme.C[i];
        b["sup_stage_diff"] = s.scheme.stage_sup_diff[i];
        b["stage_eps"] = s.stage_eps[i];
        b["stage_knots"] = s.stage(n).pl ? s.stage(n).pl->size() : 0;
        bands.push_back(b);
    }
    doc["bands"] = bands;
    doc["sum_K_delta"] = s.scheme.sum_K_delta();

    json tails = json::array();
    for (int m = 1; m <= s.scheme.bands(); ++m)
        tails.push_back({{"m", m},
                         {"tail", s.scheme.tail_C_dd(m)},
                         {"bound", s.scheme.tail_certificate_bound(m)}});
    doc["summability"] = tails;
    doc["truncation_residual"] = s.truncation_residual();

    doc["diagonal_check"] = {{"points", cfg.diagonal_points},
                             {"max_err", diag.max_err},
                             {"max_reported_residual", diag.max_residual},
                             {"budget", diag.budget},
                             {"reference", diag.reference},
                             {"pass", diag.pass}};
    return doc;
}

json section_certificates_json(const JobConfig& cfg,
                               const extension::ExtensionSurface& s) {
    json out = json::array();
    if (!cfg.domain.bounded() || cfg.sections == 0) return out;
    std::mt19937_64 rng(cfg.seed);
    for (int i = 0; i < cfg.sections; ++i) {
        double u = unit_draw(rng);
        double x0 = cfg.domain.lo +
                    (1e-6 + 0.999998 * u) * cfg.domain.length();
        auto cert = analysis::section_ac_certificate(s, x0);
        ContinuousMap fx0 =
            extension::section(s, extension::Axis::Second, x0, cfg.diagonal_tol);
        json rows = json::array();
        for (double eps : cfg.modulus_eps) {
            double delta = cert.delta_for_eps(eps);
            double modulus = analysis::ac_modulus(
                fx0, cfg.target, output_interval(cfg, &s), delta, cfg.ac_cells,
                cfg.threads);
            rows.push_back({{"eps", eps},
                            {"delta", delta},
                            {"modulus", modulus},
                            {"pass", modulus < eps}});
        }
        out.push_back({{"x0", x0},
                       {"tail_from_band_1", cert.tail_term(1)},
                       {"jump", cert.jump},
                       {"declared_residual", cert.declared_residual},
                       {"checks", rows}});
    }
    return out;
}

void write_surface_csv(const JobConfig& cfg, const extension::ExtensionSurface& s,
                       const fs::path& path) {
    Interval box = output_interval(cfg, &s);
    auto axis = sample_points(box, cfg.domain, cfg.surface_csv_points);
    std::string csv = "x,y";
    for (int k = 1; k <= cfg.target.dim; ++k)
        csv += ",f_" + std::to_string(k);
    csv += "\n";
    for (double x : axis)
        for (double y : axis) {
            auto fv = extension::eval_surface(s, x, y, cfg.diagonal_tol);
            csv += fmt17(x);
            csv += ',';
            csv += fmt17(y);
            for (double c : fv.value) {
                csv += ',';
                csv += fmt17(c);
            }
            csv += '\n';
        }
    write_file(path, csv);
}

void write_diagonal_csv(const JobConfig& cfg,
                        const extension::ExtensionSurface& s,
                        const fs::path& path) {
    Interval box = output_interval(cfg, &s);
    auto pts = sample_points(box, cfg.domain, cfg.diagonal_points);
    std::string csv = "x,y";
    for (int k = 1; k <= cfg.target.dim; ++k)
        csv += ",f_" + std::to_string(k);
    csv += "\n";
    for (double x : pts) {
        auto fv = extension::eval_surface(s, x, x, cfg.diagonal_tol);
        csv += fmt17(x);
        csv += ',';
        csv += fmt17(x);
        for (double c : fv.value) {
            csv += ',';
            csv += fmt17(c);
        }
        csv += '\n';
    }
    write_file(path, csv);
}

int run_extend(const JobConfig& cfg) {
    extension::ExtensionSurface s = build_from_config(cfg);
    DiagonalCheck diag = diagonal_check(cfg, s);
    json cert = certificate_json(cfg, s, diag);
    cert["sections"] = section_certificates_json(cfg, s);
    fs::path out(cfg.out_dir);
    write_json(out / "certificate.json", cert);
    write_surface_csv(cfg, s, out / "surface.csv");
    write_diagonal_csv(cfg, s, out / "diagonal.csv");
    if (!diag.pass)
        throw NumericError("diagonal verification failed: max_err " +
                           fmt17(diag.max_err) + " > budget " +
                           fmt17(diag.budget));
    return 0;
}

int run_extract(const JobConfig& cfg) {
    BivariateMap f = make_bivariate(cfg.surface_exprs, cfg.target);
    Interval box = output_interval(cfg, nullptr);
    auto samples = sample_points(box, cfg.domain, cfg.extract_samples);
    auto res = extraction::extract_series(f, cfg.domain, cfg.target, cfg.levels,
                                          samples);

    json doc;
    doc["schema"] = "acdiag/extraction-report/v1";
    doc["command"] = command_name(cfg.command);
    doc["seed"] = cfg.seed;
    doc["domain"] = interval_json(cfg.domain);
    doc["target"] = target_json(cfg.target);
    doc["levels"] = cfg.levels;
    doc["samples"] = samples.size();
    json per_level = json::array();
    for (const auto& lv : res.summary)
        per_level.push_back({{"n", lv.n},
                             {"max_err", lv.max_err},
                             {"max_increment", lv.max_increment},
                             {"spliced_count", lv.spliced_count},
                             {"max_cert_violation", lv.max_cert_violation},
                             {"beta_min", lv.beta_min},
                             {"beta_max", lv.beta_max}});
    doc["per_level"] = per_level;
    doc["max_partial_sum"] =
        res.partial_sums.empty()
            ? 0.0
            : *std::max_element(res.partial_sums.begin(), res.partial_sums.end());

    fs::path out(cfg.out_dir);
    write_json(out / "extraction.json", doc);

    std::string csv =
        "level,max_err,max_increment,spliced_count,max_cert_violation\n";
    for (const auto& lv : res.summary) {
        csv += std::to_string(lv.n);
        csv += ',';
        csv += fmt17(lv.max_err);
        csv += ',';
        csv += fmt17(lv.max_increment);
        csv += ',';
        csv += std::to_string(lv.spliced_count);
        csv += ',';
        csv += fmt17(lv.max_cert_violation);
        csv += '\n';
    }
    write_file(out / "convergence.csv", csv);
    return 0;
}

int run_analyze(const JobConfig& cfg) {
    fs::path out(cfg.out_dir);
    json doc;
    doc["schema"] = "acdiag/variation-report/v1";
    doc["command"] = command_name(cfg.command);
    doc["seed"] = cfg.seed;
    doc["domain"] = interval_json(cfg.domain);
    doc["target"] = target_json(cfg.target);

    auto report_json = [](const VariationReport& rep, double lip) {
        json r;
        r["interval"] = interval_json(rep.interval);
        r["partition_size"] = rep.partition_size();
        r["total"] = rep.total;
        json table = json::array();
        for (auto [delta, sup] : rep.modulus_table)
            table.push_back({{"delta", delta}, {"sup_sum", sup}});
        r["modulus_table"] = table;
        r["lipschitz_estimate"] = lip;
        return r;
    };

    if (cfg.g.present()) {
        if (cfg.g.is_series())
            throw ConfigError("analyze expects a closed-form g");
        ContinuousMap f = make_univariate(cfg.g.exprs, cfg.target);
        Interval box = output_interval(cfg, nullptr);
        VariationReport rep = analysis::variation(f, cfg.target, box,
                                                  cfg.variation_points,
                                                  cfg.threads);
        std::size_t lip_points =
            grids::scaled_points(box.length(), grids::kLipschitzPerUnit);
        double lip = analysis::lipschitz_estimate(f, cfg.target, box,
                                                  lip_points, cfg.threads);
        doc["g"] = report_json(rep, lip);

        std::string csv = "delta,sup_sum\n";
        for (auto [delta, sup] : rep.modulus_table) {
            csv += fmt17(delta);
            csv += ',';
            csv += fmt17(sup);
            csv += '\n';
        }
        write_file(out / "modulus.csv", csv);
    } else {
        BivariateMap f = make_bivariate(cfg.surface_exprs, cfg.target);
        Interval box = output_interval(cfg, nullptr);
        std::mt19937_64 rng(cfg.seed);
        json sections = json::array();
        for (int i = 0; i < std::max(1, cfg.sections); ++i) {
            double u = unit_draw(rng);
            double x0 = box.lo + (1e-6 + 0.999998 * u) * box.length();
            ContinuousMap sec = [f, x0](double y) { return f(x0, y); };
            VariationReport rep = analysis::variation(sec, cfg.target, box,
                                                      cfg.variation_points,
                                                      cfg.threads);
            std::size_t lip_points =
                grids::scaled_points(box.length(), grids::kLipschitzPerUnit);
            double lip = analysis::lipschitz_estimate(sec, cfg.target, box,
                                                      lip_points, cfg.threads);
            json r = report_json(rep, lip);
            r["x0"] = x0;
            sections.push_back(r);
        }
        doc["sections"] = sections;
    }
    write_json(out / "variation_report.json", doc);
    return 0;
}

int run_roundtrip(const JobConfig& cfg) {
    extension::ExtensionSurface s = build_from_config(cfg);
    auto sp = std::make_shared<const extension::ExtensionSurface>(std::move(s));
    double tol = cfg.diagonal_tol;
    BivariateMap oracle = [sp, tol](double x, double y) {
        return extension::eval_surface(*sp, x, y, tol).value;
    };
    Interval box = output_interval(cfg, sp.get());
    auto samples = sample_points(box, cfg.domain, cfg.roundtrip_samples);
    int levels = sp->n_max();
    auto res = extraction::extract_series(oracle, cfg.domain, cfg.target,
                                          levels, samples);

    // compare the deepest extracted level against the series diagonal
    double max_err = 0.0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        auto ref = sum_series(sp->diagonal_source, samples[k], tol);
        max_err = std::max(
            max_err, cfg.target.distance(
                         res.values[static_cast<std::size_t>(levels - 1)][k],
                         ref.value));
    }
    double budget = cfg.roundtrip_tol + sp->truncation_residual();
    bool pass = max_err <= budget;

    json doc;
    doc["schema"] = "acdiag/roundtrip-report/v1";
    doc["command"] = command_name(cfg.command);
    doc["seed"] = cfg.seed;
    doc["domain"] = interval_json(cfg.domain);
    doc["target"] = target_json(cfg.target);
    doc["levels"] = levels;
    doc["samples"] = samples.size();
    doc["max_err_vs_series"] = max_err;
    doc["budget"] = budget;
    doc["truncation_residual"] = sp->truncation_residual();
    doc["pass"] = pass;
    write_json(fs::path(cfg.out_dir) / "roundtrip.json", doc);
    if (!pass)
        throw NumericError("roundtrip recovery failed: max_err " +
                           fmt17(max_err) + " > budget " + fmt17(budget));
    return 0;
}

int run_pseudonorm(const JobConfig& cfg) {
    auto table =
        analysis::pseudo_norm_obstruction(cfg.pseudo_p, cfg.pseudo_scales);
    json doc;
    doc["schema"] = "acdiag/pseudo-norm-table/v1";
    doc["command"] = command_name(cfg.command);
    doc["seed"] = cfg.seed;
    doc["p"] = cfg.pseudo_p;
    json rows = json::array();
    for (auto [h, ratio] : table)
        rows.push_back({{"h", h}, {"ratio", ratio}});
    doc["rows"] = rows;
    write_json(fs::path(cfg.out_dir) / "pseudonorm.json", doc);

    std::string csv = "h,ratio\n";
    for (auto [h, ratio] : table) {
        csv += fmt17(h);
        csv += ',';
        csv += fmt17(ratio);
        csv += '\n';
    }
    write_file(fs::path(cfg.out_dir) / "ratios.csv", csv);
    return 0;
}

}  // namespace

int run(const JobConfig& cfg) {
    try {
        cfg.validate();
        fs::create_directories(cfg.out_dir);
        switch (cfg.command) {
            case Command::Extend: return run_extend(cfg);
            case Command::Extract: return run_extract(cfg);
            case Command::Analyze: return run_analyze(cfg);
            case Command::Roundtrip: return run_roundtrip(cfg);
            case Command::Demo:
                if (cfg.demo == "pseudonorm") return run_pseudonorm(cfg);
                return run_extend(cfg);
        }
        throw ConfigError("unhandled command");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace acdiag::job
