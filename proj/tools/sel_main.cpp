// sel: batch front end for the singular elliptic lab.
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sel/barrier.hpp"
#include "sel/classifier.hpp"
#include "sel/eigensolver.hpp"
#include "sel/errors.hpp"
#include "sel/rates.hpp"
#include "sel/scalar_solver.hpp"
#include "sel/system_solver.hpp"
#include "suite.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace sel;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { ok = 0, failed = 1, config = 2, solver = 3, regime = 4 };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown for regimes the tool refuses to run; carries the reason shown to the user.
struct RegimeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json defaults() {
    return json{
        {"command", nullptr},
        {"operator", {{"kind", "laplacian"}, {"lambda", 1.0}, {"Lambda", 1.0}, {"Gamma", 0.0}, {"gamma", 0.0},
                      {"drift", {0.0, 0.0}}, {"zeroth", 0.0}}},
        {"domain", {{"kind", "interval"}, {"lo", 0.0}, {"hi", 1.0}, {"y0", 0.0}, {"y1", 1.0}, {"radius", 1.0}}},
        {"grid", {{"n", 401}, {"grading", 2.0}, {"n_theta", 0}}},
        {"exponents", {{"p", 0.25}, {"q", 0.25}, {"r", 0.25}, {"s", 0.25}}},
        {"scalar", {{"p", 0.5}, {"weight", {{"form", "power"}, {"q", 0.5}, {"a", 0.0}, {"A", 2.0}}}}},
        {"solver", {{"tol", 1e-12}, {"max_iter", 200}, {"eps0", 1.0}, {"eps_ratio", 0.25}, {"eps_min", 1e-10},
                    {"picard_tol", 1e-10}, {"picard_max_iter", 60}}},
        {"barrier", {{"alpha", 0.3}, {"beta", 0.4}, {"b", 0.5}, {"samples", 2000}, {"route", "forward"}}},
        {"sweep", {{"p", {0.0, 3.0, 0.375}}, {"q", {0.375, 3.0, 0.375}}, {"r", {0.375, 3.0, 0.375}},
                   {"s", {0.0, 3.0, 0.375}}}},
        {"acceptance", {{"only", json::array()}}},
        {"output", {{"dir", nullptr}}},
    };
}

// Every key of `in` must exist in `schema` with a compatible type.
void check_keys(const json& in, const json& schema, const std::string& path) {
    if (!in.is_object()) throw ConfigError(path + " must be an object");
    for (auto it = in.begin(); it != in.end(); ++it) {
        const std::string where = path.empty() ? it.key() : path + "." + it.key();
        if (!schema.contains(it.key())) throw ConfigError("unknown key '" + where + "'");
        const json& want = schema[it.key()];
        const json& got = it.value();
        if (want.is_object()) {
            check_keys(got, want, where);
        } else if (want.is_number() && !got.is_number()) {
            throw ConfigError("'" + where + "' must be a number");
        } else if (want.is_string() && !got.is_string()) {
            throw ConfigError("'" + where + "' must be a string");
        } else if (want.is_array() && !got.is_array()) {
            throw ConfigError("'" + where + "' must be an array");
        } else if (want.is_null() && !got.is_null() && !got.is_string()) {
            throw ConfigError("'" + where + "' must be a string");
        } else if (it.key() == "grading" && !(got.is_number() || got == "uniform")) {
            throw ConfigError("'grid.grading' must be a strength or \"uniform\"");
        }
    }
}

void merge(json& base, const json& patch) {
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        if (it.value().is_object() && base.contains(it.key()) && base[it.key()].is_object())
            merge(base[it.key()], it.value());
        else
            base[it.key()] = it.value();
    }
}

json load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

OperatorSpec make_operator(const json& c) {
    const std::string kind = c["kind"];
    OperatorSpec o;
    if (kind == "laplacian") {
        o = OperatorSpec::laplacian();
    } else if (kind == "pucci_plus" || kind == "pucci_minus") {
        o = OperatorSpec::pucci(kind == "pucci_plus" ? PucciSign::plus : PucciSign::minus, c["lambda"], c["Lambda"]);
    } else {
        throw ConfigError("operator.kind must be laplacian, pucci_plus or pucci_minus");
    }
    o.Gamma = c["Gamma"];
    o.gamma = c["gamma"];
    const Eigen::Vector2d b(c["drift"].at(0).get<double>(), c["drift"].at(1).get<double>());
    if (b.norm() > 0.0) o.drift = [b](const Eigen::Vector2d&) { return b; };
    const double z = c["zeroth"];
    if (z != 0.0) o.zeroth = [z](const Eigen::Vector2d&) { return z; };
    try {
        o.validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("operator: ") + e.what());
    }
    return o;
}

GridPtr make_grid(const json& cfg) {
    const json& d = cfg["domain"];
    const std::string kind = d["kind"];
    Domain dom;
    if (kind == "interval")
        dom = Domain::interval(d["lo"], d["hi"]);
    else if (kind == "rectangle")
        dom = Domain::rectangle(d["lo"], d["hi"], d["y0"], d["y1"]);
    else if (kind == "disk")
        dom = Domain::disk(d["radius"]);
    else
        throw ConfigError("domain.kind must be interval, rectangle or disk");
    const json& g = cfg["grid"];
    const Grading gr = g["grading"].is_string() ? Grading::uniform() : Grading::boundary_graded(g["grading"]);
    try {
        return build_grid(dom, g["n"], gr, g["n_theta"]);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    } catch (const ResolutionError& e) {
        throw ConfigError(e.what());
    }
}

SolverOptions make_solver(const json& c) {
    SolverOptions s;
    s.tol = c["tol"];
    s.max_iter = c["max_iter"];
    s.eps0 = c["eps0"];
    s.eps_ratio = c["eps_ratio"];
    s.eps_min = c["eps_min"];
    return s;
}

WeightSpec make_weight(const json& w) {
    const std::string form = w["form"];
    if (form == "power") return WeightSpec::power(w["q"]);
    if (form == "power_log") return WeightSpec::power_log(w["q"], w["a"], w["A"]);
    if (form == "loglog_free") return WeightSpec::loglog_free(w["A"]);
    throw ConfigError("scalar.weight.form must be power, power_log or loglog_free");
}

ExponentQuad make_quad(const json& e) {
    ExponentQuad x{e["p"], e["q"], e["r"], e["s"]};
    try {
        x.validate();
    } catch (const Error& err) {
        throw ConfigError(std::string("exponents: ") + err.what());
    }
    return x;
}

std::string timestamp() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

class Output {
public:
    explicit Output(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }
    const fs::path& dir() const { return dir_; }
    void text(const std::string& name, const std::string& body) const {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
        out << body;
        if (!out) throw std::runtime_error("write failed for " + (dir_ / name).string());
    }
    void summary(const std::string& command, const json& cfg, json body) const {
        json j;
        j["tool"] = "sel";
        j["version"] = kVersion;
        j["command"] = command;
        j["generated_at"] = timestamp();
        j["config"] = cfg;
        j["result"] = std::move(body);
        text("summary.json", j.dump(2) + "\n");
    }

private:
    fs::path dir_;
};

json rate_json(const std::optional<RateSpec>& r) {
    if (!r) return nullptr;
    return json{{"model", to_string(r->model)}, {"power", r->power}, {"logpow", r->logpow}, {"scale_A", r->scale_A}};
}

template <class T>
json opt_json(const std::optional<T>& v) {
    return v ? json(to_string(*v)) : json(nullptr);
}

json report_json(const RegimeReport& r) {
    return json{
        {"quad", {{"p", r.quad.p}, {"q", r.quad.q}, {"r", r.quad.r}, {"s", r.quad.s}}},
        {"det", r.det},
        {"alpha", r.alpha},
        {"beta", r.beta},
        {"alpha_product", r.alpha_product},
        {"beta_product", r.beta_product},
        {"alpha_variant_disagrees", r.alpha_variant_disagrees},
        {"nonexistence", opt_json(r.nonexistence)},
        {"existence", opt_json(r.existence)},
        {"subcase", opt_json(r.subcase)},
        {"subcase_u", opt_json(r.subcase_u)},
        {"subcase_v", opt_json(r.subcase_v)},
        {"undetermined", r.undetermined()},
        {"u_c1", r.u_c1},
        {"v_c1", r.v_c1},
        {"both_c1", r.both_c1},
        {"unique", r.unique},
        {"rate_u", rate_json(r.rate_u)},
        {"rate_v", rate_json(r.rate_v)},
        {"notes", r.notes},
    };
}

// Refuses weights whose source is not integrable against delta: no positive
// solution vanishing on the boundary exists there.
void require_integrable(const WeightSpec& w) {
    const IntegralReport ir = integral_criterion(w);
    if (!ir.infinite) return;
    std::ostringstream os;
    os << "weight with q = " << w.effective_q() << ", a = " << w.effective_a()
       << " makes the integral of t k(t) diverge at the boundary; for p >= 0 no positive solution with zero "
          "boundary data exists (q > 2, or q = 2 with a <= 1)";
    throw RegimeError(os.str());
}

int cmd_classify(const json& cfg, const Output& out) {
    const RegimeReport r = classify(make_quad(cfg["exponents"]));
    const json j = report_json(r);
    std::cout << j.dump(2) << "\n";
    out.summary("classify", cfg, j);
    return ok;
}

std::vector<double> range_values(const json& a, const char* name) {
    if (a.size() != 3) throw ConfigError(std::string("sweep.") + name + " must be [lo, hi, step]");
    SweepRange r{a[0], a[1], a[2]};
    if (!(r.step > 0.0) || r.hi < r.lo) throw ConfigError(std::string("sweep.") + name + " needs step > 0 and hi >= lo");
    return r.values();
}

int cmd_sweep(const json& cfg, const Output& out, int jobs) {
    const json& s = cfg["sweep"];
    const auto ps = range_values(s["p"], "p");
    range_values(s["q"], "q");
    range_values(s["r"], "r");
    range_values(s["s"], "s");
    const SweepRange rq{s["q"][0], s["q"][1], s["q"][2]}, rr{s["r"][0], s["r"][1], s["r"][2]},
        rs{s["s"][0], s["s"][1], s["s"][2]};
    // one task per p value, reassembled in order so the CSV does not depend on jobs
    std::vector<std::vector<RegimeReport>> parts(ps.size());
    for (std::size_t i = 0; i < ps.size(); i += std::max(1, jobs)) {
        std::vector<std::future<std::vector<RegimeReport>>> fut;
        for (std::size_t k = i; k < std::min(ps.size(), i + std::max(1, jobs)); ++k)
            fut.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred,
                                     [&, k] { return sweep({ps[k], ps[k], 1.0}, rq, rr, rs); }));
        for (std::size_t k = 0; k < fut.size(); ++k) parts[i + k] = fut[k].get();
    }
    std::vector<RegimeReport> rows;
    for (auto& p : parts) rows.insert(rows.end(), p.begin(), p.end());
    std::ostringstream csv;
    write_sweep_csv(csv, rows);
    out.text("sweep.csv", csv.str());
    int nonexist = 0, exist = 0, undetermined = 0, overlap = 0;
    for (const auto& r : rows) {
        nonexist += r.nonexistence.has_value();
        exist += r.existence.has_value();
        undetermined += r.undetermined();
        overlap += r.nonexistence && r.existence;
    }
    const json j{{"rows", rows.size()},  {"nonexistence", nonexist}, {"existence", exist},
                 {"undetermined", undetermined}, {"overlapping_flags", overlap}};
    out.summary("sweep", cfg, j);
    std::cout << j.dump() << "\n";
    return ok;
}

int cmd_eigen(const json& cfg, const Output& out) {
    const GridPtr g = make_grid(cfg);
    const EigenPair e = principal_eigenpair(make_operator(cfg["operator"]), g);
    const EigenBounds b = verify_eigen_bounds(e);
    std::ostringstream csv;
    write_csv(csv, e.phi, "phi");
    out.text("eigen.csv", csv.str());
    const json j{{"mu", e.mu},         {"mu_lower", e.mu_lower}, {"iterations", e.iterations},
                 {"residual_norm", e.residual_norm}, {"C_low", b.C_low}, {"C_high", b.C_high}, {"hopf_c", b.hopf_c}};
    out.summary("eigen", cfg, j);
    std::cout << j.dump() << "\n";
    return ok;
}

int cmd_barrier(const json& cfg, const Output& out) {
    const json& c = cfg["barrier"];
    BarrierOptions o;
    const std::string route = c["route"];
    if (route == "backward")
        o.route = ShootingRoute::backward;
    else if (route != "forward")
        throw ConfigError("barrier.route must be forward or backward");
    const BarrierSolution s = solve_barrier_ode(c["alpha"], c["beta"], c["b"], c["samples"], o);
    std::ostringstream csv;
    write_barrier_csv(csv, s);
    out.text("barrier.csv", csv.str());
    const BarrierProps& p = s.props;
    json j{{"route", s.route},
           {"slope_b", s.slope_b},
           {"positive_ok", p.positive_ok},
           {"concave_ok", p.concave_ok},
           {"chord_ok", p.chord_ok},
           {"hp_bound_ok", p.hp_bound_ok},
           {"C1", p.C1}};
    if (p.linear_checked) {
        j["linear_bounds_ok"] = p.linear_bounds_ok;
        j["c1"] = p.c1;
        j["c2"] = p.c2;
    }
    if (p.log_rate_checked) {
        j["log_rate_ok"] = p.log_rate_ok;
        j["theta"] = p.theta;
        j["c3"] = p.c3;
    }
    out.summary("barrier", cfg, j);
    std::cout << j.dump() << "\n";
    return ok;
}

int cmd_solve_scalar(const json& cfg, const Output& out, bool with_rates) {
    const WeightSpec w = make_weight(cfg["scalar"]["weight"]);
    const double p = cfg["scalar"]["p"];
    require_integrable(w);
    std::optional<RateSpec> pred;
    if (with_rates) pred = predicted_rate(p, w.effective_q(), w.A, w.effective_a());
    const GridPtr g = make_grid(cfg);
    try {
        const SolveResult r = solve_scalar_singular(make_operator(cfg["operator"]), g, p, w, make_solver(cfg["solver"]));
        std::ostringstream csv;
        write_csv(csv, r.u, "u");
        out.text("solution.csv", csv.str());
        json j{{"converged", r.converged}, {"iterations", r.iterations}, {"final_residual", r.final_residual},
               {"tail_share", r.tail_share}, {"epsilon_path", r.epsilon_path}};
        if (pred) {
            FitOptions fo;
            fo.profile_A = pred->model != RateModel::linear && pred->model != RateModel::power;
            const RateFit f = fit_rate(r.u, *pred, fo);
            const RateComparison cmp = compare(f, *pred, 0.05, 0.05);
            const ProbeResult pr = normal_derivative_probe(r.u);
            j["predicted"] = rate_json(pred);
            j["fit"] = {{"model", to_string(f.model)}, {"power", f.fitted_power}, {"logpow", f.fitted_logpow},
                        {"r_squared", f.r_squared}, {"layer", {f.layer_lo, f.layer_hi}}, {"n_points", f.n_points},
                        {"scale_A", f.scale_A}};
            j["comparison"] = {{"pass", cmp.pass}, {"diagnostic", cmp.diagnostic}};
            j["probe"] = {{"finite", pr.finite}, {"magnitude", pr.magnitude}, {"ts", pr.ts}, {"quotients", pr.quotients}};
        }
        out.summary(with_rates ? "rates" : "solve-scalar", cfg, j);
        std::cout << j.dump() << "\n";
        return ok;
    } catch (const SolverError& e) {
        std::ostringstream csv;
        write_csv(csv, GridFunction(g, e.last_iterate), "u");
        out.text("solution.csv.partial", csv.str());
        throw;
    }
}

int cmd_solve_system(const json& cfg, const Output& out) {
    const ExponentQuad x = make_quad(cfg["exponents"]);
    const RegimeReport rep = classify(x);
    if (!rep.existence) {
        std::string why = rep.nonexistence ? "the exponents fall in non-existence case " + to_string(*rep.nonexistence)
                                           : "the exponents satisfy no existence condition (det > 0 with one of the "
                                             "three rate conditions), so no invariant cone is available";
        throw RegimeError(why);
    }
    const GridPtr g = make_grid(cfg);
    const OperatorSpec F = make_operator(cfg["operator"]);
    PicardOptions po;
    po.scalar = make_solver(cfg["solver"]);
    po.tol = cfg["solver"]["picard_tol"];
    po.max_iter = cfg["solver"]["picard_max_iter"];
    po.keep_history = true;
    const ConeSpec cone = build_cone(F, g, x, po.scalar);
    try {
        const SystemResult r = picard_iterate(F, g, x, cone, po);
        std::ostringstream csv;
        write_csv(csv, {{"u", &r.u}, {"v", &r.v}});
        out.text("solution.csv", csv.str());
        json j{{"classification", report_json(rep)},
               {"cone", {{"subcase", to_string(cone.shape.subcase)}, {"mirrored", cone.shape.mirrored},
                         {"c1", cone.c1}, {"c2", cone.c2}, {"m1", cone.k.m1}, {"M1", cone.k.M1},
                         {"m2", cone.k.m2}, {"M2", cone.k.M2}, {"margin", cone.k.margin}, {"notes", cone.notes}}},
               {"picard_iterations", r.picard_iterations},
               {"residual_u", r.residual_u},
               {"residual_v", r.residual_v},
               {"all_in_cone", r.all_in_cone()},
               {"changes", r.changes}};
        out.summary("solve-system", cfg, j);
        std::cout << json{{"picard_iterations", r.picard_iterations}, {"residual_u", r.residual_u},
                          {"residual_v", r.residual_v}, {"all_in_cone", r.all_in_cone()}}.dump()
                  << "\n";
        return ok;
    } catch (const SolverError& e) {
        // the failing component's last iterate, next to the other one's
        std::ostringstream csv;
        write_csv(csv, GridFunction(g, e.last_iterate), "last_iterate");
        out.text("solution.csv.partial", csv.str());
        throw;
    }
}

int cmd_acceptance(const json& cfg, const Output& out, int jobs) {
    const std::vector<int> ids = cfg["acceptance"]["only"].get<std::vector<int>>();
    const auto results = acceptance::run(ids, jobs);
    json rows = json::array();
    int pass = 0;
    for (const auto& o : results) {
        std::cout << acceptance::summary_line(o) << "\n";
        for (const auto& l : o.lines) std::cout << "      " << l << "\n";
        pass += o.pass;
        rows.push_back({{"id", o.id}, {"title", o.title}, {"pass", o.pass}, {"lines", o.lines}});
    }
    std::ostringstream csv;
    csv << "id,title,pass\n";
    for (const auto& o : results) csv << o.id << ",\"" << o.title << "\"," << (o.pass ? 1 : 0) << "\n";
    out.text("acceptance.csv", csv.str());
    out.summary("acceptance", cfg, json{{"passed", pass}, {"total", results.size()}, {"criteria", rows}});
    std::cout << pass << "/" << results.size() << " criteria pass\n";
    return pass == static_cast<int>(results.size()) ? ok : failed;
}

void error_json(const std::string& kind, const std::string& message, int code) {
    std::cerr << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical lab for singular fully nonlinear elliptic systems"};
    app.set_version_flag("--version", std::string("sel ") + kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir;
    int jobs = 1;
    app.add_option("-c,--config", config_path, "JSON config file");
    app.add_option("-o,--output", out_dir, "output directory (default: $SEL_OUTPUT_DIR, then .)");
    app.add_option("-j,--jobs", jobs, "concurrent instances for sweep and acceptance")->check(CLI::PositiveNumber);

    // Flag overrides, written into the config tree after the file is merged.
    std::vector<std::pair<std::string, std::function<void(json&)>>> overrides;
    auto num = [&](CLI::App* sub, const std::string& flag, std::vector<std::string> path, const std::string& help) {
        auto opt = sub->add_option_function<double>(flag, [&overrides, path, flag](double v) {
            overrides.emplace_back(flag, [path, v](json& c) {
                json* node = &c;
                for (const auto& k : path) node = &(*node)[k];
                *node = v;
            });
        }, help);
        return opt;
    };
    auto txt = [&](CLI::App* sub, const std::string& flag, std::vector<std::string> path, const std::string& help) {
        return sub->add_option_function<std::string>(flag, [&overrides, path, flag](const std::string& v) {
            overrides.emplace_back(flag, [path, v](json& c) {
                json* node = &c;
                for (const auto& k : path) node = &(*node)[k];
                *node = v;
            });
        }, help);
    };
    auto quad_flags = [&](CLI::App* s) {
        for (const char* k : {"p", "q", "r", "s"}) num(s, std::string("--") + k, {"exponents", k}, "exponent");
    };
    auto grid_flags = [&](CLI::App* s) {
        num(s, "--n", {"grid", "n"}, "nodes per axis");
        num(s, "--grading", {"grid", "grading"}, "boundary grading strength in [0,4]");
        txt(s, "--domain", {"domain", "kind"}, "interval | rectangle | disk");
        txt(s, "--operator", {"operator", "kind"}, "laplacian | pucci_plus | pucci_minus");
        num(s, "--lambda", {"operator", "lambda"}, "ellipticity lower bound");
        num(s, "--Lambda", {"operator", "Lambda"}, "ellipticity upper bound");
        num(s, "--tol", {"solver", "tol"}, "Newton tolerance");
        num(s, "--max-iter", {"solver", "max_iter"}, "Newton steps per stage");
    };
    auto weight_flags = [&](CLI::App* s) {
        num(s, "--p", {"scalar", "p"}, "power of u");
        txt(s, "--weight", {"scalar", "weight", "form"}, "power | power_log | loglog_free");
        num(s, "--wq", {"scalar", "weight", "q"}, "weight power q");
        num(s, "--wa", {"scalar", "weight", "a"}, "weight log power a");
        num(s, "--wA", {"scalar", "weight", "A"}, "weight log scale A");
    };

    auto* c_classify = app.add_subcommand("classify", "classify an exponent quadruple");
    quad_flags(c_classify);
    app.add_subcommand("sweep", "classify a grid of quadruples into sweep.csv");
    auto* c_eigen = app.add_subcommand("eigen", "principal eigenpair");
    grid_flags(c_eigen);
    auto* c_barrier = app.add_subcommand("barrier", "solve the barrier ODE");
    num(c_barrier, "--alpha", {"barrier", "alpha"}, "t exponent");
    num(c_barrier, "--beta", {"barrier", "beta"}, "H exponent");
    num(c_barrier, "--b", {"barrier", "b"}, "right end");
    num(c_barrier, "--samples", {"barrier", "samples"}, "sample count");
    txt(c_barrier, "--route", {"barrier", "route"}, "forward | backward");
    auto* c_scalar = app.add_subcommand("solve-scalar", "solve F(D^2u) = k u^-p");
    grid_flags(c_scalar);
    weight_flags(c_scalar);
    auto* c_system = app.add_subcommand("solve-system", "solve the coupled system by Picard iteration");
    grid_flags(c_system);
    quad_flags(c_system);
    auto* c_rates = app.add_subcommand("rates", "solve a scalar problem and fit its boundary rate");
    grid_flags(c_rates);
    weight_flags(c_rates);
    auto* c_accept = app.add_subcommand("acceptance", "run the acceptance suite");
    std::vector<int> only;
    c_accept->add_option("--only", only, "criterion ids");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        error_json("config_error", e.what(), config);
        return config;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    json cfg = defaults();
    fs::path dir;
    try {
        if (!config_path.empty()) {
            const json file = load_file(config_path);
            check_keys(file, defaults(), "");
            if (file.contains("command") && !file["command"].is_null() && file["command"] != command)
                throw ConfigError("config is for command '" + file["command"].get<std::string>() + "', not '" + command + "'");
            merge(cfg, file);
        }
        cfg["command"] = command;
        for (auto& [flag, apply] : overrides) apply(cfg);
        if (!only.empty()) cfg["acceptance"]["only"] = only;
        for (const char* k : {"n", "n_theta"})
            if (cfg["grid"][k].is_number()) cfg["grid"][k] = static_cast<int>(cfg["grid"][k].get<double>());
        for (const char* k : {"max_iter", "picard_max_iter"}) cfg["solver"][k] = static_cast<int>(cfg["solver"][k].get<double>());
        cfg["barrier"]["samples"] = static_cast<int>(cfg["barrier"]["samples"].get<double>());
        check_keys(cfg, defaults(), "");

        if (!out_dir.empty())
            dir = out_dir;
        else if (!cfg["output"]["dir"].is_null())
            dir = cfg["output"]["dir"].get<std::string>();
        else if (const char* env = std::getenv("SEL_OUTPUT_DIR"))
            dir = env;
        else
            dir = ".";
    } catch (const ConfigError& e) {
        error_json("config_error", e.what(), config);
        return config;
    } catch (const json::exception& e) {
        error_json("config_error", e.what(), config);
        return config;
    }

    try {
        const Output out(dir);
        if (command == "classify") return cmd_classify(cfg, out);
        if (command == "sweep") return cmd_sweep(cfg, out, jobs);
        if (command == "eigen") return cmd_eigen(cfg, out);
        if (command == "barrier") return cmd_barrier(cfg, out);
        if (command == "solve-scalar") return cmd_solve_scalar(cfg, out, false);
        if (command == "rates") return cmd_solve_scalar(cfg, out, true);
        if (command == "solve-system") return cmd_solve_system(cfg, out);
        if (command == "acceptance") return cmd_acceptance(cfg, out, jobs);
    } catch (const ConfigError& e) {
        error_json("config_error", e.what(), config);
        return config;
    } catch (const RegimeError& e) {
        error_json("unsupported_regime", e.what(), regime);
        return regime;
    } catch (const Infeasible& e) {
        error_json(e.kind(), e.what(), regime);
        return regime;
    } catch (const UnsupportedRegime& e) {
        error_json(e.kind(), e.what(), regime);
        return regime;
    } catch (const SolverError& e) {
        error_json(e.kind(), e.what(), solver);
        return solver;
    } catch (const PreconditionError& e) {
        error_json(e.kind(), e.what(), config);
        return config;
    } catch (const DomainError& e) {
        error_json(e.kind(), e.what(), config);
        return config;
    } catch (const ContractViolation& e) {
        error_json(e.kind(), e.what(), config);
        return config;
    } catch (const Error& e) {
        error_json(e.kind(), e.what(), solver);
        return solver;
    } catch (const std::exception& e) {
        // IO problems and anything unexpected, verbatim
        error_json("error", e.what(), failed);
        return failed;
    }
    return failed;
}
