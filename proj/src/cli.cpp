#include "pkm/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pkm/errors.hpp"
#include "pkm/validation.hpp"

namespace pkm::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace irsbot2;

namespace {

template <class T>
void get(const json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

Vec3 vec3(const json& j) {
    if (!j.is_array() || j.size() != 3) throw ConfigError("expected a 3-vector");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}


}  // namespace

void apply_json(RunConfig& c, const std::string& text) {
    try {
        const json j = json::parse(text);
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
        get(j, "model", c.model);
        get(j, "experiment", c.experiment);
        get(j, "dt", c.dt);
        get(j, "duration", c.duration);
        if (j.contains("dx")) c.dx = j["dx"].get<double>();
        if (j.contains("dz")) c.dz = j["dz"].get<double>();
        get(j, "nu", c.nu);
        get(j, "mode", c.mode);
        get(j, "out", c.out);
        get(j, "suites", c.suites);
        if (j.contains("solver")) {
            const json& s = j["solver"];
            if (s.is_string()) {
                c.solver = s.get<std::string>();
            } else {
                get(s, "kind", c.solver);
                get(s, "epsilon", c.epsilon);
                get(s, "epsilon1", c.epsilon1);
                get(s, "epsilon2", c.epsilon2);
                get(s, "max_outer", c.max_outer);
                get(s, "max_inner", c.max_inner);
                get(s, "alpha", c.alpha);
                get(s, "beta", c.beta);
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    RunConfig c;
    apply_json(c, ss.str());
    return c;
}

void validate_config(const RunConfig& c) {
    parse_experiment(c.experiment);
    if (!(c.dt > 0) || !(c.duration > 0) || !(c.nu > 0)) throw ConfigError("dt, duration and nu must be positive");
    if (!(c.epsilon > 0) || !(c.epsilon1 > 0) || !(c.epsilon2 > 0)) throw ConfigError("thresholds must be positive");
    if (c.max_outer < 1 || c.max_inner < 1) throw ConfigError("iteration caps must be at least 1");
    if (c.mode != "analytic" && c.mode != "cut_joint") throw ConfigError("mode must be analytic or cut_joint");
    if (c.solver != "nested" && c.solver != "compound") throw ConfigError("solver must be nested or compound");
    const auto names = validation::suite_names();
    for (const auto& s : c.suites)
        if (std::find(names.begin(), names.end(), s) == names.end()) throw ConfigError("unknown suite '" + s + "'");
}

ResolvedModel resolve_model(const RunConfig& c) {
    ResolvedModel m;
    m.params = experiment_params();
    m.options.mode = c.mode == "cut_joint" ? ProximalMode::CutJoint : ProximalMode::Analytic;
    if (c.model != "irsbot2") {
        std::ifstream in(c.model);
        if (!in) throw ConfigError("unknown model '" + c.model + "' (not built-in, no such file)");
        try {
            const json j = json::parse(in);
            if (j.value("type", std::string("irsbot2")) != "irsbot2") throw ModelError("unsupported model type");
            const std::string base = j.value("base", std::string("experiment"));
            if (base == "default") m.params = default_params();
            else if (base != "experiment") throw ModelError("unknown parameter base '" + base + "'");
            IrsbotParams& p = m.params;
            get(j, "a", p.a);
            get(j, "b", p.b);
            get(j, "c1", p.c1);
            get(j, "c3", p.c3);
            get(j, "d1", p.d1);
            get(j, "d2", p.d2);
            get(j, "d3", p.d3);
            get(j, "L1", p.L1);
            get(j, "L2", p.L2);
            get(j, "P1", p.P1);
            get(j, "P2", p.P2);
            get(j, "P3", p.P3);
            get(j, "alpha", p.alpha);
            get(j, "phi0", p.phi0);
            p.derive();
            get(j, "masses", m.options.masses);
            if (j.contains("gravity")) m.options.gravity = vec3(j["gravity"]);
            if (j.contains("distal_anchor_offset")) m.options.distal_anchor_offset = vec3(j["distal_anchor_offset"]);
        } catch (const json::exception& e) {
            throw ModelError(std::string("model file: ") + e.what());
        } catch (const ConfigError& e) {
            throw ModelError(std::string("model file: ") + e.what());
        }
    }
    m.pkm = build_model(m.params, m.options);
    return m;
}

namespace {

struct NonFinite : Error {
    using Error::Error;
};

std::string cell(double v) {
    if (!std::isfinite(v)) throw NonFinite("non-finite value in CSV output");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void ik_header(std::ostream& o, const ExperimentReport& rep, bool cond) {
    o << "t";
    for (std::size_t l = 1; l <= rep.steps.front().limbs.size(); ++l) {
        const std::size_t n = rep.steps.front().limbs[l - 1].th.size();
        for (const char* q : {"th", "thd", "thdd"})
            for (std::size_t i = 1; i <= n; ++i) o << ",l" << l << "_" << q << i;
        o << ",l" << l << "_outer_iters,l" << l << "_inner_iters_total,l" << l << "_err_x,l" << l << "_err_g";
        if (cond) o << ",l" << l << "_cond_sqrt_kappa";
    }
    o << "\n";
}

void ik_rows(std::ostream& o, const ExperimentReport& rep, bool cond) {
    for (const auto& s : rep.steps) {
        o << cell(s.t);
        for (const auto& l : s.limbs) {
            for (const VecX* v : {&l.th, &l.thd, &l.thdd})
                for (int i = 0; i < v->size(); ++i) o << "," << cell((*v)[i]);
            o << "," << l.outer << "," << l.inner_total << "," << cell(l.err_x) << "," << cell(l.err_g);
            if (cond) o << "," << cell(l.cond_sqrt_kappa);
        }
        o << "\n";
    }
}

}  // namespace

std::vector<std::string> write_outputs(const ExperimentReport& rep, const std::string& dir) {
    if (rep.steps.empty()) return {};
    // render everything first so that a failure leaves no partial file
    std::vector<std::pair<std::string, std::string>> files;
    {
        std::ostringstream o;
        ik_header(o, rep, false);
        ik_rows(o, rep, false);
        files.emplace_back("ik.csv", o.str());
    }
    if (rep.kind == ExperimentKind::Singularity) {
        std::ostringstream o;
        ik_header(o, rep, true);
        ik_rows(o, rep, true);
        files.emplace_back("singularity.csv", o.str());
    }
    if (rep.kind == ExperimentKind::InvDyn) {
        std::ostringstream o;
        o << "t,u1,u2,kinetic_energy,power_residual\n";
        for (const auto& s : rep.steps)
            o << cell(s.t) << "," << cell(s.u[0]) << "," << cell(s.u[1]) << "," << cell(s.kinetic_energy) << ","
              << cell(s.power_residual) << "\n";
        files.emplace_back("invdyn.csv", o.str());
    }
    fs::create_directories(dir);
    std::vector<std::string> paths;
    for (const auto& [name, text] : files) {
        const fs::path p = fs::path(dir) / name;
        std::ofstream f(p, std::ios::binary);
        f << text;
        if (!f) throw Error("cannot write " + p.string());
        paths.push_back(p.string());
    }
    return paths;
}

namespace {

void write_error_marker(const std::string& dir, const std::string& text) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::ofstream f(fs::path(dir) / "error.txt");
    f << text;
}

IkSettings ik_settings(const RunConfig& c) {
    IkSettings s;
    s.eps = c.epsilon;
    s.eps1 = c.epsilon1;
    s.eps2 = c.epsilon2;
    s.max_outer = c.max_outer;
    s.max_inner = c.max_inner;
    s.metric = {c.alpha, c.beta};
    return s;
}

}  // namespace

int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
    ExperimentKind kind;
    try {
        validate_config(c);
        kind = parse_experiment(c.experiment);
    } catch (const Error& e) {
        err << "config error: " << e.what() << "\n";
        return ConfigParse;
    }
    ResolvedModel m;
    try {
        m = resolve_model(c);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return ConfigParse;
    } catch (const Error& e) {
        err << "model error: " << e.what() << "\n";
        return ModelBuild;
    }
    TrajectorySpec spec = kind == ExperimentKind::Singularity ? singularity_spec(m.params, c.dt)
                                                              : nominal_spec(m.params, c.dt);
    spec.T = c.duration;
    spec.nu = c.nu;
    if (c.dx) spec.dx = *c.dx;
    if (c.dz) spec.dz = *c.dz;
    ExperimentSettings es;
    es.ik = ik_settings(c);
    es.compound = c.solver == "compound";
    es.dynamics = kind == ExperimentKind::InvDyn;
    StepFailure failure;
    try {
        const ExperimentReport rep = run_experiment(m.pkm, kind, spec, es, &failure);
        const auto paths = write_outputs(rep, c.out);
        out << to_string(kind) << ": " << rep.steps.size() << " samples in " << rep.runtime_s << " s\n";
        for (const auto& p : paths) out << "wrote " << p << "\n";
        return Ok;
    } catch (const Error& e) {
        std::ostringstream d;
        d << "experiment: " << to_string(kind) << "\n";
        if (failure.step >= 0) d << "step: " << failure.step << "\nt: " << failure.t << "\n";
        d << "error: " << e.what() << "\n";
        write_error_marker(c.out, d.str());
        err << "solver failure: " << d.str();
        return SolverFailure;
    }
}

int validate(const RunConfig& c, std::ostream& out, std::ostream& err) {
    try {
        validate_config(c);
    } catch (const Error& e) {
        err << "config error: " << e.what() << "\n";
        return ConfigParse;
    }
    validation::ValidationContext ctx;
    try {
        const ResolvedModel m = resolve_model(c);
        ctx.params = m.params;
        ctx.options = m.options;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return ConfigParse;
    } catch (const Error& e) {
        err << "model error: " << e.what() << "\n";
        return ModelBuild;
    }
    const auto names = c.suites.empty() ? validation::suite_names() : c.suites;
    bool ok = true;
    for (const auto& n : names) {
        validation::SuiteResult r;
        try {
            r = validation::run_suite(n, ctx);
        } catch (const Error& e) {
            r.name = n;
            r.pass = false;
            r.measured = NAN;
            r.detail = std::string("error: ") + e.what();
        }
        ok = ok && r.pass;
        char line[256];
        std::snprintf(line, sizeof line, "%s %-20s measured=%.3e tol=%.1e", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                      r.measured, r.tolerance);
        out << line;
        if (!r.detail.empty()) out << "  " << r.detail;
        out << "\n";
    }
    return ok ? Ok : ValidationFailed;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"pkm-embed: local constraint embedding for PKM kinematics and inverse dynamics"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::string config_path;
    std::optional<double> dt, duration, eps, eps1, eps2, dx, dz;
    std::optional<std::string> model, experiment, outdir, mode, solver;
    std::vector<std::string> suites;

    auto common = [&](CLI::App* s) {
        s->add_option("--config", config_path, "JSON config file");
        s->add_option("--model", model, "irsbot2 or a JSON model file");
        s->add_option("--mode", mode, "proximal loop: analytic | cut_joint");
    };
    CLI::App* run_cmd = app.add_subcommand("run", "run an experiment and write CSV files");
    common(run_cmd);
    run_cmd->add_option("--experiment", experiment, "ik_nested | ik_compound | invdyn | singularity");
    run_cmd->add_option("--dt", dt, "sample interval [s]");
    run_cmd->add_option("--duration", duration, "trajectory duration T [s]");
    run_cmd->add_option("--dx", dx, "trajectory x amplitude [m]");
    run_cmd->add_option("--dz", dz, "trajectory z amplitude [m]");
    run_cmd->add_option("--epsilon", eps, "outer/inner threshold");
    run_cmd->add_option("--epsilon1", eps1, "compound task threshold");
    run_cmd->add_option("--epsilon2", eps2, "compound constraint threshold");
    run_cmd->add_option("--solver", solver, "nested | compound");
    run_cmd->add_option("--out", outdir, "output directory");
    CLI::App* val_cmd = app.add_subcommand("validate", "run the validation suites");
    common(val_cmd);
    val_cmd->add_option("--suite", suites, "suite name (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return Ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return Ok;
    } catch (const CLI::ParseError& e) {
        err << "config error: " << e.what() << "\n";
        return ConfigParse;
    }

    try {
        if (!config_path.empty()) cfg = load_config(config_path);
    } catch (const Error& e) {
        err << "config error: " << e.what() << "\n";
        return ConfigParse;
    }
    if (model) cfg.model = *model;
    if (mode) cfg.mode = *mode;
    if (experiment) cfg.experiment = *experiment;
    if (dt) cfg.dt = *dt;
    if (duration) cfg.duration = *duration;
    if (dx) cfg.dx = *dx;
    if (dz) cfg.dz = *dz;
    if (eps) cfg.epsilon = *eps;
    if (eps1) cfg.epsilon1 = *eps1;
    if (eps2) cfg.epsilon2 = *eps2;
    if (solver) cfg.solver = *solver;
    if (outdir) cfg.out = *outdir;
    if (!suites.empty()) cfg.suites = suites;

    if (run_cmd->parsed()) return run(cfg, out, err);
    return validate(cfg, out, err);
}

}  // namespace pkm::cli
