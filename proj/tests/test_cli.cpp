#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "pkm/cli.hpp"

namespace fs = std::filesystem;
using namespace pkm::cli;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run call(std::vector<std::string> args) {
    args.insert(args.begin(), "pkm-embed");
    std::vector<const char*> argv;
    for (auto& a : args) argv.push_back(a.c_str());
    std::ostringstream o, e;
    const int c = main_entry(static_cast<int>(argv.size()), argv.data(), o, e);
    return {c, o.str(), e.str()};
}

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("pkm_embed_test_" + name);
    fs::remove_all(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int count_lines(const fs::path& p) {
    std::ifstream f(p);
    std::string line;
    int n = 0;
    while (std::getline(f, line)) ++n;
    return n;
}

}  // namespace

TEST_CASE("cli: nested IK run writes one row per sample") {
    const fs::path d = fresh_dir("ik");
    const Run r = call({"run", "--model", "irsbot2", "--experiment", "ik_nested", "--dt", "1e-3", "--out", d.string()});
    CHECK(r.code == Ok);
    CHECK(count_lines(d / "ik.csv") == 1002);
    const std::string text = slurp(d / "ik.csv");
    CHECK(text.rfind("t,l1_th1,", 0) == 0);
    CHECK(text.find("l2_err_g") != std::string::npos);
    CHECK(text.find("nan") == std::string::npos);
    CHECK(text.find("inf") == std::string::npos);
    CHECK_FALSE(fs::exists(d / "error.txt"));
}

TEST_CASE("cli: identical configuration gives identical output") {
    const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
    CHECK(call({"run", "--experiment", "invdyn", "--dt", "1e-2", "--out", a.string()}).code == Ok);
    CHECK(call({"run", "--experiment", "invdyn", "--dt", "1e-2", "--out", b.string()}).code == Ok);
    CHECK(slurp(a / "invdyn.csv") == slurp(b / "invdyn.csv"));
    CHECK(slurp(a / "ik.csv") == slurp(b / "ik.csv"));
    CHECK(slurp(a / "invdyn.csv").rfind("t,u1,u2,kinetic_energy,power_residual\n", 0) == 0);
    CHECK(count_lines(a / "invdyn.csv") == 102);
}

TEST_CASE("cli: config errors") {
    CHECK(call({"run", "--experiment", "bogus"}).code == ConfigParse);
    CHECK(call({"run", "--dt", "-1"}).code == ConfigParse);
    CHECK(call({"run", "--solver", "magic"}).code == ConfigParse);
    CHECK(call({"run", "--unknown-flag"}).code == ConfigParse);
    CHECK(call({"validate", "--suite", "nope"}).code == ConfigParse);
    const fs::path d = fresh_dir("cfg");
    fs::create_directories(d);
    std::ofstream(d / "bad.json") << "{ not json";
    CHECK(call({"run", "--config", (d / "bad.json").string()}).code == ConfigParse);
    CHECK(call({"run", "--model", (d / "missing.json").string()}).code == ConfigParse);
    CHECK(call({"--help"}).code == Ok);
}

TEST_CASE("cli: config file and flag precedence") {
    const fs::path d = fresh_dir("cfgfile");
    fs::create_directories(d);
    std::ofstream(d / "c.json") << R"({"experiment": "ik_compound", "dt": 0.01, "solver": {"epsilon1": 1e-10},
                                      "out": ")" << (d / "out").string() << R"("})";
    const Run r = call({"run", "--config", (d / "c.json").string(), "--dt", "0.02"});
    CHECK(r.code == Ok);
    CHECK(count_lines(d / "out" / "ik.csv") == 52);
}

TEST_CASE("cli: model errors") {
    const fs::path d = fresh_dir("model");
    fs::create_directories(d);
    std::ofstream(d / "short.json") << R"({"L2": 0.2})";
    CHECK(call({"run", "--model", (d / "short.json").string(), "--out", d.string()}).code == ModelBuild);
    std::ofstream(d / "masses.json") << R"({"masses": [1, 2]})";
    CHECK(call({"run", "--model", (d / "masses.json").string(), "--out", d.string()}).code == ModelBuild);
}

TEST_CASE("cli: solver failure leaves a marker and no data") {
    const fs::path d = fresh_dir("fail");
    const Run r = call({"run", "--experiment", "ik_nested", "--dz", "-2.0", "--dt", "1e-2", "--out", d.string()});
    CHECK(r.code == SolverFailure);
    CHECK(fs::exists(d / "error.txt"));
    CHECK(slurp(d / "error.txt").find("step:") != std::string::npos);
    CHECK_FALSE(fs::exists(d / "ik.csv"));
}

TEST_CASE("cli: singularity output carries the condition column") {
    const fs::path d = fresh_dir("sing");
    const Run r = call({"run", "--experiment", "singularity", "--dz", "-0.3", "--dt", "1e-2", "--out", d.string()});
    CHECK(r.code == Ok);
    const std::string text = slurp(d / "singularity.csv");
    CHECK(text.find("l1_cond_sqrt_kappa") != std::string::npos);
    CHECK(text.find("l2_cond_sqrt_kappa") != std::string::npos);
}

TEST_CASE("cli: validate") {
    const Run ok = call({"validate", "--suite", "pendulum", "--suite", "constraint-residual"});
    CHECK(ok.code == Ok);
    CHECK(ok.out.find("PASS pendulum") != std::string::npos);
    const fs::path d = fresh_dir("val");
    fs::create_directories(d);
    std::ofstream(d / "perturbed.json") << R"({"distal_anchor_offset": [0.001, 0, 0]})";
    const Run bad = call({"validate", "--model", (d / "perturbed.json").string(), "--suite", "constraint-residual"});
    CHECK(bad.code == ValidationFailed);
    CHECK(bad.out.find("FAIL constraint-residual") != std::string::npos);
    CHECK(call({"validate", "--mode", "cut_joint", "--suite", "constraint-residual"}).code == Ok);
}
