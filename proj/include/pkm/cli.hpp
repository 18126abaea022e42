#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pkm/irsbot2.hpp"

namespace pkm::cli {

enum ExitCode { Ok = 0, ValidationFailed = 1, ConfigParse = 2, ModelBuild = 3, SolverFailure = 4 };

struct RunConfig {
    std::string model = "irsbot2";  // built-in name or path to a JSON model file
    std::string experiment = "ik_nested";
    double dt = 1e-3;
    double duration = 1.0;
    std::optional<double> dx, dz;  // default per experiment
    double nu = 3.0;
    double epsilon = 1e-10, epsilon1 = 1e-10, epsilon2 = 1e-10;
    int max_outer = 50, max_inner = 50;
    double alpha = 1.0, beta = 1.0;
    std::string mode = "analytic";  // proximal loop: analytic | cut_joint
    std::string solver = "nested";  // nested | compound
    std::string out = ".";
    std::vector<std::string> suites;  // validate only; empty = all
};

/// Reads a JSON config document (keys as in RunConfig). Throws ConfigError.
RunConfig load_config(const std::string& path);
void apply_json(RunConfig& c, const std::string& json_text);
void validate_config(const RunConfig& c);

struct ResolvedModel {
    irsbot2::IrsbotParams params;
    irsbot2::BuildOptions options;
    PkmModel pkm;
};

/// Builds the model named in the config. Throws ModelError / ConfigError.
ResolvedModel resolve_model(const RunConfig& c);

/// Writes the CSV files of one report into dir; returns the written paths.
std::vector<std::string> write_outputs(const irsbot2::ExperimentReport& rep, const std::string& dir);

int run(const RunConfig& c, std::ostream& out, std::ostream& err);
int validate(const RunConfig& c, std::ostream& out, std::ostream& err);

/// Entry point of the pkm-embed executable.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pkm::cli
