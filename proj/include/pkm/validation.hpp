#pragma once

#include <string>
#include <vector>

#include "pkm/irsbot2.hpp"

namespace pkm::validation {

struct SuiteResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct ValidationContext {
    irsbot2::IrsbotParams params = irsbot2::experiment_params();
    irsbot2::BuildOptions options;
    int random_states = 100;
    int oracle_states = 20;
    unsigned seed = 20240521u;
};

std::vector<std::string> suite_names();
/// Throws ConfigError for unknown names.
SuiteResult run_suite(const std::string& name, const ValidationContext& ctx);

/// Recursive Newton-Euler inverse dynamics of a tree (body-fixed twists),
/// gravity entering as a base acceleration. Independent of the system Jacobian.
VecX rnea(const TreeModel& m, const std::vector<Mat6>& inertia, const VecX& th, const VecX& thd, const VecX& thdd,
          const Vec3& gravity);

struct MultiplierSolution {
    VecX u;
    VecX lambda;
    double residual = 0.0;  // relative residual of the least-squares system
};

/// Actuator torques from the full tree EOM of all limbs with every loop and
/// platform-attachment constraint, multipliers eliminated by least squares.
MultiplierSolution multiplier_oracle(const PkmModel& pkm, const irsbot2::MachineState& st);

/// Random admissible IRSBot states (both limbs solved to a common platform pose).
std::vector<irsbot2::MachineState> random_states(const PkmModel& pkm, const Pose& reference, int count,
                                                 unsigned seed);

/// Central-difference relative errors (max over states).
double fd_body_jacobian_error(const LimbModel& limb, const VecX& th, double h = 1e-6);
double fd_jacobian_dot_error(const LimbModel& limb, const VecX& th, const VecX& thd, double h = 1e-6);
double fd_H_dot_error(const LimbModel& limb, const VecX& th, const VecX& thd, double h = 1e-6);
double fd_Lt_dot_error(const LimbModel& limb, const VecX& th, const VecX& thd, double h = 1e-6);

/// Relative error between A and B (Frobenius, scaled by max(|A|, floor)).
double rel_error(const MatX& A, const MatX& B, double floor = 1e-8);

}  // namespace pkm::validation
