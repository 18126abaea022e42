#pragma once

#include <string>
#include <vector>

#include "pkm/dynamics.hpp"
#include "pkm/solver.hpp"

namespace pkm::irsbot2 {

struct IrsbotParams {
    double a = 0, b = 0, c1 = 0, c3 = 0, d1 = 0, d2 = 0, d3 = 0;
    double L1 = 0, L2 = 0, P1 = 0, P2 = 0, P3 = 0;
    double alpha = 0, phi0 = 0;
    // derived
    double b1 = 0, b3 = 0, e1 = 0, e3 = 0, u = 0, beta = 0, psi0 = 0, h0 = 0;

    /// Recompute the derived quantities. Throws ModelError when the rods cannot reach.
    void derive();
};

/// Parameter values as listed for the IRSBot-2 resemblance (a = 1/8 m ...).
IrsbotParams default_params();
/// Twice-scaled set (a = 1/4, b = 1/6, L1 = 1/2, L2 = 3/4 m) whose reference
/// platform position matches the closed-form r6,0. Drives the experiments.
IrsbotParams experiment_params();
/// Base values a, b, L1, L2 with the default ratios for everything else.
IrsbotParams make_params(double a, double b, double L1, double L2, double alpha, double phi0);

/// Closed-form reference platform height (full-scale set).
double closed_form_r60_z();

enum class ProximalMode { Analytic, CutJoint };

enum class Shape { BeamSquare, BeamCircular, Plate };

struct BodyPrimitive {
    int body = 0;
    Shape shape = Shape::Plate;
    Vec3 dims = Vec3::Zero();  // beam: (length, side or radius, 0); plate: (x, y, z) extents
    double density = 2700.0;
    double primitive_mass = 0.0;  // volume * density
    double mass = 0.0;            // assigned mass
    Vec3 com = Vec3::Zero();      // in the body frame
    Mat3 Ic = Mat3::Zero();       // about the com, body axes, scaled to `mass`
    Mat6 M = Mat6::Zero();
};

struct MassModel {
    std::vector<BodyPrimitive> bodies;  // bodies 1..6 (6 = platform), index = body - 1
    double total_moving_mass() const;
};

/// Nominal masses m1..m6 (kg).
std::vector<double> nominal_masses();
double primitive_volume(Shape s, const Vec3& dims);
/// Mass model of limb 1 for the given geometry (masses overridden to nominal_masses()).
MassModel default_mass_model(const IrsbotParams& p);

struct BuildOptions {
    ProximalMode mode = ProximalMode::Analytic;
    /// Added to the body-6 anchor of the distal cut joint (negative controls).
    Vec3 distal_anchor_offset = Vec3::Zero();
    Vec3 gravity = Vec3(0.0, 0.0, -9.81);
    /// Empty = nominal_masses().
    std::vector<double> masses;
};

/// Limb 1 (right) or limb 2 (mirrored through the 2-3 plane).
LimbModel build_limb(const IrsbotParams& p, bool mirrored, const BuildOptions& o = {});
PkmModel build_model(const IrsbotParams& p, const BuildOptions& o = {});

/// Reference platform pose at th = 0.
Pose reference_platform_pose(const IrsbotParams& p);

struct TrajectorySpec {
    Vec3 r0 = Vec3::Zero();
    double dx = 0.25, dz = 0.45, nu = 3.0, T = 1.0, dt = 1e-3;

    int num_samples() const;  // including t = 0 and t = T
    double time(int k) const;
};

struct TrajectorySample {
    Pose C;
    Vec3 r, rd, rdd;
    VecX Vt, Vt_dot;  // (v1, v3) and its rate, platform frame (= inertial, R = I)
};

TrajectorySample trajectory(const TrajectorySpec& spec, double t);

TrajectorySpec nominal_spec(const IrsbotParams& p, double dt = 1e-3);
TrajectorySpec singularity_spec(const IrsbotParams& p, double dt = 1e-3);

enum class ExperimentKind { IkNested, IkCompound, InvDyn, Singularity };

ExperimentKind parse_experiment(const std::string& s);
std::string to_string(ExperimentKind k);

struct LimbStep {
    VecX th, thd, thdd;
    int outer = 0;
    int inner_max = 0;    // max inner iterations over outer steps
    int inner_total = 0;
    double err_x = 0.0, err_g = 0.0;
    double cond_sqrt_kappa = 0.0;  // sqrt(kappa(F^T F))
    double vel_residual = 0.0;     // max over cycles of ||G thd||
    double acc_residual = 0.0;     // max over cycles of ||G thdd + Gdot thd||
    double pos_residual = 0.0;     // max over cycles of ||g||
};

struct StepRecord {
    double t = 0.0;
    std::vector<LimbStep> limbs;
    bool has_dynamics = false;
    VecX u;
    double kinetic_energy = 0.0;
    double potential_energy = 0.0;
    double actuator_power = 0.0;
    double energy_rate = 0.0;       // d/dt (T + V) from body motion
    double power_residual = 0.0;    // actuator_power - energy_rate
};

struct ExperimentSettings {
    IkSettings ik;
    bool compound = false;
    bool dynamics = true;
};

struct ExperimentReport {
    ExperimentKind kind = ExperimentKind::IkNested;
    TrajectorySpec spec;
    std::vector<StepRecord> steps;
    double runtime_s = 0.0;
};

/// Step-annotated solver failure.
struct StepFailure {
    int step = -1;
    double t = 0.0;
    std::string what;
};

/// Runs IK (and optionally inverse dynamics) along the trajectory. Solver errors are
/// rethrown as the original type with the failing step stored in `failure` when given.
ExperimentReport run_experiment(const PkmModel& pkm, ExperimentKind kind, const TrajectorySpec& spec,
                                const ExperimentSettings& s, StepFailure* failure = nullptr);

/// Kinematic and dynamic state of the whole machine at one trajectory instant.
struct MachineState {
    std::vector<VecX> th, thd, thdd;
    std::vector<LimbJacobians> jac;
    std::vector<IkResult> ik;
    TrajectorySample sample;
};

/// Solve IK for all limbs from the given start and evaluate rates.
MachineState solve_state(const PkmModel& pkm, const std::vector<VecX>& th0, const TrajectorySample& sample,
                         const IkSettings& s, bool compound = false);

/// u at a solved state.
VecX actuator_torques(const PkmModel& pkm, const MachineState& st);

}  // namespace pkm::irsbot2
