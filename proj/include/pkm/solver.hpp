#pragma once

#include <vector>

#include "pkm/constraints.hpp"
#include "pkm/kinematics.hpp"

namespace pkm {

/// A fundamental cycle together with how its closure is solved.
struct CycleModel {
    FundamentalCycle cycle;
    CutJointSpec cut;
    bool overconstrained = false;
    /// Linear closed-form closure theta_c = H_const * q_c (cut spec kept for diagnostics).
    bool analytic = false;
    MatX H_const;
};

struct LimbModel {
    TreeModel tree;
    std::vector<CycleModel> cycles;
    std::vector<int> free_vars;  // variables outside every cycle
    int platform = 0;            // platform body id
    MatX Pt;                     // delta_p(l) x 6
    MatX Dt;                     // delta_p(l) x delta_p
    // dynamics data
    std::vector<Mat6> inertia;   // per segment, body frame; zero for massless segments
    std::vector<int> dyn_vars;   // variables kept in the tree EOM (platform joint excluded)

    int n() const { return tree.n(); }
    /// Independent coordinates: free variables first, then cycles by lambda.
    std::vector<int> q_vars() const;
    int delta() const { return static_cast<int>(q_vars().size()); }
    int m() const;
};

struct PkmModel {
    std::vector<LimbModel> limbs;
    std::vector<int> actuated_q;  // per limb: index into q_vars() of the actuated coordinate
    MatX Pp;                      // 6 x delta_p
    Mat6 platform_inertia = Mat6::Zero();
    Vec3 gravity = Vec3(0.0, 0.0, -9.81);

    int delta_p() const { return static_cast<int>(Pp.cols()); }
};

struct IkSettings {
    double eps = 1e-10;
    double eps1 = 1e-10;
    double eps2 = 1e-10;
    int max_outer = 50;
    int max_inner = 50;
    MetricWeights metric;
};

struct LoopSolveResult {
    VecX th;
    int iterations = 0;   // initial step + corrections
    int corrections = 0;  // WHILE-body executions
    double residual = 0.0;
    std::vector<double> residual_history;  // ||g|| after the initial step and each correction
};

struct IkResult {
    VecX th;
    int outer_iterations = 0;
    std::vector<int> inner_iterations_per_outer;  // max over cycles, per outer step
    int inner_iterations_total = 0;
    double err_x = 0.0;
    double err_g = 0.0;
    std::vector<double> err_x_history;  // entry 0 is the initial error
    std::vector<std::vector<double>> g_history;  // per outer step, residuals of the iterated cycles
};

/// Per-cycle constraint evaluation and limb-level orthogonal complement.
struct LimbConstraintState {
    std::vector<ConstraintEval> evals;
    MatX H;
    MatX Hdot;
};

LimbConstraintState limb_constraints(const LimbModel& limb, const KinematicState& ks);
/// Euclidean norms of the cycle residuals (geometric cut constraints, also for analytic cycles).
std::vector<double> cycle_residual_norms(const LimbModel& limb, const VecX& th);
double max_residual(const LimbModel& limb, const VecX& th);

/// Algorithm 2 for cycle index ci.
LoopSolveResult solve_loop_constraints(const LimbModel& limb, int ci, const VecX& th0, const VecX& dq,
                                       const IkSettings& s);

/// Task increment P_t (dC - I)^vee, dC = Cbar^-1 C_target (expressed in the current platform frame).
VecX task_increment(const LimbModel& limb, const Pose& current, const Pose& target);

/// Algorithm 1 (nested).
IkResult solve_limb_ik(const LimbModel& limb, const VecX& th0, const Pose& target, const IkSettings& s);
/// Algorithm 3 (compound).
IkResult solve_limb_ik_compound(const LimbModel& limb, const VecX& th0, const Pose& target, const IkSettings& s);

struct LimbJacobians {
    MatX H, Hdot;
    MatX Jp, Jp_dot;  // platform body Jacobian and its rate (6 x n)
    MatX Lp, Lp_dot;  // 6 x delta_l
    MatX Lt, Lt_dot;  // delta_p(l) x delta_l
    MatX Lt_inv;      // delta_l x delta_p(l)
    MatX F;           // Lt^-1 Dt, delta_l x delta_p
};

/// Throws SingularTaskJacobian when rcond(L_t) < 1e-12.
LimbJacobians limb_jacobians(const LimbModel& limb, const VecX& th, const VecX& thd);

struct TreeRates {
    VecX thd, thdd, qd, qdd;
    LimbJacobians jac;  // evaluated with thd
};

TreeRates tree_rates_from_task(const LimbModel& limb, const VecX& th, const VecX& Vt, const VecX& Vt_dot);

/// Actuator rows of F stacked over limbs (n_act x delta_p).
MatX ik_jacobian(const PkmModel& pkm, const std::vector<LimbJacobians>& jac);

}  // namespace pkm
