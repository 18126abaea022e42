#pragma once

#include <vector>

#include "pkm/kinematics.hpp"
#include "pkm/topology.hpp"

namespace pkm {

/// One perpendicularity lock: g = uk^T R_{k,r} ur (uk in frame k, ur in frame r).
struct OrientationPair {
    Vec3 uk = Vec3::UnitX();
    Vec3 ur = Vec3::UnitY();
};

/// Cut-joint geometry of one fundamental cycle.
struct CutJointSpec {
    int cycle = 0;
    int k = 0;  // body whose frame expresses the displacement
    int r = 0;
    Vec3 dk = Vec3::Zero();  // anchor in frame k
    Vec3 dr = Vec3::Zero();  // anchor in frame r
    std::vector<Vec3> locks;  // translation-lock directions in frame k
    std::vector<OrientationPair> orient;

    int m() const { return static_cast<int>(locks.size() + orient.size()); }
};

/// Revolute cut joint with axis e (frame k, and er in frame r): 3 position + 2 orientation rows.
CutJointSpec revolute_cut(int cycle, int k, int r, const Vec3& dk, const Vec3& dr, const Vec3& ek, const Vec3& er);
/// Universal cut joint, first axis on r (ur), second on k (uk): 3 position + 1 orientation rows.
CutJointSpec universal_cut(int cycle, int k, int r, const Vec3& dk, const Vec3& dr, const Vec3& ur, const Vec3& uk);

/// Relative displacement of the anchor points and the operator matrices
/// acting on the stacked body twists (V_k; V_r).
struct Displacement {
    Vec3 d = Vec3::Zero();     // in frame k
    Vec3 ddot = Vec3::Zero();
    Eigen::Matrix<double, 3, 12> B;
    Eigen::Matrix<double, 3, 12> Bdot;
    MatX A;     // 3 x n, B J_lambda
    MatX Adot;  // 3 x n, Bdot J_lambda + B Jdot_lambda
};

/// Rows of one constraint row block: residuals, B-rows, Bdot-rows.
struct ConstraintRows {
    VecX g;
    MatX B;     // m x 12
    MatX Bdot;  // m x 12
};

struct ConstraintEval {
    VecX g;     // m
    MatX G;     // m x n_lambda (cycle columns)
    MatX Gdot;  // m x n_lambda
    VecX bias;  // Gdot * thd restricted, m
};

/// Kinematic data needed by all constraint evaluations at one state.
struct KinematicState {
    VecX th, thd;
    SystemJacobian sj;
    MatX Jdot;
};

KinematicState kinematic_state(const TreeModel& m, const VecX& th, const VecX& thd);

Displacement relative_displacement(const TreeModel& m, const KinematicState& ks, const CutJointSpec& spec);
ConstraintRows position_constraint_rows(const CutJointSpec& spec, const Displacement& disp);
ConstraintRows orientation_constraint_rows(const TreeModel& m, const KinematicState& ks, const CutJointSpec& spec);

/// Position rows first, then orientation rows; columns are the cycle variables.
ConstraintEval assemble_cycle_constraints(const TreeModel& m, const FundamentalCycle& c, const CutJointSpec& spec,
                                          const KinematicState& ks);

/// Residual only (cheap path for the inner loop).
VecX cycle_residual(const TreeModel& m, const CutJointSpec& spec, const std::vector<Pose>& C);

/// Orthogonal complement H (n_lambda x delta_lambda) in cycle-variable order.
/// Throws SingularGy when rcond(G_y) < 1e-12. With overconstrained = true,
/// H spans the SVD null space of G (rank tol 1e-9 sigma_max).
MatX solve_H(const ConstraintEval& e, const FundamentalCycle& c, bool overconstrained = false);
MatX solve_H_dot(const ConstraintEval& e, const FundamentalCycle& c, bool overconstrained = false);

/// Reciprocal condition number of G_y (1-norm estimate via LU).
double rcond_Gy(const ConstraintEval& e, const FundamentalCycle& c);

/// Local column positions of variables within the cycle.
std::vector<int> local_index(const FundamentalCycle& c, const std::vector<int>& vars);

struct CycleBlock {
    const FundamentalCycle* cycle = nullptr;
    MatX H;
    MatX Hdot;
};

/// Limb-level H and Hdot. q ordering: free variables first, then cycles by lambda.
void assemble_limb_H(int n_vars, const std::vector<int>& free_vars, const std::vector<CycleBlock>& blocks,
                     MatX& H, MatX& Hdot);

}  // namespace pkm
