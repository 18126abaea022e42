#pragma once

#include <vector>

#include "pkm/se3.hpp"
#include "pkm/topology.hpp"

namespace pkm {

/// Tree-topology limb. Every variable i moves one segment with reference pose
/// A[i]; a U-joint's first variable moves a massless cross segment. Y[i] is
/// the joint screw in the inertial frame at the zero reference.
struct TreeModel {
    LimbGraph graph;
    std::vector<Vec6> Y;
    std::vector<Pose> A;

    int n() const { return graph.num_vars(); }
    /// Body-fixed screw X_i = Ad_{A_i}^{-1} Y_i.
    Vec6 X(int i) const;
};

/// Segment poses C_i = exp(th Y)...exp(th_i Y_i) A_i along the tree.
std::vector<Pose> all_poses(const TreeModel& m, const VecX& th);
/// Pose of a body (or ground, identity, for body 0). Throws UnknownBody.
Pose body_pose(const TreeModel& m, const VecX& th, int body);

struct SystemJacobian {
    MatX J;  // 6n x n, body-fixed twists stacked per segment
    MatX A;  // 6n x 6n, block lower triangular
    MatX X;  // 6n x n, block diagonal
    std::vector<Pose> C;

    /// Rows of segment i (6 x n).
    Eigen::Block<const MatX> segment(int i) const { return J.block(6 * i, 0, 6, J.cols()); }
};

SystemJacobian system_jacobian(const TreeModel& m, const VecX& th);

/// Jdot = -A a(thd) J with a = diag(thd_i ad_{X_i}).
MatX jacobian_dot(const TreeModel& m, const SystemJacobian& sj, const VecX& thd);
MatX jacobian_dot(const TreeModel& m, const VecX& th, const VecX& thd);

/// Body Jacobian (6 x n) of one body; zero for ground.
MatX body_jacobian(const TreeModel& m, const SystemJacobian& sj, int body);
MatX body_jacobian_dot(const TreeModel& m, const MatX& Jdot, int body);

struct SystemMotion {
    VecX V;     // 6n
    VecX Vdot;  // 6n
};

SystemMotion system_motion(const TreeModel& m, const VecX& th, const VecX& thd, const VecX& thdd);

}  // namespace pkm
