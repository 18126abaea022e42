#include <cmath>
#include <random>

#include "doctest.h"
#include "pkm/errors.hpp"
#include "pkm/kinematics.hpp"

using namespace pkm;

namespace {

// Planar two-link arm in the x-y plane, link lengths l1, l2, body frames at the link tips.
TreeModel two_link(double l1, double l2) {
    TreeModel m;
    m.graph = build_limb_graph(2, {{1, 0, 1, JointKind::Revolute}, {2, 1, 2, JointKind::Revolute}}, {}, 2);
    m.Y = {revolute_screw(Vec3::UnitZ(), Vec3::Zero()), revolute_screw(Vec3::UnitZ(), Vec3(l1, 0, 0))};
    m.A = {Pose{Mat3::Identity(), Vec3(l1, 0, 0)}, Pose{Mat3::Identity(), Vec3(l1 + l2, 0, 0)}};
    return m;
}

// Branched spatial chain with a U-joint and a prismatic joint.
TreeModel branched() {
    TreeModel m;
    m.graph = build_limb_graph(3,
                               {{1, 0, 1, JointKind::Universal}, {2, 1, 2, JointKind::Prismatic},
                                {3, 1, 3, JointKind::Revolute}},
                               {}, 2);
    m.Y = {revolute_screw(Vec3::UnitX(), Vec3(0, 0, 0.1)), revolute_screw(Vec3::UnitY(), Vec3(0, 0, 0.1)),
           prismatic_screw(Vec3(0.2, 0.1, 1).normalized()), revolute_screw(Vec3(0, 1, 1).normalized(), Vec3(0.3, 0, 0.5))};
    m.A = {Pose{rot_z(0.3), Vec3(0.05, 0, 0.1)}, Pose{rot_z(0.3), Vec3(0, 0, 0.3)}, Pose{rot_x(0.7), Vec3(0.1, 0.2, 0.6)},
           Pose{rot_y(-0.4), Vec3(0.4, 0.1, 0.5)}};
    return m;
}

VecX rnd(std::mt19937& g, int n, double s = 1.0) {
    std::uniform_real_distribution<double> u(-s, s);
    VecX v(n);
    for (int i = 0; i < n; ++i) v[i] = u(g);
    return v;
}

}  // namespace

TEST_CASE("forward kinematics of a planar two-link arm") {
    const double l1 = 0.7, l2 = 0.4;
    const TreeModel m = two_link(l1, l2);
    VecX th(2);
    th << 0.6, -1.1;
    const Pose C = body_pose(m, th, 2);
    const Vec3 tip(l1 * std::cos(0.6) + l2 * std::cos(-0.5), l1 * std::sin(0.6) + l2 * std::sin(-0.5), 0);
    CHECK((C.r - tip).norm() < 1e-14);
    CHECK((C.R - rot_z(-0.5)).norm() < 1e-14);
    CHECK((body_pose(m, th, 0).matrix() - Mat4::Identity()).norm() == 0.0);
    CHECK_THROWS_AS(body_pose(m, th, 5), UnknownBody);
}

TEST_CASE("two-link body Jacobian matches the textbook expression") {
    const double l1 = 0.7, l2 = 0.4;
    const TreeModel m = two_link(l1, l2);
    VecX th(2);
    th << 0.6, -1.1;
    const SystemJacobian sj = system_jacobian(m, th);
    const MatX J = body_jacobian(m, sj, 2);
    // tip velocity in the tip frame
    const Mat3 R = rot_z(-0.5);
    Eigen::Matrix<double, 3, 2> Jv;
    Jv << -l1 * std::sin(0.6) - l2 * std::sin(-0.5), -l2 * std::sin(-0.5), l1 * std::cos(0.6) + l2 * std::cos(-0.5),
        l2 * std::cos(-0.5), 0, 0;
    CHECK((J.bottomRows(3) - R.transpose() * Jv).norm() < 1e-14);
    CHECK((J.row(2) - Eigen::RowVector2d(1, 1)).norm() < 1e-15);
}

TEST_CASE("system Jacobian and its rate against central differences") {
    const TreeModel m = branched();
    std::mt19937 g(17);
    const double h = 1e-6;
    for (int k = 0; k < 10; ++k) {
        const VecX th = rnd(g, m.n()), thd = rnd(g, m.n(), 2.0);
        const SystemJacobian sj = system_jacobian(m, th);
        for (int j = 0; j < m.n(); ++j) {
            VecX tp = th, tm = th;
            tp[j] += h;
            tm[j] -= h;
            const auto Cp = all_poses(m, tp), Cm = all_poses(m, tm);
            for (int i = 0; i < m.n(); ++i) {
                const Mat4 B = sj.C[i].inverse().matrix() * (Cp[i].matrix() - Cm[i].matrix()) / (2 * h);
                Vec6 fd;
                fd << B(2, 1), B(0, 2), B(1, 0), B(0, 3), B(1, 3), B(2, 3);
                CHECK((sj.J.block<6, 1>(6 * i, j) - fd).norm() < 1e-8);
            }
        }
        const MatX Jd = jacobian_dot(m, th, thd);
        const MatX fd = (system_jacobian(m, th + h * thd).J - system_jacobian(m, th - h * thd).J) / (2 * h);
        CHECK((Jd - fd).norm() < 1e-7 * std::max(1.0, Jd.norm()));
    }
}

TEST_CASE("Jacobian block structure follows the tree") {
    const TreeModel m = branched();
    VecX th = VecX::Constant(m.n(), 0.3);
    const SystemJacobian sj = system_jacobian(m, th);
    // segment 3 (revolute on body 1) does not depend on the prismatic variable 2
    CHECK(sj.J.block<6, 1>(18, 2).norm() == 0.0);
    // diagonal blocks are the body-fixed screws
    for (int i = 0; i < m.n(); ++i) CHECK((sj.J.block<6, 1>(6 * i, i) - m.X(i)).norm() < 1e-15);
}

TEST_CASE("system motion of a spinning link") {
    const TreeModel m = two_link(1.0, 1.0);
    VecX th = VecX::Zero(2), thd(2), thdd = VecX::Zero(2);
    thd << 2.0, 0.0;
    const SystemMotion sm = system_motion(m, th, thd, thdd);
    // tip of link 2 at distance 2: centripetal acceleration 2 * 2^2 towards the axis
    const Vec6 Vd = sm.Vdot.segment<6>(6);
    const Vec6 V = sm.V.segment<6>(6);
    const Vec3 a_point = Vd.tail<3>() + V.head<3>().cross(V.tail<3>());
    CHECK((a_point - Vec3(-8.0, 0, 0)).norm() < 1e-12);
}
