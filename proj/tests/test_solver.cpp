#include <cmath>

#include "doctest.h"
#include "pkm/errors.hpp"
#include "pkm/irsbot2.hpp"

using namespace pkm;
using namespace pkm::irsbot2;

namespace {

const IrsbotParams P = experiment_params();

Pose target_at(const Vec3& offset) { return Pose{Mat3::Identity(), reference_platform_pose(P).r + offset}; }

LimbModel limb(ProximalMode mode = ProximalMode::Analytic, bool mirrored = false) {
    BuildOptions o;
    o.mode = mode;
    return build_limb(P, mirrored, o);
}

}  // namespace

TEST_CASE("loop solver: zero increment keeps an admissible state") {
    const LimbModel l = limb(ProximalMode::CutJoint);
    for (int ci = 0; ci < 2; ++ci) {
        const LoopSolveResult r = solve_loop_constraints(l, ci, VecX::Zero(9), VecX::Zero(l.cycles[ci].cycle.delta()), {});
        CHECK(r.corrections == 0);
        CHECK(r.th.norm() < 1e-15);
    }
}

TEST_CASE("loop solver: corrections converge quadratically") {
    const LimbModel l = limb();
    VecX dq(2);
    dq << 0.25, -0.2;
    IkSettings s;
    s.eps = 1e-13;
    const LoopSolveResult r = solve_loop_constraints(l, 1, VecX::Zero(9), dq, s);
    REQUIRE(r.residual_history.size() >= 3);
    CHECK(r.residual <= 1e-13);
    CHECK(r.th[7] == 0.25);
    CHECK(r.th[8] == -0.2);
    for (std::size_t k = 0; k + 2 < r.residual_history.size(); ++k) {
        const double e0 = r.residual_history[k], e1 = r.residual_history[k + 1];
        if (e1 > 1e-12) CHECK(e1 / (e0 * e0) < 50.0);
    }
}

TEST_CASE("loop solver: iteration cap") {
    const LimbModel l = limb();
    VecX dq(2);
    dq << 0.3, 0.3;
    IkSettings s;
    s.max_inner = 1;
    s.eps = 1e-14;
    CHECK_THROWS_AS(solve_loop_constraints(l, 1, VecX::Zero(9), dq, s), MaxIterationsExceeded);
}

TEST_CASE("limb IK: target equal to the current pose needs no iteration") {
    const LimbModel l = limb();
    const IkResult a = solve_limb_ik(l, VecX::Zero(9), reference_platform_pose(P), {});
    const IkResult b = solve_limb_ik_compound(l, VecX::Zero(9), reference_platform_pose(P), {});
    CHECK(a.outer_iterations == 0);
    CHECK(b.outer_iterations == 0);
}

TEST_CASE("limb IK: point-to-point move converges in six outer steps") {
    const LimbModel l = limb();
    IkSettings s;
    s.eps = 1e-11;
    const Pose tgt = target_at(Vec3(0.2, 0, 0.5));
    const IkResult r = solve_limb_ik(l, VecX::Zero(9), tgt, s);
    CHECK(r.outer_iterations == 6);
    for (std::size_t k = 1; k + 1 < r.err_x_history.size(); ++k) CHECK(r.err_x_history[k + 1] < r.err_x_history[k]);
    const Pose C = body_pose(l.tree, r.th, 6);
    CHECK((C.r - tgt.r).norm() <= 1e-11);
    CHECK((C.R - Mat3::Identity()).norm() < 1e-9);
    CHECK(std::abs(r.th[0] - r.th[2]) < 1e-10);
    CHECK(std::abs(r.th[0] + r.th[1]) < 1e-10);
    CHECK(max_residual(l, r.th) <= 1e-10);
}

TEST_CASE("limb IK: outer iteration cap") {
    const LimbModel l = limb();
    IkSettings s;
    s.max_outer = 2;
    CHECK_THROWS_AS(solve_limb_ik(l, VecX::Zero(9), target_at(Vec3(0.2, 0, 0.5)), s), MaxIterationsExceeded);
}

TEST_CASE("proximal loop: cut-joint mode reproduces the closed form") {
    const LimbModel a = limb(ProximalMode::Analytic), c = limb(ProximalMode::CutJoint);
    for (const Vec3& off : {Vec3(0.1, 0, 0.2), Vec3(-0.15, 0.05, -0.1), Vec3(0.05, -0.1, 0.4)}) {
        const IkResult ra = solve_limb_ik(a, VecX::Zero(9), target_at(off), {});
        IkSettings s;
        s.eps = 1e-12;
        const IkResult rc = solve_limb_ik(c, VecX::Zero(9), target_at(off), s);
        CHECK((ra.th - rc.th).norm() < 1e-10);
    }
}

TEST_CASE("compound solver agrees with the nested solver") {
    const LimbModel l = limb();
    VecX th = VecX::Zero(9), thc = VecX::Zero(9);
    const TrajectorySpec spec = nominal_spec(P, 1e-2);
    for (int k = 1; k < spec.num_samples(); ++k) {
        const TrajectorySample s = trajectory(spec, spec.time(k));
        const IkResult a = solve_limb_ik(l, th, s.C, {});
        const IkResult b = solve_limb_ik_compound(l, thc, s.C, {});
        th = a.th;
        thc = b.th;
        CHECK((a.th - b.th).lpNorm<Eigen::Infinity>() <= 1e-9);
        CHECK(b.err_g <= 1e-10);
    }
}

TEST_CASE("limb Jacobians") {
    const LimbModel l = limb();
    const VecX th = solve_limb_ik(l, VecX::Zero(9), target_at(Vec3(0.1, 0, 0.2)), {}).th;
    const LimbJacobians j = limb_jacobians(l, th, VecX::Zero(9));
    CHECK((j.Lt * j.F - l.Dt).norm() < 1e-12);
    Eigen::JacobiSVD<MatX> svd(j.Lp);
    CHECK(svd.rank() == 3);
    // L_t against differences of the platform position along q
    const double h = 1e-6;
    MatX fd(3, 3);
    for (int c = 0; c < 3; ++c) {
        const VecX d = j.H.col(c);
        fd.col(c) = (body_pose(l.tree, th + h * d, 6).r - body_pose(l.tree, th - h * d, 6).r) / (2 * h);
    }
    CHECK((j.Lt - fd).norm() < 1e-5);
}

TEST_CASE("a task selection the limb cannot realise is singular") {
    LimbModel l = limb();
    l.Pt = MatX::Zero(3, 6);
    l.Pt.leftCols(3) = Mat3::Identity();
    CHECK_THROWS_AS(limb_jacobians(l, VecX::Zero(9), VecX::Zero(9)), SingularTaskJacobian);
}

TEST_CASE("tree rates from task rates") {
    const LimbModel l = limb();
    VecX z = VecX::Zero(2);
    const TreeRates r0 = tree_rates_from_task(l, VecX::Zero(9), z, z);
    CHECK(r0.thd.norm() == 0.0);
    CHECK(r0.thdd.norm() == 0.0);
    VecX Vt(2), Vtd(2);
    Vt << 0.3, -0.8;
    Vtd << 2.0, 5.0;
    const TreeRates r = tree_rates_from_task(l, VecX::Zero(9), Vt, Vtd);
    const SystemJacobian sj = system_jacobian(l.tree, VecX::Zero(9));
    const Vec6 Vp = body_jacobian(l.tree, sj, 6) * r.thd;
    CHECK((Vp - (Vec6() << 0, 0, 0, 0.3, 0, -0.8).finished()).norm() < 1e-12);
}

TEST_CASE("trajectory IK is deterministic") {
    const PkmModel pkm = build_model(P);
    ExperimentSettings s;
    s.dynamics = false;
    TrajectorySpec spec = nominal_spec(P, 1e-2);
    const auto a = run_experiment(pkm, ExperimentKind::IkNested, spec, s);
    const auto b = run_experiment(pkm, ExperimentKind::IkNested, spec, s);
    for (std::size_t k = 0; k < a.steps.size(); ++k)
        for (int l = 0; l < 2; ++l) CHECK((a.steps[k].limbs[l].th.array() == b.steps[k].limbs[l].th.array()).all());
}
