#include <cmath>
#include <numbers>

#include "doctest.h"
#include "pkm/errors.hpp"
#include "pkm/irsbot2.hpp"

using namespace pkm;
using namespace pkm::irsbot2;

TEST_CASE("parameter relations") {
    for (const IrsbotParams& p : {default_params(), experiment_params()}) {
        CHECK(std::abs(p.b1 - p.b * std::cos(p.alpha)) <= 1e-12);
        CHECK(std::abs(p.b3 - p.b * std::sin(p.alpha)) <= 1e-12);
        CHECK(std::abs(std::tan(p.beta) - (p.d2 - p.P2) / p.u) <= 1e-12);
        CHECK(std::abs(std::sin(p.psi0) - std::hypot(p.d2 - p.P2, p.u) / p.L2) <= 1e-12);
        CHECK(std::abs(p.e1 - (p.b1 - p.c1)) <= 1e-12);
        CHECK(std::abs(p.e3 - (p.b3 + p.c3)) <= 1e-12);
    }
    const IrsbotParams d = default_params();
    CHECK(d.b1 == doctest::Approx(0.0721688).epsilon(1e-6));
    CHECK(d.a == 0.125);
    CHECK(d.P2 == d.d2 / 2);
    CHECK_THROWS_AS(make_params(0.25, 1.0 / 6, 0.5, 0.3, std::numbers::pi / 6, std::numbers::pi / 4), ModelError);
}

TEST_CASE("reference platform position") {
    // closed form evaluated independently
    const double r = -(4 + 6 * std::sqrt(2.0) + std::sqrt(6 * (37 - 6 * std::sqrt(2.0) - 2 * std::sqrt(3.0) - 4 * std::sqrt(6.0)))) / 24;
    CHECK(r == doctest::Approx(-0.9188199250196161).epsilon(1e-15));
    CHECK(std::abs(closed_form_r60_z() - r) == 0.0);
    const PkmModel pkm = build_model(experiment_params());
    for (const auto& l : pkm.limbs) {
        const Pose C = body_pose(l.tree, VecX::Zero(9), l.platform);
        CHECK((C.r - Vec3(0, 0, r)).norm() <= 1e-12);
        CHECK((C.R - Mat3::Identity()).norm() <= 1e-15);
    }
    CHECK(reference_platform_pose(experiment_params()).r.z() == -experiment_params().h0);
}

TEST_CASE("model bookkeeping") {
    const PkmModel pkm = build_model(experiment_params());
    REQUIRE(pkm.limbs.size() == 2);
    CHECK(pkm.delta_p() == 2);
    CHECK(pkm.actuated_q.size() == 2);
    for (const auto& l : pkm.limbs) {
        CHECK(l.n() == 9);
        CHECK(l.m() == 6);
        CHECK(l.delta() == 3);
        CHECK(l.tree.graph.num_cycles() == 2);
        CHECK(l.cycles[0].cycle.n() == 3);
        CHECK(l.cycles[0].cycle.m() == 2);
        CHECK(l.cycles[1].cycle.n() == 6);
        CHECK(l.cycles[1].cycle.m() == 4);
        CHECK(l.q_vars() == std::vector<int>{0, 7, 8});
        CHECK(l.dyn_vars.size() == 7);
        CHECK(max_residual(l, VecX::Zero(9)) <= 1e-12);
    }
    const auto& cut = pkm.limbs[0].cycles[1].cut;
    const IrsbotParams p = experiment_params();
    CHECK((cut.dk - Vec3(p.P1, p.P2, p.P3)).norm() == 0.0);
    CHECK((cut.dr - Vec3(0, 0, -p.L2 / 2)).norm() == 0.0);
    // first three axes
    for (int i = 0; i < 3; ++i) CHECK((pkm.limbs[0].tree.Y[i].head<3>() - Vec3(0, 1, 0)).norm() == 0.0);
}

TEST_CASE("the second limb mirrors the first") {
    const IrsbotParams p = experiment_params();
    const LimbModel a = build_limb(p, false), b = build_limb(p, true);
    const Mat3 M = Vec3(-1, 1, 1).asDiagonal();
    for (int i = 0; i < 9; ++i) {
        const Vec3 e = a.tree.Y[i].head<3>(), m = a.tree.Y[i].tail<3>();
        // axis reflected and reversed; moment follows from a reflected point on the axis
        CHECK((b.tree.Y[i].head<3>() + M * e).norm() < 1e-15);
        CHECK((b.tree.Y[i].tail<3>() - M * m).norm() < 1e-15);
        CHECK((b.tree.A[i].r - M * a.tree.A[i].r).norm() < 1e-15);
    }
    // symmetric joint angles give a mirrored platform position
    VecX th(9);
    th << 0.1, -0.1, 0.1, 0.05, -0.02, 0.03, 0.04, 0.02, -0.01;
    const Pose Ca = body_pose(a.tree, th, 4), Cb = body_pose(b.tree, th, 4);
    CHECK((Cb.r - M * Ca.r).norm() < 1e-14);
    CHECK((Cb.R - M * Ca.R * M).norm() < 1e-14);
}

TEST_CASE("mass model") {
    const MassModel mm = default_mass_model(default_params());
    const auto pm = nominal_masses();
    REQUIRE(mm.bodies.size() == 6);
    for (int i = 0; i < 6; ++i) CHECK(std::abs(mm.bodies[i].mass - pm[i]) <= 1e-3);
    // volume times aluminium density
    const double rho = 2700.0, L1 = 0.25, L2 = 0.5, a = 0.125, b1 = (1.0 / 12) * std::cos(std::numbers::pi / 6),
                 b3 = (1.0 / 12) * std::sin(std::numbers::pi / 6);
    const double m1 = rho * L1 * (L1 / 6) * (L1 / 6);
    const double m2 = rho * (2 * b1) * (2 * a) * (2 * b3);
    const double m4 = rho * std::numbers::pi * (L2 / 30) * (L2 / 30) * L2;
    const double m6 = rho * (4 * a / 2) * (3 * a / 2) * (a / 8);
    CHECK(std::abs(m1 / pm[0] - 1) < 1e-3);
    CHECK(std::abs(m2 / pm[1] - 1) < 1e-3);
    CHECK(std::abs(m4 / pm[3] - 1) < 1e-3);
    CHECK(std::abs(m6 / pm[5] - 1) < 1e-3);
    CHECK(std::abs(mm.bodies[0].primitive_mass - m1) < 1e-12);
    CHECK(std::abs(mm.bodies[5].primitive_mass - m6) < 1e-12);
    CHECK(mm.total_moving_mass() == doctest::Approx(2 * (pm[0] + pm[1] + pm[2] + pm[3] + pm[4]) + pm[5]));
    for (const auto& bp : mm.bodies) {
        CHECK((bp.M - bp.M.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
        Eigen::SelfAdjointEigenSolver<Mat6> es(bp.M);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("trajectory samples and derivatives") {
    TrajectorySpec s = nominal_spec(experiment_params(), 1e-3);
    CHECK(s.num_samples() == 1001);
    const TrajectorySample t0 = trajectory(s, 0.0);
    CHECK((t0.r - s.r0).norm() == 0.0);
    CHECK(t0.Vt.norm() == 0.0);
    const double h = 1e-5;
    for (double t : {0.05, 0.2, 0.37, 0.61, 0.93}) {
        const TrajectorySample a = trajectory(s, t), p = trajectory(s, t + h), m = trajectory(s, t - h);
        CHECK(((p.r - m.r) / (2 * h) - a.rd).norm() <= 1e-6 * std::max(1.0, a.rd.norm()));
        CHECK(((p.rd - m.rd) / (2 * h) - a.rdd).norm() <= 1e-6 * std::max(1.0, a.rdd.norm()));
        CHECK(a.r.y() == s.r0.y());
    }
    const TrajectorySpec sg = singularity_spec(experiment_params());
    CHECK(sg.dx == -0.15);
    CHECK(sg.dz == -0.6085);
    CHECK(parse_experiment("singularity") == ExperimentKind::Singularity);
    CHECK_THROWS_AS(parse_experiment("warp"), ConfigError);
}

TEST_CASE("nominal experiment records") {
    const PkmModel pkm = build_model(experiment_params());
    ExperimentSettings s;
    const ExperimentReport rep = run_experiment(pkm, ExperimentKind::InvDyn, nominal_spec(experiment_params(), 1e-2), s);
    CHECK(rep.steps.size() == 101);
    for (const auto& st : rep.steps) {
        CHECK(st.has_dynamics);
        for (const auto& l : st.limbs) {
            CHECK(l.pos_residual <= 1e-10);
            CHECK(l.vel_residual <= 1e-9);
            CHECK(l.acc_residual <= 1e-8);
            CHECK(std::isfinite(l.cond_sqrt_kappa));
        }
    }
}

TEST_CASE("solver failures carry the step") {
    const PkmModel pkm = build_model(experiment_params());
    TrajectorySpec s = nominal_spec(experiment_params(), 1e-2);
    s.dz = -2.0;  // far outside the workspace
    StepFailure f;
    ExperimentSettings es;
    es.dynamics = false;
    CHECK_THROWS_AS(run_experiment(pkm, ExperimentKind::IkNested, s, es, &f), Error);
    CHECK(f.step > 0);
    CHECK(!f.what.empty());
}
