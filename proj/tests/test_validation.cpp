#include "doctest.h"
#include "pkm/errors.hpp"
#include "pkm/validation.hpp"

using namespace pkm;
using namespace pkm::validation;

TEST_CASE("suite registry") {
    const auto n = suite_names();
    CHECK(n.size() == 10);
    ValidationContext ctx;
    CHECK_THROWS_AS(run_suite("no-such-suite", ctx), ConfigError);
}

TEST_CASE("fast suites pass on the default model") {
    ValidationContext ctx;
    ctx.random_states = 10;
    for (const char* s : {"constraint-residual", "gh-orthogonality", "fd-jacobian", "fd-jdot", "fd-hdot", "fd-ltdot",
                          "pendulum"}) {
        const SuiteResult r = run_suite(s, ctx);
        CHECK_MESSAGE(r.pass, s, " measured ", r.measured);
    }
}

TEST_CASE("perturbed cut-joint anchor fails the residual suite") {
    ValidationContext ctx;
    ctx.options.distal_anchor_offset = Vec3(1e-4, 0, 0);
    const SuiteResult r = run_suite("constraint-residual", ctx);
    CHECK_FALSE(r.pass);
    CHECK(r.measured == doctest::Approx(1e-4).epsilon(1e-6));
}

TEST_CASE("multiplier oracle at one state") {
    using namespace pkm::irsbot2;
    const IrsbotParams p = experiment_params();
    const PkmModel pkm = build_model(p);
    const TrajectorySpec spec = nominal_spec(p, 1e-3);
    std::vector<VecX> th(2, VecX::Zero(9));
    MachineState st;
    for (int k = 0; k <= 120; ++k) {
        st = solve_state(pkm, th, trajectory(spec, spec.time(k)), {});
        th = st.th;
    }
    const MultiplierSolution m = multiplier_oracle(pkm, st);
    const VecX u = actuator_torques(pkm, st);
    CHECK(m.residual < 1e-10);
    CHECK(rel_error(m.u, u) < 1e-6);
}

TEST_CASE("rel_error floor") {
    MatX a = MatX::Zero(2, 2), b = MatX::Constant(2, 2, 1e-12);
    CHECK(rel_error(a, b) < 1e-3);
}
