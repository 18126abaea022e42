// Acceptance checks for the IRSBot-2 model. One PASS/FAIL line per criterion.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "pkm/errors.hpp"
#include "pkm/irsbot2.hpp"
#include "pkm/validation.hpp"

using namespace pkm;
using namespace pkm::irsbot2;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

const IrsbotParams P = experiment_params();

ExperimentReport run(ExperimentKind kind, const TrajectorySpec& spec, bool compound, bool dynamics) {
    const PkmModel pkm = build_model(P);
    ExperimentSettings s;
    s.ik.eps = s.ik.eps1 = s.ik.eps2 = 1e-10;
    s.compound = compound;
    s.dynamics = dynamics;
    return run_experiment(pkm, kind, spec, s);
}

// Step 0 is the initial assembly from th = 0 and carries no warm start.
template <class F>
void for_tracked(const ExperimentReport& r, F f) {
    for (std::size_t k = 1; k < r.steps.size(); ++k)
        for (const LimbStep& l : r.steps[k].limbs) f(l);
}

Outcome c1(const ExperimentReport& r) {
    int omin = 1 << 30, omax = 0, imax = 0;
    bool inner_ok = true;
    for_tracked(r, [&](const LimbStep& l) {
        omin = std::min(omin, l.outer);
        omax = std::max(omax, l.outer);
        imax = std::max(imax, l.inner_max);
        if (l.inner_total < l.outer) inner_ok = false;
    });
    const bool ok = omin >= 1 && omax <= 3 && imax <= 3 && inner_ok && r.runtime_s < 10.0;
    return {ok, fmt("outer in [%g,%g], inner max %g, runtime %.3g s", omin, omax, imax, r.runtime_s)};
}

double share_with_outer(const ExperimentReport& r, int n) {
    int hit = 0, total = 0;
    for_tracked(r, [&](const LimbStep& l) {
        ++total;
        if (l.outer == n) ++hit;
    });
    return total ? double(hit) / total : 0.0;
}

Outcome c2() {
    const ExperimentReport r = run(ExperimentKind::IkNested, nominal_spec(P, 1e-2), false, false);
    const double f = share_with_outer(r, 3);
    return {f >= 0.9, fmt("%.1f%% of steps at 3 outer iterations (need >= 90%%)", 100 * f)};
}

Outcome c3() {
    const PkmModel pkm = build_model(P);
    IkSettings s;
    s.eps = 1e-11;
    const Pose target{Mat3::Identity(), reference_platform_pose(P).r + Vec3(0.2, 0.0, 0.5)};
    const IkResult r = solve_limb_ik(pkm.limbs[0], VecX::Zero(pkm.limbs[0].n()), target, s);
    const auto& e = r.err_x_history;
    bool superlinear = e.size() >= 3;
    for (std::size_t k = e.size() >= 3 ? e.size() - 3 : 0; k + 1 < e.size(); ++k)
        if (!(e[k + 1] <= 10.0 * std::pow(e[k], 1.5))) superlinear = false;
    const bool ok = std::abs(r.outer_iterations - 6) <= 1 && superlinear;
    return {ok, fmt("%g outer iterations, final error %.3g", r.outer_iterations, e.back())};
}

Outcome c4(const ExperimentReport& nested) {
    const ExperimentReport r = run(ExperimentKind::IkCompound, nominal_spec(P, 1e-3), true, false);
    const double f = share_with_outer(r, 3);
    double dev = 0.0;
    for (std::size_t k = 0; k < r.steps.size(); ++k)
        for (std::size_t l = 0; l < r.steps[k].limbs.size(); ++l)
            dev = std::max(dev, (r.steps[k].limbs[l].th - nested.steps[k].limbs[l].th).cwiseAbs().maxCoeff());
    return {f >= 0.9 && dev <= 1e-9,
            fmt("%.1f%% of steps at 3 iterations (need >= 90%%), max |th - th_nested| %.3g", 100 * f, dev)};
}

Outcome c5() {
    const PkmModel pkm = build_model(P);
    ExperimentSettings s;
    s.dynamics = false;
    StepFailure fail;
    try {
        const ExperimentReport r = run_experiment(pkm, ExperimentKind::Singularity, singularity_spec(P, 1e-3), s, &fail);
        std::vector<double> kappa;
        int omax = 0, imax = 0;
        for (std::size_t k = 0; k < r.steps.size(); ++k) kappa.push_back(r.steps[k].limbs[0].cond_sqrt_kappa);
        for_tracked(r, [&](const LimbStep& l) {
            omax = std::max(omax, l.outer);
            imax = std::max(imax, l.inner_max);
        });
        std::vector<double> sorted = kappa;
        std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
        const double ratio = *std::max_element(kappa.begin(), kappa.end()) / sorted[sorted.size() / 2];
        return {ratio >= 10.0 && omax <= 4 && imax <= 2,
                fmt("peak/median sqrt(kappa) %.3g, outer max %g, inner max %g", ratio, omax, imax)};
    } catch (const std::exception& e) {
        return {false, "solver failed at step " + std::to_string(fail.step) + " (t = " + fmt("%g", fail.t) +
                           "): " + e.what()};
    }
}

Outcome c6(const std::vector<const ExperimentReport*>& reports) {
    double g = 0, v = 0, a = 0;
    for (const ExperimentReport* r : reports)
        for (const StepRecord& st : r->steps)
            for (const LimbStep& l : st.limbs) {
                g = std::max(g, l.pos_residual);
                v = std::max(v, l.vel_residual);
                a = std::max(a, l.acc_residual);
            }
    return {g <= 1e-10 && v <= 1e-9 && a <= 1e-8, fmt("max |g| %.3g, |G thd| %.3g, acc %.3g", g, v, a)};
}

Outcome suites(const std::vector<std::string>& names) {
    validation::ValidationContext ctx;
    Outcome o{true, ""};
    for (const std::string& n : names) {
        const validation::SuiteResult r = validation::run_suite(n, ctx);
        o.pass = o.pass && r.pass;
        if (!o.detail.empty()) o.detail += "; ";
        o.detail += n + (r.pass ? " ok " : " FAILED ") + fmt("%.3g <= %.3g", r.measured, r.tolerance);
    }
    return o;
}

Outcome c9() {
    const PkmModel pkm = build_model(P);
    bool dims_ok = pkm.delta_p() == 2;
    for (const LimbModel& l : pkm.limbs)
        dims_ok = dims_ok && l.n() == 9 && l.m() == 6 && l.delta() == 3 && l.cycles.size() == 2 &&
                  l.cycles[1].cycle.m() == 4;
    const std::vector<double> nominal = {1.17188, 8.11899, 21.1875, 1.1781, 1.1781, 1.97754};
    const IrsbotParams d = default_params();
    const MassModel mm = default_mass_model(d);
    double mass_err = 0.0, prim_rel = 0.0;
    for (int b = 0; b < 6; ++b) mass_err = std::max(mass_err, std::abs(mm.bodies[b].mass - nominal[b]));
    // Volume times aluminium density straight from the geometry: square beam L1 x (L1/6)^2,
    // plate 2(c1+d1) x 2 d2 x (c3+d3), rods of radius L2/30, platform 4 P1 x 3 P2 x P2/4.
    const double rho = 2700.0;
    const double prim[6] = {
        rho * d.L1 * std::pow(d.L1 / 6, 2),
        rho * 2 * (d.c1 + d.d1) * 2 * d.d2 * (d.c3 + d.d3),
        0.0,
        rho * M_PI * std::pow(d.L2 / 30, 2) * d.L2,
        rho * M_PI * std::pow(d.L2 / 30, 2) * d.L2,
        rho * 4 * d.P1 * 3 * d.P2 * d.P2 / 4,
    };
    for (int b : {0, 1, 3, 4, 5}) prim_rel = std::max(prim_rel, std::abs(prim[b] - nominal[b]) / nominal[b]);
    const bool ok = dims_ok && mass_err <= 1e-3 && prim_rel <= 1e-3;
    return {ok, std::string("dimensions ") + (dims_ok ? "ok" : "wrong") +
                    fmt(", mass error %.3g kg, primitive mass rel error %.3g", mass_err, prim_rel)};
}

Outcome c10() {
    const Pose C = reference_platform_pose(P);
    const double err = (C.r - Vec3(0.0, 0.0, closed_form_r60_z())).norm();
    return {err <= 1e-12, fmt("|r6,0 - closed form| = %.3g m (z = %.16g)", err, C.r.z())};
}

}  // namespace

int main() {
    std::vector<std::pair<int, std::function<Outcome()>>> checks;
    ExperimentReport nested, invdyn;
    bool nested_ok = false;
    std::string nested_err;
    try {
        nested = run(ExperimentKind::IkNested, nominal_spec(P, 1e-3), false, false);
        invdyn = run(ExperimentKind::InvDyn, nominal_spec(P, 1e-3), false, true);
        nested_ok = true;
    } catch (const std::exception& e) {
        nested_err = e.what();
    }
    auto need_nested = [&](auto f) {
        return [=, &nested, &invdyn]() -> Outcome {
            if (!nested_ok) return {false, "nominal run failed: " + nested_err};
            return f(nested, invdyn);
        };
    };
    checks.emplace_back(1, need_nested([](const auto& n, const auto&) { return c1(n); }));
    checks.emplace_back(2, c2);
    checks.emplace_back(3, c3);
    checks.emplace_back(4, need_nested([](const auto& n, const auto&) { return c4(n); }));
    checks.emplace_back(5, c5);
    checks.emplace_back(6, need_nested([](const auto& n, const auto& d) { return c6({&n, &d}); }));
    checks.emplace_back(7, [] { return suites({"fd-jacobian", "fd-jdot", "fd-hdot", "fd-ltdot", "fd-accel"}); });
    checks.emplace_back(8, [] { return suites({"pendulum", "multiplier-oracle", "power-balance"}); });
    checks.emplace_back(9, c9);
    checks.emplace_back(10, c10);

    int failed = 0;
    for (auto& [id, f] : checks) {
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("criterion %2d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, checks.size());
    return failed == 0 ? 0 : 1;
}
