#include "pkm/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "pkm/errors.hpp"

namespace pkm::validation {

using namespace irsbot2;

double rel_error(const MatX& A, const MatX& B, double floor) {
    return (A - B).norm() / std::max(A.norm(), floor);
}

VecX rnea(const TreeModel& m, const std::vector<Mat6>& inertia, const VecX& th, const VecX& thd, const VecX& thdd,
          const Vec3& gravity) {
    const int n = m.n();
    const LimbGraph& g = m.graph;
    std::vector<Pose> E(n), C(n);
    std::vector<Vec6> X(n), V(n), Vd(n), W(n);
    Vec6 base_acc;
    base_acc << Vec3::Zero(), -gravity;
    for (int i = 0; i < n; ++i) {
        const int p = g.var_parent(i);
        const Pose Ep = p < 0 ? Pose::identity() : E[p];
        E[i] = Ep * exp_se3(m.Y[i], th[i]);
        C[i] = E[i] * m.A[i];
        X[i] = adjoint(m.A[i].inverse()) * m.Y[i];
        Vec6 Vp = Vec6::Zero(), Vdp = base_acc;
        Mat6 Ad_ip = adjoint(C[i].inverse());
        if (p >= 0) {
            Ad_ip = adjoint(C[i].inverse() * C[p]);
            Vp = V[p];
            Vdp = Vd[p];
        }
        V[i] = Ad_ip * Vp + X[i] * thd[i];
        Vd[i] = Ad_ip * Vdp + X[i] * thdd[i] + ad(V[i]) * X[i] * thd[i];
        W[i] = inertia[i] * Vd[i] - ad(V[i]).transpose() * inertia[i] * V[i];
    }
    VecX tau(n);
    for (int i = n - 1; i >= 0; --i) {
        tau[i] = X[i].dot(W[i]);
        const int p = g.var_parent(i);
        if (p >= 0) W[p] += adjoint(C[i].inverse() * C[p]).transpose() * W[i];
    }
    return tau;
}

namespace {

MatX full_cycle_rows(const LimbModel& limb, const LimbConstraintState& cs) {
    MatX G = MatX::Zero(limb.m(), limb.n());
    int r = 0;
    for (std::size_t ci = 0; ci < limb.cycles.size(); ++ci) {
        const auto& c = limb.cycles[ci].cycle;
        const MatX& Gc = cs.evals[ci].G;
        for (int j = 0; j < c.n(); ++j) G.block(r, c.vars[j], Gc.rows(), 1) = Gc.col(j);
        r += static_cast<int>(Gc.rows());
    }
    return G;
}

}  // namespace

MultiplierSolution multiplier_oracle(const PkmModel& pkm, const MachineState& st) {
    const std::size_t L = pkm.limbs.size();
    int ntot = 0, mtot = 6 * static_cast<int>(L - 1);
    for (const auto& l : pkm.limbs) {
        ntot += l.n();
        mtot += l.m();
    }
    VecX tau(ntot);
    MatX A = MatX::Zero(mtot, ntot);
    MatX S = MatX::Zero(ntot, L);
    std::vector<MatX> Jp;
    int off = 0, row = 0;
    for (std::size_t l = 0; l < L; ++l) {
        const LimbModel& limb = pkm.limbs[l];
        std::vector<Mat6> inertia = limb.inertia;
        const int pv = limb.tree.graph.body_var(limb.platform);
        if (l == 0) inertia[pv] = pkm.platform_inertia;
        tau.segment(off, limb.n()) = rnea(limb.tree, inertia, st.th[l], st.thd[l], st.thdd[l], pkm.gravity);
        const KinematicState ks = kinematic_state(limb.tree, st.th[l], st.thd[l]);
        const LimbConstraintState cs = limb_constraints(limb, ks);
        const MatX G = full_cycle_rows(limb, cs);
        A.block(row, off, G.rows(), G.cols()) = G;
        row += static_cast<int>(G.rows());
        Jp.push_back(body_jacobian(limb.tree, ks.sj, limb.platform));
        S(off + limb.q_vars()[pkm.actuated_q[l]], l) = 1.0;
        off += limb.n();
    }
    // platform attachment: limb l platform twist equals limb 0 platform twist
    int coff = pkm.limbs[0].n();
    for (std::size_t l = 1; l < L; ++l) {
        A.block(row, 0, 6, pkm.limbs[0].n()) = Jp[0];
        A.block(row, coff, 6, pkm.limbs[l].n()) = -Jp[l];
        row += 6;
        coff += pkm.limbs[l].n();
    }
    MatX K(ntot, A.rows() + L);
    K << A.transpose(), S;
    const VecX x = K.completeOrthogonalDecomposition().solve(tau);
    MultiplierSolution out;
    out.lambda = x.head(A.rows());
    out.u = x.tail(L);
    out.residual = (K * x - tau).norm() / std::max(tau.norm(), 1e-12);
    return out;
}

std::vector<MachineState> random_states(const PkmModel& pkm, const Pose& reference, int count, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(-0.2, 0.2), uz(-0.1, 0.45), uv(-1.0, 1.0);
    std::vector<MachineState> out;
    IkSettings s;
    s.eps = 1e-12;
    while (static_cast<int>(out.size()) < count) {
        TrajectorySample smp;
        smp.r = reference.r + Vec3(ux(rng), 0.0, uz(rng));
        smp.rd = Vec3(uv(rng), 0.0, uv(rng));
        smp.rdd = Vec3(uv(rng), 0.0, uv(rng));
        smp.C = Pose{reference.R, smp.r};
        smp.Vt = VecX(2);
        smp.Vt << smp.rd[0], smp.rd[2];
        smp.Vt_dot = VecX(2);
        smp.Vt_dot << smp.rdd[0], smp.rdd[2];
        std::vector<VecX> th0;
        for (const auto& l : pkm.limbs) th0.push_back(VecX::Zero(l.n()));
        out.push_back(solve_state(pkm, th0, smp, s));
    }
    return out;
}

double fd_body_jacobian_error(const LimbModel& limb, const VecX& th, double h) {
    const SystemJacobian sj = system_jacobian(limb.tree, th);
    MatX Jfd(sj.J.rows(), sj.J.cols());
    for (int j = 0; j < limb.n(); ++j) {
        VecX tp = th, tm = th;
        tp[j] += h;
        tm[j] -= h;
        const auto Cp = all_poses(limb.tree, tp), Cm = all_poses(limb.tree, tm);
        for (int i = 0; i < limb.n(); ++i) {
            const Mat4 dC = (Cp[i].matrix() - Cm[i].matrix()) / (2 * h);
            Mat4 B = sj.C[i].inverse().matrix() * dC;
            // remove the O(h^2) asymmetry before applying vee
            B.topLeftCorner<3, 3>() = 0.5 * (B.topLeftCorner<3, 3>() - B.topLeftCorner<3, 3>().transpose()).eval();
            B.row(3).setZero();
            Jfd.block<6, 1>(6 * i, j) = vee(B);
        }
    }
    return rel_error(sj.J, Jfd);
}

double fd_jacobian_dot_error(const LimbModel& limb, const VecX& th, const VecX& thd, double h) {
    const MatX Jd = jacobian_dot(limb.tree, th, thd);
    const MatX fd = (system_jacobian(limb.tree, th + h * thd).J - system_jacobian(limb.tree, th - h * thd).J) / (2 * h);
    return rel_error(Jd, fd);
}

namespace {

MatX H_at(const LimbModel& limb, const VecX& th) {
    return limb_constraints(limb, kinematic_state(limb.tree, th, VecX::Zero(th.size()))).H;
}

MatX Lt_at(const LimbModel& limb, const VecX& th) {
    return limb_jacobians(limb, th, VecX::Zero(th.size())).Lt;
}

}  // namespace

double fd_H_dot_error(const LimbModel& limb, const VecX& th, const VecX& thd, double h) {
    const MatX Hd = limb_constraints(limb, kinematic_state(limb.tree, th, thd)).Hdot;
    const MatX fd = (H_at(limb, th + h * thd) - H_at(limb, th - h * thd)) / (2 * h);
    return rel_error(Hd, fd);
}

double fd_Lt_dot_error(const LimbModel& limb, const VecX& th, const VecX& thd, double h) {
    const MatX Ld = limb_jacobians(limb, th, thd).Lt_dot;
    const MatX fd = (Lt_at(limb, th + h * thd) - Lt_at(limb, th - h * thd)) / (2 * h);
    return rel_error(Ld, fd);
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

SuiteResult make(const std::string& name, double measured, double tol, const std::string& detail = "") {
    SuiteResult r;
    r.name = name;
    r.measured = measured;
    r.tolerance = tol;
    r.pass = std::isfinite(measured) && measured <= tol;
    r.detail = detail;
    return r;
}

template <class F>
double max_over_random(const ValidationContext& ctx, const PkmModel& pkm, F f) {
    const auto states = random_states(pkm, reference_platform_pose(ctx.params), ctx.random_states, ctx.seed);
    double worst = 0.0;
    for (const auto& st : states)
        for (std::size_t l = 0; l < pkm.limbs.size(); ++l) worst = std::max(worst, f(pkm.limbs[l], st, l));
    return worst;
}

// Nominal trajectory solved at 1 ms; returns the report (dynamics included).
ExperimentReport nominal_run(const PkmModel& pkm, const ValidationContext& ctx) {
    ExperimentSettings es;
    es.dynamics = true;
    return run_experiment(pkm, ExperimentKind::InvDyn, nominal_spec(ctx.params, 1e-3), es);
}

SuiteResult suite_pendulum() {
    const double m = 2.5, l = 0.7, g = 9.81;
    TreeModel t;
    t.graph = build_limb_graph(1, {{1, 0, 1, JointKind::Revolute}}, {}, 1);
    t.Y = {revolute_screw(Vec3::UnitY(), Vec3::Zero())};
    t.A = {Pose{Mat3::Identity(), Vec3(0, 0, -l)}};
    LimbModel limb;
    limb.tree = t;
    limb.inertia = {body_inertia(m, Vec3::Zero(), Mat3::Zero())};
    limb.dyn_vars = {0};
    double worst = 0.0;
    for (double q : {-2.0, -0.7, 0.0, 0.3, 1.1, 2.9}) {
        for (double qd : {0.0, 1.7, -3.2}) {
            VecX th(1), thd(1);
            th << q;
            thd << qd;
            const TreeEomTerms e = tree_eom(limb, th, thd, Vec3(0, 0, -g));
            worst = std::max(worst, std::abs(e.M(0, 0) - m * l * l));
            worst = std::max(worst, std::abs(e.Qgrav[0] - m * g * l * std::sin(q)));
            worst = std::max(worst, std::abs(e.c[0]));
        }
    }
    return make("pendulum", worst, 1e-10, "max |M - ml^2|, |Qgrav - mgl sin q|, |c|");
}

SuiteResult suite_power(const PkmModel& pkm, const ValidationContext& ctx) {
    const ExperimentReport rep = nominal_run(pkm, ctx);
    double res = 0.0, pow = 0.0;
    const double dt = rep.spec.dt;
    for (std::size_t k = 1; k < rep.steps.size(); ++k) {
        res += 0.5 * dt * (std::abs(rep.steps[k].power_residual) + std::abs(rep.steps[k - 1].power_residual));
        pow += 0.5 * dt * (std::abs(rep.steps[k].actuator_power) + std::abs(rep.steps[k - 1].actuator_power));
    }
    return make("power-balance", res / pow, 1e-3, "integral |u.qd - d(T+V)/dt| / integral |u.qd|");
}

SuiteResult suite_multiplier(const PkmModel& pkm, const ValidationContext& ctx) {
    const TrajectorySpec spec = nominal_spec(ctx.params, 1e-3);
    const int N = spec.num_samples();
    const int stride = std::max(1, (N - 1) / ctx.oracle_states);
    std::vector<VecX> th;
    for (const auto& l : pkm.limbs) th.push_back(VecX::Zero(l.n()));
    double worst = 0.0, worst_res = 0.0;
    int used = 0;
    IkSettings s;
    for (int k = 0; k < N; ++k) {
        const MachineState st = solve_state(pkm, th, trajectory(spec, spec.time(k)), s);
        th = st.th;
        if (k == 0 || k % stride != 0) continue;
        const VecX u = actuator_torques(pkm, st);
        const MultiplierSolution ms = multiplier_oracle(pkm, st);
        worst = std::max(worst, rel_error(ms.u, u, 1e-6));
        worst_res = std::max(worst_res, ms.residual);
        ++used;
    }
    SuiteResult r = make("multiplier-oracle", worst, 1e-6,
                         std::to_string(used) + " states, lsq residual " + fmt(worst_res));
    r.pass = r.pass && used >= 20 && worst_res <= 1e-8;
    return r;
}

SuiteResult suite_fd_accel(const PkmModel& pkm, const ValidationContext& ctx) {
    const TrajectorySpec spec = nominal_spec(ctx.params, 1e-3);
    const int N = spec.num_samples();
    std::mt19937_64 rng(ctx.seed + 7);
    std::uniform_int_distribution<int> pick(1, N - 2);
    std::vector<int> chosen;
    for (int i = 0; i < ctx.random_states; ++i) chosen.push_back(pick(rng));
    std::sort(chosen.begin(), chosen.end());
    IkSettings s;
    IkSettings fine;
    fine.eps = 1e-13;
    std::vector<VecX> th;
    for (const auto& l : pkm.limbs) th.push_back(VecX::Zero(l.n()));
    const double h = 1e-5;
    double worst = 0.0;
    std::size_t ci = 0;
    for (int k = 0; k < N && ci < chosen.size(); ++k) {
        const double t = spec.time(k);
        const MachineState st = solve_state(pkm, th, trajectory(spec, t), s);
        th = st.th;
        while (ci < chosen.size() && chosen[ci] == k) {
            const MachineState mid = solve_state(pkm, th, trajectory(spec, t), fine);
            const MachineState sp = solve_state(pkm, mid.th, trajectory(spec, t + h), fine);
            const MachineState sm = solve_state(pkm, mid.th, trajectory(spec, t - h), fine);
            for (std::size_t l = 0; l < pkm.limbs.size(); ++l) {
                const VecX fd = (sp.thd[l] - sm.thd[l]) / (2 * h);
                worst = std::max(worst, rel_error(mid.thdd[l], fd));
            }
            ++ci;
        }
    }
    return make("fd-accel", worst, 1e-4, std::to_string(chosen.size()) + " trajectory states");
}

}  // namespace

std::vector<std::string> suite_names() {
    return {"constraint-residual", "gh-orthogonality", "fd-jacobian", "fd-jdot",   "fd-hdot",
            "fd-ltdot",            "fd-accel",         "pendulum",    "multiplier-oracle", "power-balance"};
}

SuiteResult run_suite(const std::string& name, const ValidationContext& ctx) {
    const auto names = suite_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
        throw ConfigError("unknown validation suite '" + name + "'");
    if (name == "pendulum") return suite_pendulum();
    const PkmModel pkm = build_model(ctx.params, ctx.options);
    if (name == "constraint-residual") {
        double worst = 0.0;
        for (const auto& l : pkm.limbs) worst = std::max(worst, max_residual(l, VecX::Zero(l.n())));
        return make(name, worst, 1e-12, "max cycle residual at the reference configuration");
    }
    if (name == "gh-orthogonality") {
        const double w = max_over_random(ctx, pkm, [](const LimbModel& limb, const MachineState& st, std::size_t l) {
            const KinematicState ks = kinematic_state(limb.tree, st.th[l], st.thd[l]);
            const LimbConstraintState cs = limb_constraints(limb, ks);
            const MatX G = full_cycle_rows(limb, cs);
            MatX Gd = MatX::Zero(G.rows(), G.cols());
            int r = 0;
            for (std::size_t ci = 0; ci < limb.cycles.size(); ++ci) {
                const auto& c = limb.cycles[ci].cycle;
                for (int j = 0; j < c.n(); ++j)
                    Gd.block(r, c.vars[j], cs.evals[ci].Gdot.rows(), 1) = cs.evals[ci].Gdot.col(j);
                r += static_cast<int>(cs.evals[ci].Gdot.rows());
            }
            const double a = (G * cs.H).norm() / std::max(G.norm() * cs.H.norm(), 1e-12);
            const double b = (Gd * cs.H + G * cs.Hdot).norm() / std::max(Gd.norm() * cs.H.norm() + 1e-12, 1e-12);
            return std::max(a, b);
        });
        return make(name, w, 1e-10, "max relative |G H|, |Gdot H + G Hdot|");
    }
    if (name == "fd-jacobian")
        return make(name, max_over_random(ctx, pkm, [](const LimbModel& limb, const MachineState& st, std::size_t l) {
                        return fd_body_jacobian_error(limb, st.th[l]);
                    }), 1e-4);
    if (name == "fd-jdot")
        return make(name, max_over_random(ctx, pkm, [](const LimbModel& limb, const MachineState& st, std::size_t l) {
                        return fd_jacobian_dot_error(limb, st.th[l], st.thd[l]);
                    }), 1e-4);
    if (name == "fd-hdot")
        return make(name, max_over_random(ctx, pkm, [](const LimbModel& limb, const MachineState& st, std::size_t l) {
                        return fd_H_dot_error(limb, st.th[l], st.thd[l]);
                    }), 1e-4);
    if (name == "fd-ltdot")
        return make(name, max_over_random(ctx, pkm, [](const LimbModel& limb, const MachineState& st, std::size_t l) {
                        return fd_Lt_dot_error(limb, st.th[l], st.thd[l]);
                    }), 1e-4);
    if (name == "fd-accel") return suite_fd_accel(pkm, ctx);
    if (name == "multiplier-oracle") return suite_multiplier(pkm, ctx);
    return suite_power(pkm, ctx);
}

}  // namespace pkm::validation
