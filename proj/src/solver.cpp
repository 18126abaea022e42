#include "pkm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pkm/errors.hpp"

namespace pkm {

std::vector<int> LimbModel::q_vars() const {
    std::vector<int> q = free_vars;
    for (const auto& c : cycles) q.insert(q.end(), c.cycle.q.begin(), c.cycle.q.end());
    return q;
}

int LimbModel::m() const {
    int m = 0;
    for (const auto& c : cycles) m += c.cycle.m();
    return m;
}

namespace {

KinematicState static_state(const TreeModel& m, const VecX& th) {
    KinematicState ks;
    ks.th = th;
    ks.thd = VecX::Zero(th.size());
    ks.sj = system_jacobian(m, th);
    ks.Jdot = MatX::Zero(ks.sj.J.rows(), ks.sj.J.cols());
    return ks;
}

ConstraintEval analytic_eval(const CycleModel& cm, const VecX& th) {
    const auto& c = cm.cycle;
    const auto yi = local_index(c, c.y), qi = local_index(c, c.q);
    ConstraintEval e;
    e.G = MatX::Zero(yi.size(), c.n());
    e.Gdot = MatX::Zero(yi.size(), c.n());
    e.g.resize(yi.size());
    e.bias = VecX::Zero(yi.size());
    VecX q(qi.size());
    for (std::size_t j = 0; j < qi.size(); ++j) q[j] = th[c.q[j]];
    for (std::size_t r = 0; r < yi.size(); ++r) {
        e.G(r, yi[r]) = 1.0;
        for (std::size_t j = 0; j < qi.size(); ++j) e.G(r, qi[j]) = -cm.H_const(yi[r], j);
        e.g[r] = th[c.y[r]] - cm.H_const.row(yi[r]).dot(q);
    }
    return e;
}

ConstraintEval cycle_eval(const LimbModel& limb, int ci, const KinematicState& ks) {
    const auto& cm = limb.cycles[ci];
    if (cm.analytic) return analytic_eval(cm, ks.th);
    return assemble_cycle_constraints(limb.tree, cm.cycle, cm.cut, ks);
}

void split_G(const ConstraintEval& e, const FundamentalCycle& c, MatX& Gy, MatX& Gq) {
    const auto yi = local_index(c, c.y), qi = local_index(c, c.q);
    Gy.resize(e.G.rows(), yi.size());
    Gq.resize(e.G.rows(), qi.size());
    for (std::size_t j = 0; j < yi.size(); ++j) Gy.col(j) = e.G.col(yi[j]);
    for (std::size_t j = 0; j < qi.size(); ++j) Gq.col(j) = e.G.col(qi[j]);
}

VecX solve_Gy(const CycleModel& cm, const MatX& Gy, const VecX& rhs) {
    if (cm.overconstrained) return Gy.completeOrthogonalDecomposition().solve(rhs);
    Eigen::JacobiSVD<MatX> svd(Gy);
    const VecX s = svd.singularValues();
    if (s.size() == 0 || !(s[s.size() - 1] > 1e-12 * s[0]))
        throw SingularGy("G_y of cycle " + std::to_string(cm.cycle.id) + " is singular");
    return Gy.partialPivLu().solve(rhs);
}

double residual_norm(const LimbModel& limb, int ci, const std::vector<Pose>& C, const VecX& th) {
    const auto& cm = limb.cycles[ci];
    if (cm.analytic) return analytic_eval(cm, th).g.norm();
    return cycle_residual(limb.tree, cm.cut, C).norm();
}

VecX q_slice(const VecX& dq_limb, const LimbModel& limb, int ci) {
    int off = static_cast<int>(limb.free_vars.size());
    for (int k = 0; k < ci; ++k) off += limb.cycles[k].cycle.delta();
    return dq_limb.segment(off, limb.cycles[ci].cycle.delta());
}

double rcond(const MatX& M) {
    Eigen::JacobiSVD<MatX> svd(M);
    const VecX s = svd.singularValues();
    if (s.size() == 0 || s[0] == 0.0) return 0.0;
    return s[s.size() - 1] / s[0];
}

MatX task_jacobian(const LimbModel& limb, const KinematicState& ks, const MatX& H) {
    const MatX Jp = body_jacobian(limb.tree, ks.sj, limb.platform);
    return limb.Pt * Jp * H;
}

MatX invert_task(const MatX& Lt) {
    if (Lt.rows() != Lt.cols()) throw SingularTaskJacobian("task Jacobian is not square");
    if (rcond(Lt) < 1e-12) throw SingularTaskJacobian("task Jacobian L_t is singular");
    return Lt.partialPivLu().inverse();
}

double task_error(const LimbModel& limb, const VecX& dx, const MetricWeights& w) {
    const Vec6 X = limb.Pt.transpose() * dx;
    return twist_norm(X, w);
}

}  // namespace

LimbConstraintState limb_constraints(const LimbModel& limb, const KinematicState& ks) {
    LimbConstraintState st;
    std::vector<CycleBlock> blocks;
    for (std::size_t ci = 0; ci < limb.cycles.size(); ++ci) {
        const auto& cm = limb.cycles[ci];
        st.evals.push_back(cycle_eval(limb, static_cast<int>(ci), ks));
        CycleBlock b;
        b.cycle = &cm.cycle;
        if (cm.analytic) {
            b.H = cm.H_const;
            b.Hdot = MatX::Zero(cm.H_const.rows(), cm.H_const.cols());
        } else {
            b.H = solve_H(st.evals.back(), cm.cycle, cm.overconstrained);
            b.Hdot = solve_H_dot(st.evals.back(), cm.cycle, cm.overconstrained);
        }
        blocks.push_back(b);
    }
    assemble_limb_H(limb.n(), limb.free_vars, blocks, st.H, st.Hdot);
    return st;
}

std::vector<double> cycle_residual_norms(const LimbModel& limb, const VecX& th) {
    const auto C = all_poses(limb.tree, th);
    std::vector<double> out;
    for (const auto& cm : limb.cycles) out.push_back(cycle_residual(limb.tree, cm.cut, C).norm());
    return out;
}

double max_residual(const LimbModel& limb, const VecX& th) {
    double m = 0.0;
    for (double v : cycle_residual_norms(limb, th)) m = std::max(m, v);
    return m;
}

LoopSolveResult solve_loop_constraints(const LimbModel& limb, int ci, const VecX& th0, const VecX& dq,
                                       const IkSettings& s) {
    const auto& cm = limb.cycles[ci];
    const auto& c = cm.cycle;
    LoopSolveResult res;
    res.th = th0;
    for (int j = 0; j < c.delta(); ++j) res.th[c.q[j]] += dq[j];

    if (cm.analytic) {
        VecX q(c.delta());
        for (int j = 0; j < c.delta(); ++j) q[j] = res.th[c.q[j]];
        const VecX tc = cm.H_const * q;
        for (int j = 0; j < c.n(); ++j) res.th[c.vars[j]] = tc[j];
        return res;
    }

    // initial step from the linearisation at th0
    {
        const ConstraintEval e = cycle_eval(limb, ci, static_state(limb.tree, th0));
        MatX Gy, Gq;
        split_G(e, c, Gy, Gq);
        const VecX dy = solve_Gy(cm, Gy, -(Gq * dq));
        for (int j = 0; j < c.m(); ++j) res.th[c.y[j]] += dy[j];
        res.iterations = 1;
    }
    auto C = all_poses(limb.tree, res.th);
    res.residual = residual_norm(limb, ci, C, res.th);
    res.residual_history.push_back(res.residual);
    while (res.residual > s.eps) {
        if (res.corrections >= s.max_inner)
            throw MaxIterationsExceeded("loop constraints of cycle " + std::to_string(c.id) +
                                        " did not converge; residual " + std::to_string(res.residual));
        const KinematicState ks = static_state(limb.tree, res.th);
        const ConstraintEval e = cycle_eval(limb, ci, ks);
        MatX Gy, Gq;
        split_G(e, c, Gy, Gq);
        const VecX dy = solve_Gy(cm, Gy, -e.g);
        for (int j = 0; j < c.m(); ++j) res.th[c.y[j]] += dy[j];
        ++res.corrections;
        ++res.iterations;
        C = all_poses(limb.tree, res.th);
        res.residual = residual_norm(limb, ci, C, res.th);
        res.residual_history.push_back(res.residual);
    }
    return res;
}

VecX task_increment(const LimbModel& limb, const Pose& current, const Pose& target) {
    const Pose dC = current.inverse() * target;
    Vec6 X;
    const Mat3 W = 0.5 * (dC.R - dC.R.transpose());
    X << W(2, 1), W(0, 2), W(1, 0), dC.r;
    return limb.Pt * X;
}

IkResult solve_limb_ik(const LimbModel& limb, const VecX& th0, const Pose& target, const IkSettings& s) {
    IkResult res;
    res.th = th0;
    VecX dx = task_increment(limb, body_pose(limb.tree, res.th, limb.platform), target);
    res.err_x = task_error(limb, dx, s.metric);
    res.err_x_history.push_back(res.err_x);
    while (res.err_x > s.eps) {
        if (res.outer_iterations >= s.max_outer)
            throw MaxIterationsExceeded("limb inverse kinematics did not converge; error " + std::to_string(res.err_x));
        const KinematicState ks = static_state(limb.tree, res.th);
        const LimbConstraintState cs = limb_constraints(limb, ks);
        const MatX Lt_inv = invert_task(task_jacobian(limb, ks, cs.H));
        const VecX dq = Lt_inv * dx;

        VecX th = res.th;
        for (std::size_t j = 0; j < limb.free_vars.size(); ++j) th[limb.free_vars[j]] += dq[j];
        int inner_max = 0;
        std::vector<double> g_here;
        const VecX th_prev = th;
        for (std::size_t ci = 0; ci < limb.cycles.size(); ++ci) {
            // every cycle starts from the admissible previous iterate; cycles are variable-disjoint
            const LoopSolveResult lr = solve_loop_constraints(limb, static_cast<int>(ci), th_prev,
                                                              q_slice(dq, limb, static_cast<int>(ci)), s);
            for (int v : limb.cycles[ci].cycle.vars) th[v] = lr.th[v];
            inner_max = std::max(inner_max, lr.iterations);
            res.inner_iterations_total += lr.iterations;
            if (!limb.cycles[ci].analytic)
                g_here.insert(g_here.end(), lr.residual_history.begin(), lr.residual_history.end());
        }
        res.th = th;
        ++res.outer_iterations;
        res.inner_iterations_per_outer.push_back(inner_max);
        res.g_history.push_back(g_here);
        dx = task_increment(limb, body_pose(limb.tree, res.th, limb.platform), target);
        res.err_x = task_error(limb, dx, s.metric);
        res.err_x_history.push_back(res.err_x);
    }
    res.err_g = max_residual(limb, res.th);
    return res;
}

IkResult solve_limb_ik_compound(const LimbModel& limb, const VecX& th0, const Pose& target, const IkSettings& s) {
    IkResult res;
    res.th = th0;
    auto errors = [&](VecX& dx) {
        dx = task_increment(limb, body_pose(limb.tree, res.th, limb.platform), target);
        res.err_x = task_error(limb, dx, s.metric);
        const auto C = all_poses(limb.tree, res.th);
        res.err_g = 0.0;
        for (std::size_t ci = 0; ci < limb.cycles.size(); ++ci)
            res.err_g = std::max(res.err_g, residual_norm(limb, static_cast<int>(ci), C, res.th));
    };
    VecX dx;
    errors(dx);
    res.err_x_history.push_back(res.err_x);
    while (res.err_x > s.eps1 || res.err_g > s.eps2) {
        if (res.outer_iterations >= s.max_outer)
            throw MaxIterationsExceeded("compound inverse kinematics did not converge; errors " +
                                        std::to_string(res.err_x) + ", " + std::to_string(res.err_g));
        // Newton step on the stacked system (task error; loop residuals): the residual
        // correction moves along y only, the task error is then met through H.
        const KinematicState ks = static_state(limb.tree, res.th);
        const LimbConstraintState cs = limb_constraints(limb, ks);
        VecX dth_g = VecX::Zero(limb.n());
        for (std::size_t ci = 0; ci < limb.cycles.size(); ++ci) {
            const auto& cm = limb.cycles[ci];
            MatX Gy, Gq;
            split_G(cs.evals[ci], cm.cycle, Gy, Gq);
            const VecX dy = solve_Gy(cm, Gy, -cs.evals[ci].g);
            for (int j = 0; j < cm.cycle.m(); ++j) dth_g[cm.cycle.y[j]] = dy[j];
        }
        const MatX Jx = limb.Pt * body_jacobian(limb.tree, ks.sj, limb.platform);
        const MatX Lt_inv = invert_task(Jx * cs.H);
        const VecX dq = Lt_inv * (dx - Jx * dth_g);
        VecX th = res.th + cs.H * dq + dth_g;
        for (const auto& cm : limb.cycles) {
            if (!cm.analytic) continue;
            // exact closed form for linear loops
            VecX q(cm.cycle.delta());
            for (int j = 0; j < cm.cycle.delta(); ++j) q[j] = th[cm.cycle.q[j]];
            const VecX tc = cm.H_const * q;
            for (int j = 0; j < cm.cycle.n(); ++j) th[cm.cycle.vars[j]] = tc[j];
        }
        res.th = th;
        ++res.outer_iterations;
        res.inner_iterations_per_outer.push_back(1);
        res.inner_iterations_total += 1;
        errors(dx);
        res.err_x_history.push_back(res.err_x);
        res.g_history.push_back({res.err_g});
    }
    return res;
}

LimbJacobians limb_jacobians(const LimbModel& limb, const VecX& th, const VecX& thd) {
    const KinematicState ks = kinematic_state(limb.tree, th, thd);
    const LimbConstraintState cs = limb_constraints(limb, ks);
    LimbJacobians j;
    j.H = cs.H;
    j.Hdot = cs.Hdot;
    j.Jp = body_jacobian(limb.tree, ks.sj, limb.platform);
    j.Jp_dot = body_jacobian_dot(limb.tree, ks.Jdot, limb.platform);
    j.Lp = j.Jp * j.H;
    j.Lp_dot = j.Jp_dot * j.H + j.Jp * j.Hdot;
    j.Lt = limb.Pt * j.Lp;
    j.Lt_dot = limb.Pt * j.Lp_dot;
    j.Lt_inv = invert_task(j.Lt);
    j.F = j.Lt_inv * limb.Dt;
    return j;
}

TreeRates tree_rates_from_task(const LimbModel& limb, const VecX& th, const VecX& Vt, const VecX& Vt_dot) {
    TreeRates r;
    const LimbJacobians j0 = limb_jacobians(limb, th, VecX::Zero(th.size()));
    r.qd = j0.F * Vt;
    r.thd = j0.H * r.qd;
    r.jac = limb_jacobians(limb, th, r.thd);
    r.qdd = r.jac.F * Vt_dot - r.jac.Lt_inv * (r.jac.Lt_dot * r.qd);
    r.thdd = r.jac.H * r.qdd + r.jac.Hdot * r.qd;
    return r;
}

MatX ik_jacobian(const PkmModel& pkm, const std::vector<LimbJacobians>& jac) {
    MatX J(pkm.limbs.size(), pkm.delta_p());
    for (std::size_t l = 0; l < pkm.limbs.size(); ++l) J.row(l) = jac[l].F.row(pkm.actuated_q[l]);
    return J;
}

}  // namespace pkm
