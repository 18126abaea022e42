#include "pkm/constraints.hpp"

#include <algorithm>
#include <string>

#include "pkm/errors.hpp"

namespace pkm {

namespace {

struct BodyKin {
    Pose C;
    MatX J;     // 6 x n
    MatX Jdot;  // 6 x n
    Vec6 V = Vec6::Zero();
};

BodyKin body_kin(const TreeModel& m, const KinematicState& ks, int body) {
    BodyKin b;
    b.J = body_jacobian(m, ks.sj, body);
    b.Jdot = body_jacobian_dot(m, ks.Jdot, body);
    if (body != 0) b.C = ks.sj.C[m.graph.body_var(body)];
    b.V = b.J * ks.thd;
    return b;
}

Vec3 unit(const Vec3& v) {
    const double n = v.norm();
    if (n == 0.0) throw Error("zero direction vector in cut-joint spec");
    return v / n;
}

MatX stack(const MatX& a, const MatX& b) {
    MatX s(a.rows() + b.rows(), a.cols());
    s << a, b;
    return s;
}

}  // namespace

CutJointSpec revolute_cut(int cycle, int k, int r, const Vec3& dk, const Vec3& dr, const Vec3& ek, const Vec3& er) {
    CutJointSpec s;
    s.cycle = cycle;
    s.k = k;
    s.r = r;
    s.dk = dk;
    s.dr = dr;
    s.locks = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
    // two vectors normal to the axis in frame k must stay normal to the axis on r
    const Vec3 e = unit(ek);
    Vec3 t = e.unitOrthogonal();
    s.orient.push_back({t, unit(er)});
    s.orient.push_back({e.cross(t), unit(er)});
    return s;
}

CutJointSpec universal_cut(int cycle, int k, int r, const Vec3& dk, const Vec3& dr, const Vec3& ur, const Vec3& uk) {
    CutJointSpec s;
    s.cycle = cycle;
    s.k = k;
    s.r = r;
    s.dk = dk;
    s.dr = dr;
    s.locks = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
    s.orient.push_back({unit(uk), unit(ur)});
    return s;
}

KinematicState kinematic_state(const TreeModel& m, const VecX& th, const VecX& thd) {
    KinematicState ks;
    ks.th = th;
    ks.thd = thd;
    ks.sj = system_jacobian(m, th);
    ks.Jdot = jacobian_dot(m, ks.sj, thd);
    return ks;
}

Displacement relative_displacement(const TreeModel& m, const KinematicState& ks, const CutJointSpec& spec) {
    const BodyKin bk = body_kin(m, ks, spec.k);
    const BodyKin br = body_kin(m, ks, spec.r);
    const Mat3 Rk = bk.C.R, Rr = br.C.R;
    const Mat3 Rkr = Rk.transpose() * Rr;
    const Vec3 p = Rk.transpose() * (br.C.r + Rr * spec.dr - bk.C.r);  // anchor of r seen from frame k origin

    Displacement out;
    out.d = p - spec.dk;
    out.B.setZero();
    out.B.block<3, 3>(0, 0) = skew(p);
    out.B.block<3, 3>(0, 3) = -Mat3::Identity();
    out.B.block<3, 3>(0, 6) = -Rkr * skew(spec.dr);
    out.B.block<3, 3>(0, 9) = Rkr;

    const Vec3 wk = bk.V.head<3>(), wr = br.V.head<3>();
    Eigen::Matrix<double, 12, 1> V12;
    V12 << bk.V, br.V;
    out.ddot = out.B * V12;
    const Mat3 Rkr_dot = Rkr * skew(wr) - skew(wk) * Rkr;
    out.Bdot.setZero();
    out.Bdot.block<3, 3>(0, 0) = skew(out.ddot);
    out.Bdot.block<3, 3>(0, 6) = -Rkr_dot * skew(spec.dr);
    out.Bdot.block<3, 3>(0, 9) = Rkr_dot;

    const MatX Jl = stack(bk.J, br.J);
    const MatX Jl_dot = stack(bk.Jdot, br.Jdot);
    out.A = out.B * Jl;
    out.Adot = out.Bdot * Jl + out.B * Jl_dot;
    return out;
}

ConstraintRows position_constraint_rows(const CutJointSpec& spec, const Displacement& disp) {
    const int mp = static_cast<int>(spec.locks.size());
    ConstraintRows rows;
    rows.g.resize(mp);
    rows.B.resize(mp, 12);
    rows.Bdot.resize(mp, 12);
    for (int a = 0; a < mp; ++a) {
        const Vec3 u = spec.locks[a];
        rows.g[a] = u.dot(disp.d);
        rows.B.row(a) = u.transpose() * disp.B;
        rows.Bdot.row(a) = u.transpose() * disp.Bdot;
    }
    return rows;
}

ConstraintRows orientation_constraint_rows(const TreeModel& m, const KinematicState& ks, const CutJointSpec& spec) {
    const BodyKin bk = body_kin(m, ks, spec.k);
    const BodyKin br = body_kin(m, ks, spec.r);
    const Mat3 Rkr = bk.C.R.transpose() * br.C.R;
    const Vec3 wk = bk.V.head<3>(), wr = br.V.head<3>();
    const Mat3 Rkr_dot = Rkr * skew(wr) - skew(wk) * Rkr;

    const int mo = static_cast<int>(spec.orient.size());
    ConstraintRows rows;
    rows.g.resize(mo);
    rows.B = MatX::Zero(mo, 12);
    rows.Bdot = MatX::Zero(mo, 12);
    for (int a = 0; a < mo; ++a) {
        const Vec3 uk = spec.orient[a].uk, ur = spec.orient[a].ur;
        const Vec3 w = Rkr * ur;
        const Vec3 w_dot = Rkr_dot * ur;
        rows.g[a] = uk.dot(w);
        // g_dot = uk^T (w~ wk) - uk^T Rkr ur~ wr
        rows.B.block<1, 3>(a, 0) = uk.transpose() * skew(w);
        rows.B.block<1, 3>(a, 6) = -uk.transpose() * Rkr * skew(ur);
        rows.Bdot.block<1, 3>(a, 0) = uk.transpose() * skew(w_dot);
        rows.Bdot.block<1, 3>(a, 6) = -uk.transpose() * Rkr_dot * skew(ur);
    }
    return rows;
}

std::vector<int> local_index(const FundamentalCycle& c, const std::vector<int>& vars) {
    std::vector<int> out;
    for (int v : vars) {
        auto it = std::find(c.vars.begin(), c.vars.end(), v);
        if (it == c.vars.end()) throw Error("variable " + std::to_string(v) + " not in cycle");
        out.push_back(static_cast<int>(it - c.vars.begin()));
    }
    return out;
}

ConstraintEval assemble_cycle_constraints(const TreeModel& m, const FundamentalCycle& c, const CutJointSpec& spec,
                                          const KinematicState& ks) {
    const BodyKin bk = body_kin(m, ks, spec.k);
    const BodyKin br = body_kin(m, ks, spec.r);
    const MatX Jl = stack(bk.J, br.J);
    const MatX Jl_dot = stack(bk.Jdot, br.Jdot);

    const Displacement disp = relative_displacement(m, ks, spec);
    const ConstraintRows pos = position_constraint_rows(spec, disp);
    const ConstraintRows rot = orientation_constraint_rows(m, ks, spec);
    const int mp = static_cast<int>(pos.g.size()), mo = static_cast<int>(rot.g.size());

    MatX B(mp + mo, 12), Bdot(mp + mo, 12);
    B << pos.B, rot.B;
    Bdot << pos.Bdot, rot.Bdot;
    ConstraintEval e;
    e.g.resize(mp + mo);
    e.g << pos.g, rot.g;
    const MatX G_full = B * Jl;
    const MatX Gdot_full = Bdot * Jl + B * Jl_dot;
    e.G.resize(mp + mo, c.n());
    e.Gdot.resize(mp + mo, c.n());
    VecX thd_c(c.n());
    for (int j = 0; j < c.n(); ++j) {
        e.G.col(j) = G_full.col(c.vars[j]);
        e.Gdot.col(j) = Gdot_full.col(c.vars[j]);
        thd_c[j] = ks.thd[c.vars[j]];
    }
    e.bias = e.Gdot * thd_c;
    return e;
}

VecX cycle_residual(const TreeModel& m, const CutJointSpec& spec, const std::vector<Pose>& C) {
    const Pose Ck = spec.k == 0 ? Pose::identity() : C[m.graph.body_var(spec.k)];
    const Pose Cr = spec.r == 0 ? Pose::identity() : C[m.graph.body_var(spec.r)];
    const Mat3 Rkr = Ck.R.transpose() * Cr.R;
    const Vec3 d = Ck.R.transpose() * (Cr.r + Cr.R * spec.dr - Ck.r) - spec.dk;
    VecX g(spec.m());
    int row = 0;
    for (const auto& u : spec.locks) g[row++] = u.dot(d);
    for (const auto& o : spec.orient) g[row++] = o.uk.dot(Rkr * o.ur);
    return g;
}

namespace {

MatX null_space(const MatX& G) {
    Eigen::JacobiSVD<MatX> svd(G, Eigen::ComputeFullV);
    const VecX s = svd.singularValues();
    const double smax = s.size() ? s[0] : 0.0;
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s[i] > 1e-9 * smax) ++rank;
    return svd.matrixV().rightCols(G.cols() - rank);
}

}  // namespace

double rcond_Gy(const ConstraintEval& e, const FundamentalCycle& c) {
    const auto yi = local_index(c, c.y);
    MatX Gy(e.G.rows(), yi.size());
    for (std::size_t j = 0; j < yi.size(); ++j) Gy.col(j) = e.G.col(yi[j]);
    if (Gy.rows() != Gy.cols()) return 0.0;
    if (Gy.size() == 0) return 1.0;
    Eigen::JacobiSVD<MatX> svd(Gy);
    const VecX s = svd.singularValues();
    return s[0] == 0.0 ? 0.0 : s[s.size() - 1] / s[0];
}

MatX solve_H(const ConstraintEval& e, const FundamentalCycle& c, bool overconstrained) {
    if (overconstrained) return null_space(e.G);
    if (e.G.rows() == 0) return MatX::Identity(c.n(), c.n());
    if (rcond_Gy(e, c) < 1e-12)
        throw SingularGy("G_y of cycle " + std::to_string(c.id) + " is singular");
    const auto yi = local_index(c, c.y), qi = local_index(c, c.q);
    MatX Gy(e.G.rows(), yi.size()), Gq(e.G.rows(), qi.size());
    for (std::size_t j = 0; j < yi.size(); ++j) Gy.col(j) = e.G.col(yi[j]);
    for (std::size_t j = 0; j < qi.size(); ++j) Gq.col(j) = e.G.col(qi[j]);
    const MatX Hy = -Gy.partialPivLu().solve(Gq);
    MatX H = MatX::Zero(c.n(), qi.size());
    for (std::size_t j = 0; j < yi.size(); ++j) H.row(yi[j]) = Hy.row(j);
    for (std::size_t j = 0; j < qi.size(); ++j) H(qi[j], j) = 1.0;
    return H;
}

MatX solve_H_dot(const ConstraintEval& e, const FundamentalCycle& c, bool overconstrained) {
    if (overconstrained) {
        // derivative of the null-space basis that keeps G H = 0: Hdot = -G^+ Gdot H
        const MatX H = null_space(e.G);
        return -e.G.completeOrthogonalDecomposition().pseudoInverse() * e.Gdot * H;
    }
    if (e.G.rows() == 0) return MatX::Zero(c.n(), c.n());
    if (rcond_Gy(e, c) < 1e-12)
        throw SingularGy("G_y of cycle " + std::to_string(c.id) + " is singular");
    const auto yi = local_index(c, c.y), qi = local_index(c, c.q);
    MatX Gy(e.G.rows(), yi.size()), Gq(e.G.rows(), qi.size());
    MatX Gyd(e.G.rows(), yi.size()), Gqd(e.G.rows(), qi.size());
    for (std::size_t j = 0; j < yi.size(); ++j) {
        Gy.col(j) = e.G.col(yi[j]);
        Gyd.col(j) = e.Gdot.col(yi[j]);
    }
    for (std::size_t j = 0; j < qi.size(); ++j) {
        Gq.col(j) = e.G.col(qi[j]);
        Gqd.col(j) = e.Gdot.col(qi[j]);
    }
    const auto lu = Gy.partialPivLu();
    const MatX Hyd = lu.solve(Gyd * lu.solve(Gq) - Gqd);
    MatX Hd = MatX::Zero(c.n(), qi.size());
    for (std::size_t j = 0; j < yi.size(); ++j) Hd.row(yi[j]) = Hyd.row(j);
    return Hd;
}

void assemble_limb_H(int n_vars, const std::vector<int>& free_vars, const std::vector<CycleBlock>& blocks,
                     MatX& H, MatX& Hdot) {
    int delta = static_cast<int>(free_vars.size());
    for (const auto& b : blocks) delta += static_cast<int>(b.H.cols());
    H = MatX::Zero(n_vars, delta);
    Hdot = MatX::Zero(n_vars, delta);
    int col = 0;
    for (int v : free_vars) H(v, col++) = 1.0;
    for (const auto& b : blocks) {
        const auto& vars = b.cycle->vars;
        for (std::size_t i = 0; i < vars.size(); ++i) {
            H.block(vars[i], col, 1, b.H.cols()) = b.H.row(i);
            Hdot.block(vars[i], col, 1, b.H.cols()) = b.Hdot.row(i);
        }
        col += static_cast<int>(b.H.cols());
    }
}

}  // namespace pkm
