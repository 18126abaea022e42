#include "pkm/dynamics.hpp"

#include "pkm/errors.hpp"

namespace pkm {

Mat6 body_inertia(double mass, const Vec3& com, const Mat3& Ic) {
    const Mat3 c = skew(com);
    Mat6 M = Mat6::Zero();
    M.topLeftCorner<3, 3>() = Ic - mass * c * c;
    M.topRightCorner<3, 3>() = mass * c;
    M.bottomLeftCorner<3, 3>() = -mass * c;
    M.bottomRightCorner<3, 3>() = mass * Mat3::Identity();
    return M;
}

double inertia_mass(const Mat6& M) { return M(3, 3); }

Vec3 inertia_com(const Mat6& M) {
    const double m = inertia_mass(M);
    if (m == 0.0) return Vec3::Zero();
    const Mat3 mc = M.topRightCorner<3, 3>();
    return Vec3(mc(2, 1), mc(0, 2), mc(1, 0)) / m;
}

Mat6 mirror_inertia(const Mat6& M) {
    Vec6 t;
    t << 1, -1, -1, -1, 1, 1;
    return t.asDiagonal() * M * t.asDiagonal();
}

TreeEomTerms tree_eom(const LimbModel& limb, const VecX& th, const VecX& thd, const Vec3& gravity) {
    const auto& m = limb.tree;
    const SystemJacobian sj = system_jacobian(m, th);
    const MatX Jdot = jacobian_dot(m, sj, thd);
    const VecX Jdot_thd = Jdot * thd;
    const int nb = static_cast<int>(limb.dyn_vars.size());

    TreeEomTerms t;
    t.M = MatX::Zero(nb, nb);
    t.c = VecX::Zero(nb);
    t.Qgrav = VecX::Zero(nb);
    t.Q = VecX::Zero(nb);
    Vec6 g0;
    g0 << Vec3::Zero(), gravity;
    for (int i : limb.dyn_vars) {
        const Mat6& Mi = limb.inertia[i];
        if (Mi.isZero(0.0)) continue;
        MatX Ji(6, nb);
        for (int c = 0; c < nb; ++c) Ji.col(c) = sj.J.block<6, 1>(6 * i, limb.dyn_vars[c]);
        const Vec6 V = sj.J.block(6 * i, 0, 6, m.n()) * thd;
        const Vec6 b = ad(V).transpose() * Mi * V;
        const Vec6 gi = adjoint_inverse(sj.C[i]) * g0;
        t.M += Ji.transpose() * Mi * Ji;
        t.c += Ji.transpose() * (Mi * Jdot_thd.segment<6>(6 * i) - b);
        t.Qgrav -= Ji.transpose() * Mi * gi;
    }
    return t;
}

ProjectedEom limb_eom_project(const TreeEomTerms& t, const MatX& Hbar, const MatX& Hbar_dot, const VecX& qd) {
    if (Hbar.rows() != t.M.rows() || Hbar_dot.rows() != t.M.rows() || Hbar.cols() != qd.size())
        throw Error("limb_eom_project: dimension mismatch");
    ProjectedEom p;
    p.M = Hbar.transpose() * t.M * Hbar;
    p.c = Hbar.transpose() * (t.M * (Hbar_dot * qd) + t.c);
    p.Qgrav = Hbar.transpose() * t.Qgrav;
    p.Q = Hbar.transpose() * t.Q;
    return p;
}

PlatformTerms platform_newton_euler(const Mat6& Mp, const Vec6& Vp, const Vec6& Vp_dot, const Mat3& Rp,
                                    const Vec3& gravity) {
    PlatformTerms p;
    p.inertial = Mp * Vp_dot;
    p.gyro = -ad(Vp).transpose() * Mp * Vp;
    Vec6 g;
    g << Vec3::Zero(), Rp.transpose() * gravity;
    p.gravity = -Mp * g;
    return p;
}

TaskEomTerms task_space_eom(const PkmModel& pkm, const std::vector<LimbDynState>& limbs, const VecX& Vt,
                            const Mat3& Rp) {
    const int dp = pkm.delta_p();
    TaskEomTerms t;
    t.Mt = MatX::Zero(dp, dp);
    t.CtVt = VecX::Zero(dp);
    t.Wgrav = VecX::Zero(dp);
    t.W = VecX::Zero(dp);
    t.WEE = VecX::Zero(dp);
    std::vector<LimbJacobians> jacs;
    for (std::size_t l = 0; l < pkm.limbs.size(); ++l) {
        const LimbModel& limb = pkm.limbs[l];
        const LimbDynState& s = limbs[l];
        const auto& j = s.jac;
        const int nb = static_cast<int>(limb.dyn_vars.size());
        MatX Hb(nb, j.H.cols()), Hbd(nb, j.H.cols());
        for (int r = 0; r < nb; ++r) {
            Hb.row(r) = j.H.row(limb.dyn_vars[r]);
            Hbd.row(r) = j.Hdot.row(limb.dyn_vars[r]);
        }
        const VecX qd = j.F * Vt;
        const TreeEomTerms te = tree_eom(limb, s.th, s.thd, pkm.gravity);
        const ProjectedEom pe = limb_eom_project(te, Hb, Hbd, qd);
        const VecX Fdot_Vt = -j.Lt_inv * (j.Lt_dot * qd);
        t.Mt += j.F.transpose() * pe.M * j.F;
        t.CtVt += j.F.transpose() * (pe.c + pe.M * Fdot_Vt);
        t.Wgrav += j.F.transpose() * pe.Qgrav;
        t.W += j.F.transpose() * pe.Q;
        jacs.push_back(j);
    }
    const Vec6 Vp = pkm.Pp * Vt;
    const PlatformTerms pt = platform_newton_euler(pkm.platform_inertia, Vp, Vec6::Zero(), Rp, pkm.gravity);
    t.Mt += pkm.Pp.transpose() * pkm.platform_inertia * pkm.Pp;
    t.CtVt += pkm.Pp.transpose() * pt.gyro;
    t.Wgrav += pkm.Pp.transpose() * pt.gravity;
    t.JIK = ik_jacobian(pkm, jacs);
    return t;
}

VecX inverse_dynamics(const TaskEomTerms& t, const VecX& Vt_dot) {
    if (t.JIK.rows() != t.JIK.cols()) throw SingularActuationJacobian("J_IK is not square");
    Eigen::JacobiSVD<MatX> svd(t.JIK);
    const VecX s = svd.singularValues();
    if (s.size() == 0 || !(s[s.size() - 1] > 1e-12 * s[0]))
        throw SingularActuationJacobian("J_IK is singular");
    const VecX rhs = t.Mt * Vt_dot + t.CtVt + t.Wgrav + t.W - t.WEE;
    return t.JIK.transpose().partialPivLu().solve(rhs);
}

namespace {

void add_body_energy(EnergyRates& e, const Mat6& M, const Pose& C, const Vec6& V, const Vec6& Vd, const Vec3& g) {
    const double m = inertia_mass(M);
    if (m == 0.0) return;
    const Vec3 c = inertia_com(M);
    e.T += 0.5 * V.dot(M * V);
    e.T_dot += V.dot(M * Vd);
    e.V -= m * g.dot(C.r + C.R * c);
    const Vec3 v_com = C.R * (V.tail<3>() + V.head<3>().cross(c));
    e.V_dot -= m * g.dot(v_com);
}

}  // namespace

EnergyRates limb_energy(const LimbModel& limb, const VecX& th, const VecX& thd, const VecX& thdd, const Vec3& gravity) {
    const SystemMotion sm = system_motion(limb.tree, th, thd, thdd);
    const auto C = all_poses(limb.tree, th);
    EnergyRates e;
    for (int i : limb.dyn_vars)
        add_body_energy(e, limb.inertia[i], C[i], sm.V.segment<6>(6 * i), sm.Vdot.segment<6>(6 * i), gravity);
    return e;
}

EnergyRates platform_energy(const Mat6& Mp, const Pose& Cp, const Vec6& Vp, const Vec6& Vp_dot, const Vec3& gravity) {
    EnergyRates e;
    add_body_energy(e, Mp, Cp, Vp, Vp_dot, gravity);
    return e;
}

}  // namespace pkm
