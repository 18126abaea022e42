#include "pkm/kinematics.hpp"

#include <string>

#include "pkm/errors.hpp"

namespace pkm {

Vec6 TreeModel::X(int i) const { return adjoint_inverse(A[i]) * Y[i]; }

namespace {

void check_size(const TreeModel& m, const VecX& v, const char* what) {
    if (v.size() != m.n())
        throw Error(std::string(what) + " has length " + std::to_string(v.size()) + ", expected " +
                    std::to_string(m.n()));
}

}  // namespace

std::vector<Pose> all_poses(const TreeModel& m, const VecX& th) {
    check_size(m, th, "theta");
    const int n = m.n();
    std::vector<Pose> f(n), C(n);
    for (int i = 0; i < n; ++i) {
        const int p = m.graph.var_parent(i);
        const Pose e = exp_se3(m.Y[i], th[i]);
        f[i] = p < 0 ? e : f[p] * e;
        C[i] = f[i] * m.A[i];
    }
    return C;
}

Pose body_pose(const TreeModel& m, const VecX& th, int body) {
    if (body == 0) return Pose::identity();
    const int seg = m.graph.body_var(body);
    check_size(m, th, "theta");
    Pose f;
    for (int i : m.graph.predecessor_vars(body)) f = f * exp_se3(m.Y[i], th[i]);
    return f * m.A[seg];
}

SystemJacobian system_jacobian(const TreeModel& m, const VecX& th) {
    const int n = m.n();
    SystemJacobian sj;
    sj.C = all_poses(m, th);
    sj.A = MatX::Zero(6 * n, 6 * n);
    sj.X = MatX::Zero(6 * n, n);
    for (int i = 0; i < n; ++i) {
        sj.X.block<6, 1>(6 * i, i) = m.X(i);
        const Pose Ci_inv = sj.C[i].inverse();
        for (int j = i; j >= 0; j = m.graph.var_parent(j))
            sj.A.block<6, 6>(6 * i, 6 * j) = adjoint(Ci_inv * sj.C[j]);
    }
    sj.J = sj.A * sj.X;
    return sj;
}

MatX jacobian_dot(const TreeModel& m, const SystemJacobian& sj, const VecX& thd) {
    check_size(m, thd, "theta_dot");
    const int n = m.n();
    // a*J computed blockwise: block row i is thd_i ad_{X_i} J_i
    MatX aJ(6 * n, n);
    for (int i = 0; i < n; ++i)
        aJ.block(6 * i, 0, 6, n) = thd[i] * ad(m.X(i)) * sj.J.block(6 * i, 0, 6, n);
    return -sj.A * aJ;
}

MatX jacobian_dot(const TreeModel& m, const VecX& th, const VecX& thd) {
    return jacobian_dot(m, system_jacobian(m, th), thd);
}

MatX body_jacobian(const TreeModel& m, const SystemJacobian& sj, int body) {
    if (body == 0) return MatX::Zero(6, m.n());
    return sj.J.block(6 * m.graph.body_var(body), 0, 6, m.n());
}

MatX body_jacobian_dot(const TreeModel& m, const MatX& Jdot, int body) {
    if (body == 0) return MatX::Zero(6, m.n());
    return Jdot.block(6 * m.graph.body_var(body), 0, 6, m.n());
}

SystemMotion system_motion(const TreeModel& m, const VecX& th, const VecX& thd, const VecX& thdd) {
    check_size(m, thdd, "theta_ddot");
    const SystemJacobian sj = system_jacobian(m, th);
    SystemMotion out;
    out.V = sj.J * thd;
    out.Vdot = sj.J * thdd + jacobian_dot(m, sj, thd) * thd;
    return out;
}

}  // namespace pkm
