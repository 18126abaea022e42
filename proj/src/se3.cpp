#include "pkm/se3.hpp"

#include <cmath>
#include <stdexcept>

namespace pkm {

Mat4 Pose::matrix() const {
    Mat4 T = Mat4::Identity();
    T.topLeftCorner<3, 3>() = R;
    T.topRightCorner<3, 1>() = r;
    return T;
}

Pose Pose::inverse() const {
    Pose inv;
    inv.R = R.transpose();
    inv.r = -(inv.R * r);
    return inv;
}

Pose Pose::operator*(const Pose& other) const {
    Pose out;
    out.R = R * other.R;
    out.r = R * other.r + r;
    return out;
}

Mat3 skew(const Vec3& x) {
    Mat3 S;
    S << 0.0, -x.z(), x.y(),
         x.z(), 0.0, -x.x(),
         -x.y(), x.x(), 0.0;
    return S;
}

Mat4 hat(const Vec6& X) {
    Mat4 A = Mat4::Zero();
    A.topLeftCorner<3, 3>() = skew(X.head<3>());
    A.topRightCorner<3, 1>() = X.tail<3>();
    return A;
}

Vec6 vee(const Mat4& A) {
    constexpr double tol = 1e-12;
    const Mat3 W = A.topLeftCorner<3, 3>();
    if ((W + W.transpose()).cwiseAbs().maxCoeff() > tol || A.row(3).cwiseAbs().maxCoeff() > tol)
        throw std::invalid_argument("vee: matrix is not in se(3)");
    Vec6 X;
    X << W(2, 1), W(0, 2), W(1, 0), A(0, 3), A(1, 3), A(2, 3);
    return X;
}

Pose exp_se3(const Vec6& X, double theta) {
    const Vec3 w = X.head<3>();
    const Vec3 v = X.tail<3>();
    const double n = w.norm();
    Pose C;
    if (n == 0.0) {
        C.r = v * theta;
        return C;
    }
    const Mat3 W = skew(w);
    const Mat3 W2 = W * W;
    const double phi = theta * n;
    if (std::abs(phi) < 1e-6) {
        // truncated series; remainder is far below machine precision here
        const double t2 = theta * theta, t3 = t2 * theta, t4 = t3 * theta;
        C.R = Mat3::Identity() + theta * W + (t2 / 2.0) * W2 + (t3 / 6.0) * W2 * W;
        C.r = (theta * Mat3::Identity() + (t2 / 2.0) * W + (t3 / 6.0) * W2 + (t4 / 24.0) * W2 * W) * v;
        return C;
    }
    const double s = std::sin(phi), c = std::cos(phi);
    C.R = Mat3::Identity() + (s / n) * W + ((1.0 - c) / (n * n)) * W2;
    C.r = (theta * Mat3::Identity() + ((1.0 - c) / (n * n)) * W + ((phi - s) / (n * n * n)) * W2) * v;
    return C;
}

Mat6 adjoint(const Pose& C) {
    Mat6 A = Mat6::Zero();
    A.topLeftCorner<3, 3>() = C.R;
    A.bottomRightCorner<3, 3>() = C.R;
    A.bottomLeftCorner<3, 3>() = skew(C.r) * C.R;
    return A;
}

Mat6 adjoint_inverse(const Pose& C) {
    Mat6 A = Mat6::Zero();
    const Mat3 Rt = C.R.transpose();
    A.topLeftCorner<3, 3>() = Rt;
    A.bottomRightCorner<3, 3>() = Rt;
    A.bottomLeftCorner<3, 3>() = -Rt * skew(C.r);
    return A;
}

Mat6 ad(const Vec6& X) {
    Mat6 A = Mat6::Zero();
    const Mat3 xi = skew(X.head<3>());
    A.topLeftCorner<3, 3>() = xi;
    A.bottomRightCorner<3, 3>() = xi;
    A.bottomLeftCorner<3, 3>() = skew(X.tail<3>());
    return A;
}

double twist_norm(const Vec6& X, const MetricWeights& w) {
    return w.alpha * X.head<3>().norm() + w.beta * X.tail<3>().norm();
}

Pose pose_inverse(const Pose& C) { return C.inverse(); }

Pose pose_compose(const Pose& C1, const Pose& C2) { return C1 * C2; }

Mat3 rot_x(double a) {
    Mat3 R;
    const double c = std::cos(a), s = std::sin(a);
    R << 1, 0, 0, 0, c, -s, 0, s, c;
    return R;
}

Mat3 rot_y(double a) {
    Mat3 R;
    const double c = std::cos(a), s = std::sin(a);
    R << c, 0, s, 0, 1, 0, -s, 0, c;
    return R;
}

Mat3 rot_z(double a) {
    Mat3 R;
    const double c = std::cos(a), s = std::sin(a);
    R << c, -s, 0, s, c, 0, 0, 0, 1;
    return R;
}

Vec6 revolute_screw(const Vec3& e, const Vec3& y) {
    Vec6 X;
    X << e, y.cross(e);
    return X;
}

Vec6 prismatic_screw(const Vec3& e) {
    Vec6 X;
    X << Vec3::Zero(), e;
    return X;
}

}  // namespace pkm
