#pragma once

#include <Eigen/Dense>

namespace pkm {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Rigid transform. Twists and wrenches are ordered (angular; linear).
struct Pose {
    Mat3 R = Mat3::Identity();
    Vec3 r = Vec3::Zero();

    static Pose identity() { return {}; }
    Mat4 matrix() const;
    Pose inverse() const;
    Pose operator*(const Pose& other) const;
};

struct MetricWeights {
    double alpha = 1.0;
    double beta = 1.0;
};

Mat3 skew(const Vec3& x);

Mat4 hat(const Vec6& X);
/// Throws std::invalid_argument if A is not an se(3) matrix (tol 1e-12).
Vec6 vee(const Mat4& A);

/// exp(theta * hat(X)).
Pose exp_se3(const Vec6& X, double theta);

Mat6 adjoint(const Pose& C);
Mat6 adjoint_inverse(const Pose& C);
Mat6 ad(const Vec6& X);

double twist_norm(const Vec6& X, const MetricWeights& w = {});

Pose pose_inverse(const Pose& C);
Pose pose_compose(const Pose& C1, const Pose& C2);

Mat3 rot_x(double a);
Mat3 rot_y(double a);
Mat3 rot_z(double a);

/// Screw coordinates of a revolute joint with unit axis e through point y.
Vec6 revolute_screw(const Vec3& e, const Vec3& y);
Vec6 prismatic_screw(const Vec3& e);

}  // namespace pkm
