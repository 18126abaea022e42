#pragma once

#include <vector>

#include "pkm/solver.hpp"

namespace pkm {

/// Spatial inertia about the body frame origin, (angular; linear) ordering.
/// com is the centre of mass in body coordinates, Ic the inertia tensor about it.
Mat6 body_inertia(double mass, const Vec3& com, const Mat3& Ic);
double inertia_mass(const Mat6& M);
Vec3 inertia_com(const Mat6& M);
/// Inertia of the mirror image of a body (reflection x -> -x of frame and body).
Mat6 mirror_inertia(const Mat6& M);

struct TreeEomTerms {
    MatX M;       // nbar x nbar
    VecX c;       // Coriolis/centrifugal force vector C thd
    VecX Qgrav;   // gravity term on the left-hand side
    VecX Q;       // remaining generalized forces (zero by default)
};

/// Tree EOM over limb.dyn_vars. th, thd are full limb vectors.
TreeEomTerms tree_eom(const LimbModel& limb, const VecX& th, const VecX& thd, const Vec3& gravity);

struct ProjectedEom {
    MatX M;
    VecX c;
    VecX Qgrav;
    VecX Q;
};

/// Projection with Hbar (rows of H at dyn_vars): M = Hb^T Mb Hb, c = Hb^T (Mb Hbdot qd + cb).
ProjectedEom limb_eom_project(const TreeEomTerms& t, const MatX& Hbar, const MatX& Hbar_dot, const VecX& qd);

struct PlatformTerms {
    Vec6 inertial;  // M_p Vdot
    Vec6 gyro;      // -ad_V^T M_p V
    Vec6 gravity;   // -M_p (0; R^T g)
    Vec6 total() const { return inertial + gyro + gravity; }
};

PlatformTerms platform_newton_euler(const Mat6& Mp, const Vec6& Vp, const Vec6& Vp_dot, const Mat3& Rp,
                                    const Vec3& gravity);

struct LimbDynState {
    VecX th, thd;
    LimbJacobians jac;  // evaluated at (th, thd)
};

struct TaskEomTerms {
    MatX Mt;
    VecX CtVt;
    VecX Wgrav;
    VecX W;
    VecX WEE;
    MatX JIK;
};

TaskEomTerms task_space_eom(const PkmModel& pkm, const std::vector<LimbDynState>& limbs, const VecX& Vt,
                            const Mat3& Rp);

/// u = JIK^-T (Mt Vt_dot + Ct Vt + Wgrav + W - WEE). Throws SingularActuationJacobian.
VecX inverse_dynamics(const TaskEomTerms& t, const VecX& Vt_dot);

struct EnergyRates {
    double T = 0.0, V = 0.0;        // kinetic and potential energy
    double T_dot = 0.0, V_dot = 0.0;
};

/// Energies of the moving bodies of one limb (dyn_vars segments) from body twists and accelerations.
EnergyRates limb_energy(const LimbModel& limb, const VecX& th, const VecX& thd, const VecX& thdd, const Vec3& gravity);
EnergyRates platform_energy(const Mat6& Mp, const Pose& Cp, const Vec6& Vp, const Vec6& Vp_dot, const Vec3& gravity);

}  // namespace pkm
