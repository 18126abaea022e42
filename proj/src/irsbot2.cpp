#include "pkm/irsbot2.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include "pkm/errors.hpp"

namespace pkm::irsbot2 {

using std::cos;
using std::sin;
using std::sqrt;

void IrsbotParams::derive() {
    b1 = b * cos(alpha);
    b3 = b * sin(alpha);
    e1 = b1 - c1;
    e3 = b3 + c3;
    u = a + c1 + d1 - P1 + L1 * sin(phi0);
    beta = std::atan2(d2 - P2, u);
    const double s = sqrt((d2 - P2) * (d2 - P2) + u * u) / L2;
    if (!(s < 1.0)) throw ModelError("distal rods of length L2 cannot reach the platform");
    psi0 = std::asin(s);
    h0 = c3 + d3 + P3 + L1 * cos(phi0) + L2 * cos(psi0);
}

IrsbotParams make_params(double a, double b, double L1, double L2, double alpha, double phi0) {
    if (a <= 0 || b <= 0 || L1 <= 0 || L2 <= 0) throw ModelError("lengths must be positive");
    IrsbotParams p;
    p.a = a;
    p.b = b;
    p.alpha = alpha;
    p.phi0 = phi0;
    p.L1 = L1;
    p.L2 = L2;
    const double b1 = b * cos(alpha), b3 = b * sin(alpha);
    p.c1 = b1 / 2;
    p.c3 = b3;
    p.d1 = b1 / 2;
    p.d2 = a;
    p.d3 = p.c3;
    p.P1 = a / 2;
    p.P2 = p.d2 / 2;
    p.P3 = 0.0;
    p.derive();
    return p;
}

IrsbotParams default_params() {
    return make_params(1.0 / 8, 1.0 / 12, 1.0 / 4, 1.0 / 2, std::numbers::pi / 6, std::numbers::pi / 4);
}

IrsbotParams experiment_params() {
    return make_params(1.0 / 4, 1.0 / 6, 1.0 / 2, 3.0 / 4, std::numbers::pi / 6, std::numbers::pi / 4);
}

double closed_form_r60_z() {
    const double s2 = sqrt(2.0), s3 = sqrt(3.0), s6 = sqrt(6.0);
    return -(4.0 + 6.0 * s2 + sqrt(6.0 * (37.0 - 6.0 * s2 - 2.0 * s3 - 4.0 * s6))) / 24.0;
}

std::vector<double> nominal_masses() { return {1.17188, 8.11899, 21.1875, 1.1781, 1.1781, 1.97754}; }

double primitive_volume(Shape s, const Vec3& dims) {
    switch (s) {
        case Shape::BeamSquare: return dims[0] * dims[1] * dims[1];
        case Shape::BeamCircular: return std::numbers::pi * dims[1] * dims[1] * dims[0];
        case Shape::Plate: return dims[0] * dims[1] * dims[2];
    }
    return 0.0;
}

namespace {

// Unit-mass inertia about the centre; beams along the local 3-axis.
Mat3 unit_inertia(Shape s, const Vec3& d) {
    Vec3 I;
    switch (s) {
        case Shape::BeamSquare: {
            const double t = d[0] * d[0] / 12 + d[1] * d[1] / 12;
            I << t, t, d[1] * d[1] / 6;
            break;
        }
        case Shape::BeamCircular: {
            const double t = d[0] * d[0] / 12 + d[1] * d[1] / 4;
            I << t, t, d[1] * d[1] / 2;
            break;
        }
        case Shape::Plate:
            I << (d[1] * d[1] + d[2] * d[2]) / 12, (d[0] * d[0] + d[2] * d[2]) / 12, (d[0] * d[0] + d[1] * d[1]) / 12;
            break;
    }
    return I.asDiagonal();
}

struct Geometry {
    std::vector<Vec3> y, e;  // per variable
    std::vector<Pose> A;     // per variable
    Vec3 y7;
    double xU, zU, z6;
};

Geometry limb1_geometry(const IrsbotParams& p) {
    Geometry g;
    const double sp = sin(p.phi0), cp = cos(p.phi0);
    const double sb = sin(p.beta), cb = cos(p.beta), ss = sin(p.psi0), cs = cos(p.psi0);
    g.xU = p.a + p.c1 + p.d1 + p.L1 * sp;
    g.zU = -p.c3 - p.d3 - p.L1 * cp;
    g.z6 = -p.c3 - p.d3 - p.P3 - p.L1 * cp - p.L2 * cs;
    g.y7 = Vec3(p.a + p.b1 + p.L1 * sp, 0, p.b3 - p.L1 * cp);

    const Vec3 ey(0, 1, 0);
    const Vec3 e41(sb, cb, 0), e42(cb * cs, -sb * cs, -ss);
    const Vec3 e51(-sb, cb, 0), e52(cb * cs, sb * cs, -ss);
    const Vec3 y1(p.a, 0, 0), y2(p.a + p.L1 * sp, 0, -p.L1 * cp), y3(p.a + p.b1, 0, p.b3);
    const Vec3 y4(g.xU, -p.d2, g.zU), y5(g.xU, p.d2, g.zU), y6(p.P1, -p.P2, g.z6);
    g.y = {y1, y2, y3, y4, y4, y5, y5, y6, y6};
    g.e = {ey, ey, ey, e41, e42, e51, e52, e42, e41};

    const Pose A1{rot_y(-p.phi0), Vec3(p.a + p.L1 / 2 * sp, 0, -p.L1 / 2 * cp)};
    const Pose A2{Mat3::Identity(), Vec3(p.a + p.b1 + p.L1 / 2 * sp, 0, p.b3 - p.L1 / 2 * cp)};
    const Pose A3{rot_y(-p.phi0), Vec3(p.a + p.c1 + p.L1 * sp, 0, p.b3 - p.L1 / 2 * cp)};
    const double zr = g.zU - p.L2 / 2 * cs;
    const Pose A4{rot_z(-p.beta) * rot_y(p.psi0), Vec3((g.xU + p.P1) / 2, -(p.P2 + p.d2) / 2, zr)};
    const Pose A5{rot_z(p.beta) * rot_y(p.psi0), Vec3((g.xU + p.P1) / 2, (p.P2 + p.d2) / 2, zr)};
    const Pose A6{Mat3::Identity(), Vec3(0, 0, g.z6)};
    g.A = {A1, A2, A3, A4, A4, A5, A5, A6, A6};
    return g;
}

const Mat3 kMirror = Vec3(-1, 1, 1).asDiagonal();

// Primitive centres in world coordinates (limb 1, reference configuration).
std::vector<Vec3> primitive_centres(const IrsbotParams& p, const Geometry& g) {
    const double sp = sin(p.phi0), cp = cos(p.phi0);
    return {
        Vec3(p.a + p.L1 / 2 * sp, 0, -p.L1 / 2 * cp),
        Vec3(p.a + p.L1 * sp + (p.c1 + p.d1) / 2, 0, -p.L1 * cp + (p.b3 - p.c3 - p.d3) / 2),
        Vec3(p.a + p.b1 + p.L1 / 2 * sp, 0, p.b3 - p.L1 / 2 * cp),
        g.A[4].r,
        g.A[6].r,
        g.A[8].r,
    };
}

constexpr int kBodyVar[6] = {0, 1, 2, 4, 6, 8};

}  // namespace

double MassModel::total_moving_mass() const {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < bodies.size(); ++i) m += 2.0 * bodies[i].mass;
    if (!bodies.empty()) m += bodies.back().mass;
    return m;
}

MassModel default_mass_model(const IrsbotParams& p) {
    const Geometry g = limb1_geometry(p);
    const auto centres = primitive_centres(p, g);
    const auto masses = nominal_masses();
    MassModel mm;
    const Shape shapes[6] = {Shape::BeamSquare, Shape::Plate, Shape::BeamSquare,
                             Shape::BeamCircular, Shape::BeamCircular, Shape::Plate};
    const Vec3 dims[6] = {
        Vec3(p.L1, p.L1 / 6, 0),
        Vec3(2 * (p.c1 + p.d1), 2 * p.d2, p.c3 + p.d3),
        Vec3(p.L1, p.L1 / 10, 0),
        Vec3(p.L2, p.L2 / 30, 0),
        Vec3(p.L2, p.L2 / 30, 0),
        Vec3(4 * p.P1, 3 * p.P2, p.P2 / 4),
    };
    for (int i = 0; i < 6; ++i) {
        BodyPrimitive b;
        b.body = i + 1;
        b.shape = shapes[i];
        b.dims = dims[i];
        b.primitive_mass = primitive_volume(b.shape, b.dims) * b.density;
        b.mass = masses[i];
        const Pose& A = g.A[kBodyVar[i]];
        b.com = A.R.transpose() * (centres[i] - A.r);
        b.Ic = b.mass * unit_inertia(b.shape, b.dims);
        b.M = body_inertia(b.mass, b.com, b.Ic);
        mm.bodies.push_back(b);
    }
    return mm;
}

LimbModel build_limb(const IrsbotParams& p, bool mirrored, const BuildOptions& o) {
    Geometry g = limb1_geometry(p);
    const Mat3 Mi = mirrored ? kMirror : Mat3::Identity();
    const double es = mirrored ? -1.0 : 1.0;

    const std::vector<JointSpec> joints = {
        {1, 0, 1, JointKind::Revolute},  {2, 1, 2, JointKind::Revolute},  {3, 0, 3, JointKind::Revolute},
        {4, 2, 4, JointKind::Universal}, {5, 2, 5, JointKind::Universal}, {6, 4, 6, JointKind::Universal},
        {7, 2, 3, JointKind::Revolute},  {8, 6, 5, JointKind::Universal},
    };
    LimbModel limb;
    limb.tree.graph = build_limb_graph(6, joints, {7, 8}, 6);
    for (int i = 0; i < 9; ++i) {
        const Vec3 y = Mi * g.y[i];
        const Vec3 e = es * (Mi * g.e[i]);
        limb.tree.Y.push_back(revolute_screw(e, y));
        limb.tree.A.push_back(Pose{Mi * g.A[i].R * Mi, Mi * g.A[i].r});
    }
    const auto& A = limb.tree.A;
    limb.platform = 6;

    auto cycles = fundamental_cycles(limb.tree.graph);
    if (cycles.size() != 2) throw ModelError("IRSBot-2 limb must have two fundamental cycles");

    // proximal loop, cut joint 7: planar closure of the parallelogram
    {
        CycleModel cm;
        cm.cycle = cycles[0];
        partition_cycle(cm.cycle, {0});
        const Vec3 y7 = Mi * g.y7;
        CutJointSpec cut;
        cut.cycle = 1;
        cut.k = 2;
        cut.r = 3;
        cut.dk = A[1].R.transpose() * (y7 - A[1].r);
        cut.dr = A[2].R.transpose() * (y7 - A[2].r);
        cut.locks = {Mi * Vec3::UnitX(), Vec3::UnitZ()};
        cm.cut = cut;
        cm.analytic = o.mode == ProximalMode::Analytic;
        cm.H_const = Vec3(1, -1, 1);
        limb.cycles.push_back(cm);
    }
    // distal loop, universal cut joint 8 between platform (k = 6) and rod 5 (r)
    {
        CycleModel cm;
        cm.cycle = cycles[1];
        partition_cycle(cm.cycle, {7, 8});
        const Vec3 dk = Mi * (Vec3(p.P1, p.P2, p.P3) + o.distal_anchor_offset);
        const Vec3 dr = Mi * Vec3(0, 0, -p.L2 / 2);
        const Vec3 uk = Mi * Vec3(-sin(p.beta), cos(p.beta), 0);
        const Vec3 ur = Mi * Vec3::UnitX();
        cm.cut = universal_cut(2, 6, 5, dk, dr, ur, uk);
        limb.cycles.push_back(cm);
    }

    limb.Pt = MatX::Zero(3, 6);
    limb.Pt.rightCols(3) = Mat3::Identity();
    limb.Dt = MatX::Zero(3, 2);
    limb.Dt(0, 0) = 1.0;
    limb.Dt(2, 1) = 1.0;

    std::vector<double> masses = o.masses.empty() ? nominal_masses() : o.masses;
    if (masses.size() != 6) throw ModelError("mass list must have 6 entries");
    MassModel mm = default_mass_model(p);
    limb.inertia.assign(9, Mat6::Zero());
    for (int b = 0; b < 5; ++b) {
        auto& pr = mm.bodies[b];
        const Mat3 Ic = pr.Ic * (masses[b] / pr.mass);
        Mat6 M = body_inertia(masses[b], pr.com, Ic);
        limb.inertia[kBodyVar[b]] = mirrored ? mirror_inertia(M) : M;
    }
    limb.dyn_vars = {0, 1, 2, 3, 4, 5, 6};
    return limb;
}

PkmModel build_model(const IrsbotParams& p, const BuildOptions& o) {
    PkmModel pkm;
    pkm.limbs.push_back(build_limb(p, false, o));
    pkm.limbs.push_back(build_limb(p, true, o));
    pkm.actuated_q = {0, 0};
    pkm.Pp = MatX::Zero(6, 2);
    pkm.Pp(3, 0) = 1.0;
    pkm.Pp(5, 1) = 1.0;
    pkm.gravity = o.gravity;
    const std::vector<double> masses = o.masses.empty() ? nominal_masses() : o.masses;
    const BodyPrimitive& plat = default_mass_model(p).bodies[5];
    pkm.platform_inertia = body_inertia(masses[5], plat.com, plat.Ic * (masses[5] / plat.mass));
    return pkm;
}

Pose reference_platform_pose(const IrsbotParams& p) { return limb1_geometry(p).A[8]; }

int TrajectorySpec::num_samples() const { return static_cast<int>(std::llround(T / dt)) + 1; }

double TrajectorySpec::time(int k) const { return k * dt; }

TrajectorySample trajectory(const TrajectorySpec& spec, double t) {
    const double w = spec.nu * std::numbers::pi / spec.T;
    const double sn = sin(w * t);
    const double s = sn * sn;
    const double sd = w * sin(2 * w * t);
    const double sdd = 2 * w * w * cos(2 * w * t);
    TrajectorySample o;
    o.r = spec.r0 + Vec3(spec.dx * s, 0, 4 * spec.dz * s * (1 - s));
    o.rd = Vec3(spec.dx * sd, 0, 4 * spec.dz * (1 - 2 * s) * sd);
    o.rdd = Vec3(spec.dx * sdd, 0, 4 * spec.dz * ((1 - 2 * s) * sdd - 2 * sd * sd));
    o.C = Pose{Mat3::Identity(), o.r};
    o.Vt = VecX(2);
    o.Vt << o.rd[0], o.rd[2];
    o.Vt_dot = VecX(2);
    o.Vt_dot << o.rdd[0], o.rdd[2];
    return o;
}

TrajectorySpec nominal_spec(const IrsbotParams& p, double dt) {
    TrajectorySpec s;
    s.r0 = reference_platform_pose(p).r;
    s.dt = dt;
    return s;
}

TrajectorySpec singularity_spec(const IrsbotParams& p, double dt) {
    TrajectorySpec s = nominal_spec(p, dt);
    s.dx = -0.15;
    s.dz = -0.6085;
    return s;
}

ExperimentKind parse_experiment(const std::string& s) {
    if (s == "ik_nested") return ExperimentKind::IkNested;
    if (s == "ik_compound") return ExperimentKind::IkCompound;
    if (s == "invdyn") return ExperimentKind::InvDyn;
    if (s == "singularity") return ExperimentKind::Singularity;
    throw ConfigError("unknown experiment '" + s + "'");
}

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::IkNested: return "ik_nested";
        case ExperimentKind::IkCompound: return "ik_compound";
        case ExperimentKind::InvDyn: return "invdyn";
        case ExperimentKind::Singularity: return "singularity";
    }
    return "?";
}

MachineState solve_state(const PkmModel& pkm, const std::vector<VecX>& th0, const TrajectorySample& sample,
                         const IkSettings& s, bool compound) {
    MachineState st;
    st.sample = sample;
    for (std::size_t l = 0; l < pkm.limbs.size(); ++l) {
        const LimbModel& limb = pkm.limbs[l];
        IkResult r = compound ? solve_limb_ik_compound(limb, th0[l], sample.C, s)
                              : solve_limb_ik(limb, th0[l], sample.C, s);
        TreeRates tr = tree_rates_from_task(limb, r.th, sample.Vt, sample.Vt_dot);
        st.th.push_back(r.th);
        st.thd.push_back(tr.thd);
        st.thdd.push_back(tr.thdd);
        st.jac.push_back(tr.jac);
        st.ik.push_back(std::move(r));
    }
    return st;
}

VecX actuator_torques(const PkmModel& pkm, const MachineState& st) {
    std::vector<LimbDynState> ds;
    for (std::size_t l = 0; l < pkm.limbs.size(); ++l) ds.push_back({st.th[l], st.thd[l], st.jac[l]});
    const TaskEomTerms t = task_space_eom(pkm, ds, st.sample.Vt, st.sample.C.R);
    return inverse_dynamics(t, st.sample.Vt_dot);
}

namespace {

LimbStep limb_step(const LimbModel& limb, const MachineState& st, std::size_t l) {
    LimbStep o;
    o.th = st.th[l];
    o.thd = st.thd[l];
    o.thdd = st.thdd[l];
    const IkResult& r = st.ik[l];
    o.outer = r.outer_iterations;
    for (int n : r.inner_iterations_per_outer) o.inner_max = std::max(o.inner_max, n);
    o.inner_total = r.inner_iterations_total;
    o.err_x = r.err_x;
    o.err_g = r.err_g;
    Eigen::JacobiSVD<MatX> svd(st.jac[l].F);
    const VecX sv = svd.singularValues();
    o.cond_sqrt_kappa = sv[0] / sv[sv.size() - 1];

    const KinematicState ks = kinematic_state(limb.tree, o.th, o.thd);
    const LimbConstraintState cs = limb_constraints(limb, ks);
    for (std::size_t ci = 0; ci < limb.cycles.size(); ++ci) {
        const auto& c = limb.cycles[ci].cycle;
        VecX v(c.n()), a(c.n());
        for (int j = 0; j < c.n(); ++j) {
            v[j] = o.thd[c.vars[j]];
            a[j] = o.thdd[c.vars[j]];
        }
        const auto& e = cs.evals[ci];
        o.vel_residual = std::max(o.vel_residual, (e.G * v).norm());
        o.acc_residual = std::max(o.acc_residual, (e.G * a + e.bias).norm());
    }
    o.pos_residual = max_residual(limb, o.th);
    return o;
}

}  // namespace

ExperimentReport run_experiment(const PkmModel& pkm, ExperimentKind kind, const TrajectorySpec& spec,
                                const ExperimentSettings& s, StepFailure* failure) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport rep;
    rep.kind = kind;
    rep.spec = spec;
    const bool compound = s.compound || kind == ExperimentKind::IkCompound;
    const bool dyn = s.dynamics || kind == ExperimentKind::InvDyn;
    std::vector<VecX> th(pkm.limbs.size());
    for (std::size_t l = 0; l < th.size(); ++l) th[l] = VecX::Zero(pkm.limbs[l].n());
    const int N = spec.num_samples();
    for (int k = 0; k < N; ++k) {
        const double t = spec.time(k);
        try {
            const TrajectorySample sample = trajectory(spec, t);
            const MachineState st = solve_state(pkm, th, sample, s.ik, compound);
            StepRecord rec;
            rec.t = t;
            for (std::size_t l = 0; l < pkm.limbs.size(); ++l) rec.limbs.push_back(limb_step(pkm.limbs[l], st, l));
            if (dyn) {
                rec.has_dynamics = true;
                rec.u = actuator_torques(pkm, st);
                EnergyRates e;
                for (std::size_t l = 0; l < pkm.limbs.size(); ++l) {
                    const EnergyRates el = limb_energy(pkm.limbs[l], st.th[l], st.thd[l], st.thdd[l], pkm.gravity);
                    e.T += el.T;
                    e.V += el.V;
                    e.T_dot += el.T_dot;
                    e.V_dot += el.V_dot;
                    rec.actuator_power += rec.u[l] * st.thd[l][pkm.limbs[l].q_vars()[pkm.actuated_q[l]]];
                }
                const EnergyRates ep = platform_energy(pkm.platform_inertia, sample.C, pkm.Pp * sample.Vt,
                                                       pkm.Pp * sample.Vt_dot, pkm.gravity);
                rec.kinetic_energy = e.T + ep.T;
                rec.potential_energy = e.V + ep.V;
                rec.energy_rate = e.T_dot + e.V_dot + ep.T_dot + ep.V_dot;
                rec.power_residual = rec.actuator_power - rec.energy_rate;
            }
            th = st.th;
            rep.steps.push_back(std::move(rec));
        } catch (const Error& e) {
            if (failure) *failure = {k, t, e.what()};
            throw;
        }
    }
    rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace pkm::irsbot2
