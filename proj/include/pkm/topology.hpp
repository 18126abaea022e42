#pragma once

#include <vector>

namespace pkm {

enum class JointKind { Revolute, Prismatic, Universal };

int joint_dof(JointKind kind);

/// A mechanical joint between two bodies. Body 0 is ground. For tree joints
/// `parent` is the body closer to ground. For cut joints the pair is (k, r).
struct JointSpec {
    int id = 0;
    int parent = 0;
    int child = 0;
    JointKind kind = JointKind::Revolute;
};

struct FundamentalCycle {
    int id = 0;          // lambda, 1-based
    int cut_joint = 0;
    std::vector<int> vars;  // sorted tree-variable indices of the cycle
    std::vector<int> y;     // dependent variables (subset of vars)
    std::vector<int> q;     // independent variables (subset of vars)

    int n() const { return static_cast<int>(vars.size()); }
    int m() const { return static_cast<int>(y.size()); }
    int delta() const { return static_cast<int>(q.size()); }
};

class LimbGraph {
public:
    int num_bodies() const { return n_bodies_; }  // excluding ground
    int num_vars() const { return n_vars_; }
    int num_cycles() const { return static_cast<int>(cuts_.size()); }
    int platform() const { return platform_; }

    const std::vector<JointSpec>& tree_joints() const { return tree_; }
    const std::vector<JointSpec>& cut_joints() const { return cuts_; }
    const JointSpec& joint(int id) const;

    /// First variable index of a tree joint.
    int var_offset(int joint_id) const;
    /// Predecessor variable of variable i, -1 when attached to ground.
    int var_parent(int i) const { return var_parent_[i]; }
    /// Tree joint owning variable i.
    int var_joint(int i) const { return var_joint_[i]; }
    /// Variable whose segment carries the body (last variable of its joint).
    int body_var(int body) const;

    /// Ordered ground-to-body body path (excluding ground, including body).
    std::vector<int> predecessor_set(int body) const;
    /// Tree joints on the path from ground to body, ground side first.
    std::vector<int> predecessor_joints(int body) const;
    /// Variables on the path from ground to body, ascending.
    std::vector<int> predecessor_vars(int body) const;
    /// True when variable j lies on the ground path of variable i (j == i included).
    bool var_precedes(int j, int i) const;

private:
    friend LimbGraph build_limb_graph(int, const std::vector<JointSpec>&, const std::vector<int>&, int);
    int n_bodies_ = 0;
    int n_vars_ = 0;
    int platform_ = -1;
    std::vector<JointSpec> tree_;
    std::vector<JointSpec> cuts_;
    std::vector<int> parent_joint_;  // per body (index 0 = ground, unused)
    std::vector<int> offsets_;       // per tree joint, parallel to tree_
    std::vector<int> var_parent_;
    std::vector<int> var_joint_;
};

/// Bodies are 1..n_bodies, ground is 0. Throws NotATree, NonCanonicalOrder,
/// DanglingBody.
LimbGraph build_limb_graph(int n_bodies, const std::vector<JointSpec>& joints,
                           const std::vector<int>& cut_joint_ids, int platform = -1);

/// One cycle per cut joint, in cut-joint order. Throws NotATree when two
/// cycles share a tree joint (the limb is not hybrid).
std::vector<FundamentalCycle> fundamental_cycles(const LimbGraph& g);

/// Fill y/q of a cycle from the chosen independent variables.
void partition_cycle(FundamentalCycle& c, const std::vector<int>& q);

}  // namespace pkm
