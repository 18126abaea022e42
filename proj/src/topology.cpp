#include "pkm/topology.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "pkm/errors.hpp"

namespace pkm {

int joint_dof(JointKind kind) { return kind == JointKind::Universal ? 2 : 1; }

const JointSpec& LimbGraph::joint(int id) const {
    for (const auto& j : tree_)
        if (j.id == id) return j;
    for (const auto& j : cuts_)
        if (j.id == id) return j;
    throw Error("unknown joint " + std::to_string(id));
}

int LimbGraph::var_offset(int joint_id) const {
    for (std::size_t i = 0; i < tree_.size(); ++i)
        if (tree_[i].id == joint_id) return offsets_[i];
    throw Error("joint " + std::to_string(joint_id) + " is not a tree joint");
}

int LimbGraph::body_var(int body) const {
    if (body < 1 || body > n_bodies_) throw UnknownBody("unknown body " + std::to_string(body));
    const int jid = parent_joint_[body];
    const auto& j = joint(jid);
    return var_offset(jid) + joint_dof(j.kind) - 1;
}

std::vector<int> LimbGraph::predecessor_set(int body) const {
    if (body == 0) return {};
    if (body < 0 || body > n_bodies_) throw UnknownBody("unknown body " + std::to_string(body));
    std::vector<int> path;
    for (int b = body; b != 0; b = joint(parent_joint_[b]).parent) path.push_back(b);
    std::reverse(path.begin(), path.end());
    return path;
}

std::vector<int> LimbGraph::predecessor_joints(int body) const {
    std::vector<int> out;
    for (int b : predecessor_set(body)) out.push_back(parent_joint_[b]);
    return out;
}

std::vector<int> LimbGraph::predecessor_vars(int body) const {
    std::vector<int> out;
    if (body == 0) return out;
    for (int i = body_var(body); i >= 0; i = var_parent_[i]) out.push_back(i);
    std::reverse(out.begin(), out.end());
    return out;
}

bool LimbGraph::var_precedes(int j, int i) const {
    for (int k = i; k >= 0; k = var_parent_[k])
        if (k == j) return true;
    return false;
}

LimbGraph build_limb_graph(int n_bodies, const std::vector<JointSpec>& joints,
                           const std::vector<int>& cut_joint_ids, int platform) {
    LimbGraph g;
    g.n_bodies_ = n_bodies;
    g.platform_ = platform;
    std::set<int> cut_set(cut_joint_ids.begin(), cut_joint_ids.end());
    std::set<int> ids;
    for (const auto& j : joints) {
        if (!ids.insert(j.id).second) throw NotATree("duplicate joint id " + std::to_string(j.id));
        if (j.parent < 0 || j.parent > n_bodies || j.child < 0 || j.child > n_bodies)
            throw DanglingBody("joint " + std::to_string(j.id) + " references a missing body");
        if (j.parent == j.child) throw NotATree("joint " + std::to_string(j.id) + " is a self loop");
        (cut_set.count(j.id) ? g.cuts_ : g.tree_).push_back(j);
    }
    for (int c : cut_joint_ids)
        if (!ids.count(c)) throw NotATree("cut joint " + std::to_string(c) + " does not exist");
    std::sort(g.tree_.begin(), g.tree_.end(), [](auto& a, auto& b) { return a.id < b.id; });

    // every body needs exactly one incoming tree joint
    g.parent_joint_.assign(n_bodies + 1, -1);
    for (const auto& j : g.tree_) {
        if (j.child == 0) throw NotATree("tree joint " + std::to_string(j.id) + " points into ground");
        if (g.parent_joint_[j.child] != -1)
            throw NotATree("body " + std::to_string(j.child) + " has two tree joints; cut set leaves a loop");
        g.parent_joint_[j.child] = j.id;
    }
    for (int b = 1; b <= n_bodies; ++b)
        if (g.parent_joint_[b] == -1) throw DanglingBody("body " + std::to_string(b) + " is not connected by a tree joint");
    if (static_cast<int>(joints.size()) - n_bodies != static_cast<int>(cut_joint_ids.size()))
        throw NotATree("cut set size does not match the number of independent loops");

    // reachability of ground and canonical order
    for (const auto& j : g.tree_) {
        if (j.parent != 0 && g.parent_joint_[j.parent] >= j.id)
            throw NonCanonicalOrder("joint " + std::to_string(j.id) + " precedes its predecessor joint " +
                                    std::to_string(g.parent_joint_[j.parent]));
    }
    for (int b = 1; b <= n_bodies; ++b) {
        int steps = 0;
        for (int c = b; c != 0; c = g.joint(g.parent_joint_[c]).parent)
            if (++steps > n_bodies) throw NotATree("body " + std::to_string(b) + " has no path to ground");
    }

    int off = 0;
    for (const auto& j : g.tree_) {
        g.offsets_.push_back(off);
        const int dof = joint_dof(j.kind);
        const int pvar = j.parent == 0 ? -1 : g.body_var(j.parent);
        for (int k = 0; k < dof; ++k) {
            g.var_parent_.push_back(k == 0 ? pvar : off + k - 1);
            g.var_joint_.push_back(j.id);
        }
        off += dof;
    }
    g.n_vars_ = off;
    for (const auto& c : g.cuts_)
        if (c.parent == 0 && c.child == 0) throw NotATree("cut joint on ground only");
    return g;
}

std::vector<FundamentalCycle> fundamental_cycles(const LimbGraph& g) {
    std::vector<FundamentalCycle> out;
    std::set<int> used_joints;
    int lambda = 1;
    for (const auto& c : g.cut_joints()) {
        auto a = g.predecessor_vars(c.parent);
        auto b = g.predecessor_vars(c.child);
        std::vector<int> vars;
        std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(vars));
        std::set<int> joints_here;
        for (int v : vars) joints_here.insert(g.var_joint(v));
        for (int jid : joints_here)
            if (!used_joints.insert(jid).second)
                throw NotATree("cycles share tree joint " + std::to_string(jid) + "; limb is not hybrid");
        FundamentalCycle fc;
        fc.id = lambda++;
        fc.cut_joint = c.id;
        fc.vars = vars;
        fc.y = vars;
        out.push_back(fc);
    }
    return out;
}

void partition_cycle(FundamentalCycle& c, const std::vector<int>& q) {
    c.q.clear();
    c.y.clear();
    for (int v : q)
        if (std::find(c.vars.begin(), c.vars.end(), v) == c.vars.end())
            throw Error("independent variable " + std::to_string(v) + " is not in cycle " + std::to_string(c.id));
    for (int v : c.vars) {
        if (std::find(q.begin(), q.end(), v) != q.end()) c.q.push_back(v);
        else c.y.push_back(v);
    }
}

}  // namespace pkm
