#include "doctest.h"
#include "pkm/errors.hpp"
#include "pkm/topology.hpp"

using namespace pkm;

namespace {

std::vector<JointSpec> irsbot_joints() {
    return {{1, 0, 1, JointKind::Revolute},  {2, 1, 2, JointKind::Revolute},  {3, 0, 3, JointKind::Revolute},
            {4, 2, 4, JointKind::Universal}, {5, 2, 5, JointKind::Universal}, {6, 4, 6, JointKind::Universal},
            {7, 2, 3, JointKind::Revolute},  {8, 6, 5, JointKind::Universal}};
}

}  // namespace

TEST_CASE("IRSBot limb graph: variables and predecessors") {
    const LimbGraph g = build_limb_graph(6, irsbot_joints(), {7, 8}, 6);
    CHECK(g.num_vars() == 9);
    CHECK(g.num_cycles() == 2);
    CHECK(g.var_offset(4) == 3);
    CHECK(g.var_offset(6) == 7);
    CHECK(g.body_var(6) == 8);
    CHECK(g.var_parent(3) == 1);
    CHECK(g.var_parent(4) == 3);
    CHECK(g.var_parent(2) == -1);
    CHECK(g.predecessor_set(6) == std::vector<int>{1, 2, 4, 6});
    CHECK(g.predecessor_vars(5) == std::vector<int>{0, 1, 5, 6});
    CHECK(g.var_precedes(1, 8));
    CHECK_FALSE(g.var_precedes(5, 8));
    CHECK_THROWS_AS(g.body_var(9), UnknownBody);
}

TEST_CASE("fundamental cycles of the IRSBot limb") {
    const LimbGraph g = build_limb_graph(6, irsbot_joints(), {7, 8}, 6);
    auto cs = fundamental_cycles(g);
    REQUIRE(cs.size() == 2);
    CHECK(cs[0].vars == std::vector<int>{0, 1, 2});
    CHECK(cs[1].vars == std::vector<int>{3, 4, 5, 6, 7, 8});
    partition_cycle(cs[1], {7, 8});
    CHECK(cs[1].y == std::vector<int>{3, 4, 5, 6});
    CHECK(cs[1].delta() == 2);
    CHECK_THROWS_AS(partition_cycle(cs[0], {5}), Error);
}

TEST_CASE("graph validation errors") {
    SUBCASE("non-canonical numbering") {
        std::vector<JointSpec> j = {{2, 0, 1, JointKind::Revolute}, {1, 1, 2, JointKind::Revolute}};
        CHECK_THROWS_AS(build_limb_graph(2, j, {}), NonCanonicalOrder);
    }
    SUBCASE("dangling body") {
        std::vector<JointSpec> j = {{1, 0, 1, JointKind::Revolute}};
        CHECK_THROWS_AS(build_limb_graph(2, j, {}), DanglingBody);
    }
    SUBCASE("missing cut leaves a loop") {
        auto j = irsbot_joints();
        CHECK_THROWS_AS(build_limb_graph(6, j, {7}), NotATree);
    }
    SUBCASE("cycles sharing a tree joint") {
        // two cuts closing loops through the same joint 2
        std::vector<JointSpec> j = {{1, 0, 1, JointKind::Revolute}, {2, 1, 2, JointKind::Revolute},
                                    {3, 0, 3, JointKind::Revolute}, {4, 2, 3, JointKind::Revolute},
                                    {5, 0, 2, JointKind::Revolute}};
        const LimbGraph g = build_limb_graph(3, j, {4, 5});
        CHECK_THROWS_AS(fundamental_cycles(g), NotATree);
    }
}

TEST_CASE("joint dof") {
    CHECK(joint_dof(JointKind::Revolute) == 1);
    CHECK(joint_dof(JointKind::Prismatic) == 1);
    CHECK(joint_dof(JointKind::Universal) == 2);
}
