#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dyadic/grid.hpp"
#include "dyadic/tree.hpp"

using namespace dyadic;

TEST_CASE("parent halves the offset") {
    Window w(4, 6);
    CHECK(parent(w, NodeId{0, 3}) == NodeId{1, 1});
    CHECK(parent(w, NodeId{-2, 13}) == NodeId{-1, 6});
    CHECK_THROWS_AS(parent(w, NodeId{4, 0}), TopLevelError);
}

TEST_CASE("children partition the parent exactly") {
    Window w(3, 5);
    for (int level = -1; level < 3; ++level) {
        for (std::uint64_t m = 0; m < (1ull << (3 - level)); ++m) {
            NodeId q{level, m};
            CHECK(parent(w, left_child(q)) == q);
            CHECK(parent(w, right_child(q)) == q);
            CHECK(left_child(q).offset + 1 == right_child(q).offset);
        }
    }
}

TEST_CASE("sibling is an involution and shares the parent") {
    Window w(2, 5);
    CHECK(sibling(w, NodeId{0, 2}) == NodeId{0, 3});
    CHECK_THROWS_AS(sibling(w, NodeId{2, 0}), TopLevelError);
    for (int level = -3; level < 2; ++level)
        for (std::uint64_t m = 0; m < (1ull << (2 - level)); ++m) {
            NodeId q{level, m};
            CHECK(sibling(w, sibling(w, q)) == q);
            CHECK(parent(w, sibling(w, q)) == parent(w, q));
        }
}

TEST_CASE("unit-cell sibling pair at each scale") {
    // I_k = [0,2^-k) and I_k^b = [2^-k,2^-k+1) are siblings
    Window w(0, 8);
    for (int k = 1; k <= 7; ++k)
        CHECK(sibling(w, NodeId{-k, 0}) == NodeId{-k, 1});
}

TEST_CASE("tree distance basics") {
    Window w(1, 4);
    NodeId q{-2, 5};
    CHECK(tree_distance(w, q, q) == 0);
    CHECK(tree_distance(w, q, sibling(w, q)) == 2);
    CHECK(tree_distance(w, q, parent(w, parent(w, q))) == 2);
    CHECK(tree_distance(w, q, parent(w, q)) == 1);
    CHECK_THROWS_AS(tree_distance(w, q, NodeId{-9, 0}), WindowMismatchError);
}

TEST_CASE("tree distance is a metric on a small window") {
    Window w(1, 3);
    std::vector<NodeId> all;
    for (int level = -2; level <= 1; ++level)
        for (std::uint64_t m = 0; m < (1ull << (1 - level)); ++m) all.push_back({level, m});
    for (const auto& a : all)
        for (const auto& b : all) {
            int dab = tree_distance(w, a, b);
            CHECK(dab == tree_distance(w, b, a));
            CHECK((dab == 0) == (a == b));
            for (const auto& c : all)
                CHECK(dab <= tree_distance(w, a, c) + tree_distance(w, c, b));
        }
}

TEST_CASE("ancestor and containment") {
    Window w(0, 10);
    NodeId q{-10, 1023};
    CHECK(ancestor(w, q, 10) == NodeId{0, 0});
    CHECK(contains(NodeId{-3, 7}, NodeId{-5, 31}));
    CHECK(!contains(NodeId{-3, 6}, NodeId{-5, 31}));
}

TEST_CASE("complete tree layout") {
    Window w(1, 4);
    auto tree = DyadicTree::build_complete(w);
    CHECK(tree->node_count() == (1u << 5) - 1);
    CHECK(tree->leaf_count() == 16);
    CHECK(tree->sibling_closed());
    // leaves come out left-to-right
    for (std::size_t l = 0; l < tree->leaf_count(); ++l)
        CHECK(tree->node(tree->leaf_node(static_cast<std::int32_t>(l))).id.offset == l);
    // every interior node has two children covering its leaf range
    for (std::size_t i = 0; i < tree->node_count(); ++i) {
        const auto& n = tree->node(static_cast<std::int32_t>(i));
        if (n.child[0] < 0) continue;
        CHECK(tree->node(n.child[0]).leaf_begin == n.leaf_begin);
        CHECK(tree->node(n.child[1]).leaf_end == n.leaf_end);
        CHECK(tree->node(n.child[0]).leaf_end == tree->node(n.child[1]).leaf_begin);
    }
}

TEST_CASE("window depth cap") {
    CHECK_THROWS_AS(Window(0, 80), ConfigError);
    CHECK_THROWS_AS(Window(0, 0), ConfigError);
}
