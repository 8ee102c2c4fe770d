#include "dyadic/tree.hpp"

#include <algorithm>

namespace dyadic {

namespace {

struct Builder {
    Window w;
    const std::function<bool(const NodeId&)>* refine;
    std::vector<DyadicTree::Node> nodes;
    std::vector<std::int32_t> leaves;

    std::int32_t emit(const NodeId& id, std::int32_t parent) {
        std::int32_t me = static_cast<std::int32_t>(nodes.size());
        DyadicTree::Node n;
        n.id = id;
        n.parent = parent;
        nodes.push_back(n);
        bool split = id.level > w.floor_level() && (*refine)(id);
        if (split) {
            std::int32_t l = emit(left_child(id), me);
            std::int32_t r = emit(right_child(id), me);
            nodes[me].child[0] = l;
            nodes[me].child[1] = r;
            nodes[me].leaf_begin = nodes[l].leaf_begin;
            nodes[me].leaf_end = nodes[r].leaf_end;
        } else {
            std::int32_t li = static_cast<std::int32_t>(leaves.size());
            leaves.push_back(me);
            nodes[me].leaf_begin = li;
            nodes[me].leaf_end = li + 1;
        }
        return me;
    }
};

}  // namespace

std::shared_ptr<const DyadicTree> DyadicTree::build(
    const Window& w, const std::function<bool(const NodeId&)>& refine) {
    auto tree = std::make_shared<DyadicTree>();
    tree->window_ = w;
    Builder b;
    b.w = w;
    b.refine = &refine;
    b.emit(NodeId{w.top_level, 0}, -1);
    tree->nodes_ = std::move(b.nodes);
    tree->leaves_ = std::move(b.leaves);

    // record whether every internal node has an internal sibling
    tree->sibling_closed_ = true;
    for (std::size_t i = 0; i < tree->nodes_.size(); ++i) {
        const Node& n = tree->nodes_[i];
        if (n.child[0] < 0 || n.parent < 0) continue;
        const Node& p = tree->nodes_[n.parent];
        std::int32_t sib = (p.child[0] == static_cast<std::int32_t>(i)) ? p.child[1] : p.child[0];
        if (tree->nodes_[sib].child[0] < 0) {
            tree->sibling_closed_ = false;
            break;
        }
    }

    tree->index_.reserve(tree->nodes_.size() * 2);
    for (std::size_t i = 0; i < tree->nodes_.size(); ++i)
        tree->index_.emplace(heap_key(w, tree->nodes_[i].id), static_cast<std::int32_t>(i));
    return tree;
}

std::shared_ptr<const DyadicTree> DyadicTree::build_complete(const Window& w) {
    return build(w, [](const NodeId&) { return true; });
}

std::shared_ptr<const DyadicTree> DyadicTree::build_from_leaves(
    const Window& w, const std::vector<NodeId>& leaves) {
    // validate the tiling and collect the set of required internal nodes
    std::vector<NodeId> sorted = leaves;
    auto left_end = [&](const NodeId& q) {
        return q.offset << (q.level - w.floor_level());
    };
    for (const NodeId& q : sorted) require_in_window(w, q);
    std::sort(sorted.begin(), sorted.end(), [&](const NodeId& a, const NodeId& b) {
        return left_end(a) < left_end(b);
    });
    std::uint64_t cursor = 0;
    for (const NodeId& q : sorted) {
        if (left_end(q) != cursor)
            throw ConfigError("leaf set does not tile the window (gap/overlap at " +
                              to_string(q) + ")");
        cursor += std::uint64_t{1} << (q.level - w.floor_level());
    }
    if (cursor != (std::uint64_t{1} << w.depth))
        throw ConfigError("leaf set does not cover the window");

    std::unordered_map<std::uint64_t, char> internal;
    for (const NodeId& q : sorted) {
        NodeId a = q;
        while (!is_top(w, a)) {
            a = NodeId{a.level + 1, a.offset >> 1};
            internal[heap_key(w, a)] = 1;
        }
    }
    for (const NodeId& q : sorted)
        if (internal.count(heap_key(w, q)))
            throw ConfigError("leaf " + to_string(q) + " is an ancestor of another leaf");

    return build(w, [&internal, &w](const NodeId& q) {
        return internal.count(heap_key(w, q)) != 0;
    });
}

}  // namespace dyadic
