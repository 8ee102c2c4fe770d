#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <unordered_map>
#include <vector>

#include "dyadic/grid.hpp"

namespace dyadic {

/// Topology of one finite dyadic tree. Nodes are stored in DFS pre-order
/// (root first, left subtree before right), so the leaves under any node form
/// a contiguous range of the leaf array. Refinement may stop early: a leaf is
/// simply a node without children, at any level down to the window floor.
///
/// Builders must keep the tree sibling-closed (the sibling of an internal
/// node is internal); operators that move mass across siblings rely on it.
class DyadicTree {
public:
    struct Node {
        NodeId id;
        std::int32_t parent = -1;
        std::int32_t child[2] = {-1, -1};  // left, right
        std::int32_t leaf_begin = 0;       // leaf index range under this node
        std::int32_t leaf_end = 0;
    };

    /// refine(id) == true means the node gets two children (unless at floor).
    static std::shared_ptr<const DyadicTree> build(
        const Window& w, const std::function<bool(const NodeId&)>& refine);

    /// Complete tree: every node above the floor is refined.
    static std::shared_ptr<const DyadicTree> build_complete(const Window& w);

    /// Tree spanning an explicit leaf set (used by the CSV loaders). The
    /// leaves must tile [0, 2^J) exactly; throws ConfigError otherwise.
    static std::shared_ptr<const DyadicTree> build_from_leaves(
        const Window& w, const std::vector<NodeId>& leaves);

    const Window& window() const { return window_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t leaf_count() const { return leaves_.size(); }
    const Node& node(std::int32_t i) const { return nodes_[i]; }
    const std::vector<Node>& nodes() const { return nodes_; }

    std::int32_t root() const { return 0; }
    bool is_leaf(std::int32_t i) const { return nodes_[i].child[0] < 0; }

    /// Node index of the i-th leaf (left-to-right).
    std::int32_t leaf_node(std::int32_t leaf) const { return leaves_[leaf]; }
    /// Leaf index of a leaf node (first leaf under any node).
    std::int32_t leaf_index(std::int32_t node) const { return nodes_[node].leaf_begin; }

    /// Index lookup; -1 if the address is not a node of this tree.
    std::int32_t find(const NodeId& q) const {
        if (!in_window(window_, q)) return -1;
        auto it = index_.find(heap_key(window_, q));
        return it == index_.end() ? -1 : it->second;
    }
    std::int32_t require(const NodeId& q) const {
        std::int32_t i = find(q);
        if (i < 0) throw UnresolvableNodeError("node " + to_string(q) + " not resolved in tree");
        return i;
    }

    std::int32_t sibling_of(std::int32_t i) const {
        std::int32_t p = nodes_[i].parent;
        if (p < 0) return -1;
        const Node& pn = nodes_[p];
        return pn.child[0] == i ? pn.child[1] : pn.child[0];
    }

    /// Child of internal node `anc` on the path toward leaf index `leaf`.
    std::int32_t child_toward_leaf(std::int32_t anc, std::int32_t leaf) const {
        const Node& n = nodes_[anc];
        return nodes_[n.child[0]].leaf_end > leaf ? n.child[0] : n.child[1];
    }

    /// Ancestor chain of a leaf from the root down to the leaf node itself.
    void ancestor_chain(std::int32_t leaf, std::vector<std::int32_t>& out) const {
        out.clear();
        std::int32_t i = leaves_[leaf];
        while (i >= 0) {
            out.push_back(i);
            i = nodes_[i].parent;
        }
        for (std::size_t a = 0, b = out.size(); a + 1 < b; ++a, --b) std::swap(out[a], out[b - 1]);
    }

    bool same_tree(const DyadicTree& other) const { return this == &other; }

    /// True when the sibling of every internal node is internal. The named
    /// measure builders guarantee this; file-loaded trees may not.
    bool sibling_closed() const { return sibling_closed_; }

private:
    Window window_;
    std::vector<Node> nodes_;
    std::vector<std::int32_t> leaves_;
    std::unordered_map<std::uint64_t, std::int32_t> index_;
    bool sibling_closed_ = true;
};

}  // namespace dyadic
