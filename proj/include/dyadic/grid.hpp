#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dyadic {

// Errors thrown by address arithmetic and by the modules built on top of it.
struct TopLevelError : std::domain_error {
    using std::domain_error::domain_error;
};
struct WindowMismatchError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct LeafNodeError : std::domain_error {
    using std::domain_error::domain_error;
};
struct BadExponentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct WrongMeasureError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct SupportViolationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct CalibrationFailedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnresolvableNodeError : std::domain_error {
    using std::domain_error::domain_error;
};
struct DimensionTooLargeError : std::length_error {
    using std::length_error::length_error;
};
struct UnknownExperimentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct AssertionFailedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A finite dyadic window [0, 2^J) whose nodes live on levels J-D .. J.
/// Level j hosts the intervals [m*2^j, (m+1)*2^j); smaller j means finer scale.
struct Window {
    int top_level = 0;  // J
    int depth = 1;      // D >= 1; finest admissible level is J - D

    // Offsets are kept in 64-bit integers, which bounds the usable depth.
    static constexpr int kMaxDepth = 62;

    Window() = default;
    Window(int J, int D) : top_level(J), depth(D) {
        if (D < 1) throw ConfigError("Window: depth must be >= 1");
        if (D > kMaxDepth) throw ConfigError("Window: depth exceeds 62 (64-bit offsets)");
    }

    int floor_level() const { return top_level - depth; }
    std::uint64_t leaf_count_complete() const { return std::uint64_t{1} << depth; }

    friend bool operator==(const Window& a, const Window& b) {
        return a.top_level == b.top_level && a.depth == b.depth;
    }
    friend bool operator!=(const Window& a, const Window& b) { return !(a == b); }
};

/// Address of one dyadic interval [offset*2^level, (offset+1)*2^level).
struct NodeId {
    int level = 0;
    std::uint64_t offset = 0;

    friend bool operator==(const NodeId& a, const NodeId& b) {
        return a.level == b.level && a.offset == b.offset;
    }
    friend bool operator!=(const NodeId& a, const NodeId& b) { return !(a == b); }
};

inline std::string to_string(const NodeId& q) {
    return "(level=" + std::to_string(q.level) + ", offset=" + std::to_string(q.offset) + ")";
}

inline bool in_window(const Window& w, const NodeId& q) {
    if (q.level > w.top_level || q.level < w.floor_level()) return false;
    return q.offset < (std::uint64_t{1} << (w.top_level - q.level));
}

inline void require_in_window(const Window& w, const NodeId& q) {
    if (!in_window(w, q))
        throw WindowMismatchError("node " + to_string(q) + " outside window");
}

inline bool is_top(const Window& w, const NodeId& q) { return q.level == w.top_level; }
inline bool is_floor(const Window& w, const NodeId& q) { return q.level == w.floor_level(); }

/// Heap-style key: unique over all levels of one window, parent(key) = key/2.
inline std::uint64_t heap_key(const Window& w, const NodeId& q) {
    return (std::uint64_t{1} << (w.top_level - q.level)) | q.offset;
}

inline NodeId parent(const Window& w, const NodeId& q) {
    require_in_window(w, q);
    if (is_top(w, q)) throw TopLevelError("parent of top-level node " + to_string(q));
    return NodeId{q.level + 1, q.offset >> 1};
}

inline NodeId sibling(const Window& w, const NodeId& q) {
    require_in_window(w, q);
    if (is_top(w, q)) throw TopLevelError("sibling of top-level node " + to_string(q));
    return NodeId{q.level, q.offset ^ 1};
}

inline NodeId left_child(const NodeId& q) { return NodeId{q.level - 1, q.offset << 1}; }
inline NodeId right_child(const NodeId& q) { return NodeId{q.level - 1, (q.offset << 1) | 1}; }

inline bool is_left_child(const NodeId& q) { return (q.offset & 1) == 0; }

/// k-fold parent.
inline NodeId ancestor(const Window& w, NodeId q, int k) {
    for (int i = 0; i < k; ++i) q = parent(w, q);
    return q;
}

inline bool contains(const NodeId& q, const NodeId& r) {
    if (q.level < r.level) return false;
    return (r.offset >> (q.level - r.level)) == q.offset;
}

/// Number of edges on the unique path through the least common ancestor.
inline int tree_distance(const Window& w, NodeId a, NodeId b) {
    require_in_window(w, a);
    require_in_window(w, b);
    int d = 0;
    while (a.level < b.level) {
        a = NodeId{a.level + 1, a.offset >> 1};
        ++d;
    }
    while (b.level < a.level) {
        b = NodeId{b.level + 1, b.offset >> 1};
        ++d;
    }
    while (a.offset != b.offset) {
        a.offset >>= 1;
        b.offset >>= 1;
        d += 2;
    }
    return d;
}

}  // namespace dyadic
