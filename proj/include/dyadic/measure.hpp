#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dyadic/tree.hpp"

namespace dyadic {

enum class MeasureKind { Generic, Lebesgue, Lsmp, Twist };

/// Positive measure on a dyadic window, stored as one mass per tree node.
/// Leaf masses are assigned by the builder; every internal mass is the sum of
/// its two children, so additivity holds bit-for-bit by construction.
///
/// Builders truncate unresolved structure by conditional expectation: a leaf
/// carries the exact total mass of everything beneath it, so mu(Q) is exact
/// for every node of the tree. Leaves whose interior structure was collapsed
/// are flagged as tail leaves.
class MeasureTree {
public:
    MeasureTree() = default;
    MeasureTree(std::shared_ptr<const DyadicTree> tree, std::vector<double> leaf_mass,
                MeasureKind kind = MeasureKind::Generic, int struct_depth = 0,
                std::vector<char> tail_leaf = {});

    const DyadicTree& tree() const { return *tree_; }
    const std::shared_ptr<const DyadicTree>& tree_ptr() const { return tree_; }
    const Window& window() const { return tree_->window(); }

    double mass(std::int32_t node) const { return node_mass_[node]; }
    double mass(const NodeId& q) const { return node_mass_[tree_->require(q)]; }
    double total_mass() const { return node_mass_[tree_->root()]; }
    const std::vector<double>& node_mass() const { return node_mass_; }
    double leaf_mass(std::int32_t leaf) const { return node_mass_[tree_->leaf_node(leaf)]; }

    bool is_tail_leaf(std::int32_t leaf) const {
        return !tail_leaf_.empty() && tail_leaf_[leaf] != 0;
    }

    MeasureKind kind() const { return kind_; }
    /// Structured levels below the unit scale for the lsmp/twist builders.
    int struct_depth() const { return struct_depth_; }

private:
    std::shared_ptr<const DyadicTree> tree_;
    std::vector<double> node_mass_;
    std::vector<char> tail_leaf_;
    MeasureKind kind_ = MeasureKind::Generic;
    int struct_depth_ = 0;
};

/// Balance diagnostics of a measure (suprema over resolvable nodes).
struct BalanceReport {
    double doubling_const = 1.0;     // sup mu(parent)/mu(Q)
    double balanced_const = 1.0;     // sup max(m(Q)/m(parent), m(parent)/m(Q))
    double sibling_const = 1.0;      // sup m(Q)/m(Q^s)
    double standardness_const = 0.0; // sup |h_Q|_1 * |h_Q|_inf
    std::size_t skipped_nodes = 0;   // nodes lacking the needed relatives
    NodeId doubling_witness{};
    NodeId balanced_witness{};
    NodeId sibling_witness{};
};

/// Uniform mass: every leaf carries its length, mu([0,2^J)) = 2^J.
MeasureTree build_lebesgue(const Window& w);

/// The non-doubling measure with mu(I_1) = mu(I_1^b) = 1/2,
/// mu(I_k) = ((k-1)/k) mu(I_{k-1}), mu(I_k^b) = (1/k) mu(I_{k-1}) on [0,1),
/// unit density outside. The tree is complete; the leftmost leaf carries the
/// tail mass of the unresolved chain.
MeasureTree build_lsmp(const Window& w);

/// The sibling-balanced-but-not-balanced measure assembled from the products
/// of a_k, b_k, c_kj, d_kj, repeated on every unit cell. The tree is adaptive:
/// it follows the structured chains down to the window floor and keeps
/// uniform regions coarse (uniform blocks are split once so the tree stays
/// sibling-closed).
MeasureTree build_twist(const Window& w);

/// m(Q) = mu(Q_-) mu(Q_+) / mu(Q). Throws LeafNodeError on leaves.
double m_value(const MeasureTree& mu, std::int32_t node);
double m_value(const MeasureTree& mu, const NodeId& q);

BalanceReport balance_report(const MeasureTree& mu);

/// CSV with header `level,offset,mass`, leaves only.
void save_measure_csv(const MeasureTree& mu, std::ostream& out);
MeasureTree load_measure_csv(const Window& w, std::istream& in);

/// Closed-form structured masses (exact up to rounding), shared by builders,
/// symbols and the reproduction experiments.
namespace lsmp_form {
double mass_Ik(int k);        // 1/(2k)
double mass_Ikb(int k);       // 1/2 for k=1, 1/(2k(k-1)) for k>=2
double m_Ik(int k);           // 1/(2(k+1)^2)
}  // namespace lsmp_form

namespace twist_form {
double a(int k);
double b(int k);
double c(int k, int j);
double d(int k, int j);
double prefix_a(int k);            // prod_{i<=k} a_i
double prefix_c(int k, int j);     // prod_{i<=j} c_{ki}
double mass_Ik(int k);             // prod_{i<=k} a_i
double mass_Ikb(int k);            // prefix_a(k-1) * b_k
double mass_Ikj(int k, int j);     // prefix_a(k-1) * b_k * prefix_c(k, j)
double mass_Ikjb(int k, int j);    // prefix_a(k-1) * b_k * prefix_c(k, j-1) * d_kj
double m_Ik(int k);                // mass_Ik(k) * a_{k+1} * b_{k+1}
double m_Ikb(int k);               // c_k1 d_k1 b_k * mass_Ik(k-1)
double m_Ikj(int k, int j);        // c_{k,j+1} d_{k,j+1} c_kj * mass of parent
double m_Ikjb(int k, int j);       // (1/4) d_kj * mass of parent
}  // namespace twist_form

/// Node addresses of the structured intervals inside unit cell n >= 1
/// (cell n occupies [n-1, n)). Valid while the requested scale stays inside
/// the window.
namespace cell_layout {
NodeId unit_cell(const Window& w, int n);
NodeId Ik(const Window& w, int n, int k);    // [n-1, n-1+2^-k)
NodeId Ikb(const Window& w, int n, int k);   // sibling of Ik
NodeId Ikj(const Window& w, int n, int k, int j);
NodeId Ikjb(const Window& w, int n, int k, int j);
}  // namespace cell_layout

}  // namespace dyadic
