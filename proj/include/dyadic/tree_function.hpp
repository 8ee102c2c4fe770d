#pragma once

#include <iosfwd>
#include <memory>
#include <utility>
#include <vector>

#include "dyadic/measure.hpp"

namespace dyadic {

/// Real function that is constant on every leaf of a dyadic tree.
class TreeFunction {
public:
    TreeFunction() = default;
    TreeFunction(std::shared_ptr<const DyadicTree> tree, std::vector<double> leaf_value)
        : tree_(std::move(tree)), leaf_value_(std::move(leaf_value)) {
        if (leaf_value_.size() != tree_->leaf_count())
            throw ConfigError("leaf value count does not match tree");
    }

    static TreeFunction zero(const std::shared_ptr<const DyadicTree>& tree) {
        return TreeFunction(tree, std::vector<double>(tree->leaf_count(), 0.0));
    }
    static TreeFunction constant(const std::shared_ptr<const DyadicTree>& tree, double c) {
        return TreeFunction(tree, std::vector<double>(tree->leaf_count(), c));
    }
    /// Indicator of the subtree under q.
    static TreeFunction indicator(const std::shared_ptr<const DyadicTree>& tree, const NodeId& q);

    const DyadicTree& tree() const { return *tree_; }
    const std::shared_ptr<const DyadicTree>& tree_ptr() const { return tree_; }
    double value(std::int32_t leaf) const { return leaf_value_[leaf]; }
    std::vector<double>& values() { return leaf_value_; }
    const std::vector<double>& values() const { return leaf_value_; }
    std::size_t size() const { return leaf_value_.size(); }

    TreeFunction& operator+=(const TreeFunction& other);
    TreeFunction& operator-=(const TreeFunction& other);
    TreeFunction& operator*=(double c);
    friend TreeFunction operator+(TreeFunction a, const TreeFunction& b) { return a += b; }
    friend TreeFunction operator-(TreeFunction a, const TreeFunction& b) { return a -= b; }
    friend TreeFunction operator*(double c, TreeFunction f) { return f *= c; }

    /// Pointwise product (both leaf-constant on the same tree).
    friend TreeFunction pointwise_product(const TreeFunction& a, const TreeFunction& b);

    double max_abs() const;

private:
    std::shared_ptr<const DyadicTree> tree_;
    std::vector<double> leaf_value_;
};

inline void require_same_tree(const TreeFunction& f, const MeasureTree& mu) {
    if (!f.tree().same_tree(mu.tree()))
        throw WindowMismatchError("function and measure live on different trees");
}
inline void require_same_tree(const TreeFunction& f, const TreeFunction& g) {
    if (!f.tree().same_tree(g.tree()))
        throw WindowMismatchError("functions live on different trees");
}

/// Per-node integrals and averages of one function against one measure.
struct FunctionStats {
    std::vector<double> integral;  // int_Q f dmu
    std::vector<double> average;   // <f>_Q
};
FunctionStats compute_stats(const TreeFunction& f, const MeasureTree& mu);

double integral(const TreeFunction& f, const MeasureTree& mu);
double average(const TreeFunction& f, const MeasureTree& mu, const NodeId& q);
double average(const TreeFunction& f, const MeasureTree& mu, std::int32_t node);

/// L^p(mu) norm, p >= 1.
double lp_norm(const TreeFunction& f, const MeasureTree& mu, double p);
double l2_inner(const TreeFunction& f, const TreeFunction& g, const MeasureTree& mu);

/// The mu-adapted Haar function of an internal node:
/// h_Q = sqrt(m(Q)) (1_{Q+}/mu(Q+) - 1_{Q-}/mu(Q-)).
TreeFunction haar_function(const MeasureTree& mu, const NodeId& q);
/// Values of h_Q on its two children (left, right).
std::pair<double, double> haar_values(const MeasureTree& mu, std::int32_t node);

/// <f, h_Q>_{L^2(mu)} = sqrt(m(Q)) (<f>_{Q+} - <f>_{Q-}).
double haar_coeff(const TreeFunction& f, const MeasureTree& mu, const NodeId& q);
double haar_coeff_from_stats(const MeasureTree& mu, const FunctionStats& fs, std::int32_t node);

/// Martingale difference Delta_Q f as a function.
TreeFunction martingale_diff(const TreeFunction& f, const MeasureTree& mu, const NodeId& q);

/// M^q f(x) = sup over nodes containing x of <|f|^q>_Q^{1/q}.
TreeFunction maximal_fn(const TreeFunction& f, const MeasureTree& mu, double q_exponent = 1.0);
/// Sf(x) = (sum over internal Q containing x of |Delta_Q f(x)|^2)^{1/2}.
TreeFunction square_fn(const TreeFunction& f, const MeasureTree& mu);

/// CSV with header `offset,value`; offset is the left-to-right leaf index.
void save_function_csv(const TreeFunction& f, std::ostream& out);
TreeFunction load_function_csv(const std::shared_ptr<const DyadicTree>& tree, std::istream& in);

}  // namespace dyadic
