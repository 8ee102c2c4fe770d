#include "dyadic/tree_function.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace dyadic {

TreeFunction TreeFunction::indicator(const std::shared_ptr<const DyadicTree>& tree,
                                     const NodeId& q) {
    std::int32_t node = tree->require(q);
    const auto& n = tree->node(node);
    std::vector<double> v(tree->leaf_count(), 0.0);
    for (std::int32_t l = n.leaf_begin; l < n.leaf_end; ++l) v[l] = 1.0;
    return TreeFunction(tree, std::move(v));
}

TreeFunction& TreeFunction::operator+=(const TreeFunction& other) {
    require_same_tree(*this, other);
    for (std::size_t i = 0; i < leaf_value_.size(); ++i) leaf_value_[i] += other.leaf_value_[i];
    return *this;
}

TreeFunction& TreeFunction::operator-=(const TreeFunction& other) {
    require_same_tree(*this, other);
    for (std::size_t i = 0; i < leaf_value_.size(); ++i) leaf_value_[i] -= other.leaf_value_[i];
    return *this;
}

TreeFunction& TreeFunction::operator*=(double c) {
    for (double& v : leaf_value_) v *= c;
    return *this;
}

TreeFunction pointwise_product(const TreeFunction& a, const TreeFunction& b) {
    require_same_tree(a, b);
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.value(static_cast<std::int32_t>(i)) *
                                                      b.value(static_cast<std::int32_t>(i));
    return TreeFunction(a.tree_ptr(), std::move(v));
}

double TreeFunction::max_abs() const {
    double m = 0.0;
    for (double v : leaf_value_) m = std::max(m, std::abs(v));
    return m;
}

FunctionStats compute_stats(const TreeFunction& f, const MeasureTree& mu) {
    require_same_tree(f, mu);
    const DyadicTree& tree = f.tree();
    FunctionStats s;
    s.integral.assign(tree.node_count(), 0.0);
    s.average.assign(tree.node_count(), 0.0);
    const auto& nodes = tree.nodes();
    for (std::size_t i = nodes.size(); i-- > 0;) {
        if (nodes[i].child[0] < 0) {
            std::int32_t leaf = nodes[i].leaf_begin;
            s.integral[i] = f.value(leaf) * mu.mass(static_cast<std::int32_t>(i));
            s.average[i] = f.value(leaf);
        } else {
            s.integral[i] = s.integral[nodes[i].child[0]] + s.integral[nodes[i].child[1]];
            s.average[i] = s.integral[i] / mu.mass(static_cast<std::int32_t>(i));
        }
    }
    return s;
}

double integral(const TreeFunction& f, const MeasureTree& mu) {
    require_same_tree(f, mu);
    const DyadicTree& tree = f.tree();
    double acc = 0.0;
    for (std::size_t l = 0; l < tree.leaf_count(); ++l)
        acc += f.value(static_cast<std::int32_t>(l)) * mu.leaf_mass(static_cast<std::int32_t>(l));
    return acc;
}

double average(const TreeFunction& f, const MeasureTree& mu, std::int32_t node) {
    require_same_tree(f, mu);
    const auto& n = f.tree().node(node);
    double acc = 0.0;
    for (std::int32_t l = n.leaf_begin; l < n.leaf_end; ++l)
        acc += f.value(l) * mu.leaf_mass(l);
    return acc / mu.mass(node);
}

double average(const TreeFunction& f, const MeasureTree& mu, const NodeId& q) {
    return average(f, mu, f.tree().require(q));
}

double lp_norm(const TreeFunction& f, const MeasureTree& mu, double p) {
    if (p < 1.0) throw BadExponentError("lp_norm needs p >= 1");
    require_same_tree(f, mu);
    double acc = 0.0;
    if (p == 2.0) {
        for (std::size_t l = 0; l < f.size(); ++l) {
            double v = f.value(static_cast<std::int32_t>(l));
            acc += v * v * mu.leaf_mass(static_cast<std::int32_t>(l));
        }
        return std::sqrt(acc);
    }
    for (std::size_t l = 0; l < f.size(); ++l)
        acc += std::pow(std::abs(f.value(static_cast<std::int32_t>(l))), p) *
               mu.leaf_mass(static_cast<std::int32_t>(l));
    return std::pow(acc, 1.0 / p);
}

double l2_inner(const TreeFunction& f, const TreeFunction& g, const MeasureTree& mu) {
    require_same_tree(f, g);
    require_same_tree(f, mu);
    double acc = 0.0;
    for (std::size_t l = 0; l < f.size(); ++l)
        acc += f.value(static_cast<std::int32_t>(l)) * g.value(static_cast<std::int32_t>(l)) *
               mu.leaf_mass(static_cast<std::int32_t>(l));
    return acc;
}

std::pair<double, double> haar_values(const MeasureTree& mu, std::int32_t node) {
    const auto& n = mu.tree().node(node);
    if (n.child[0] < 0) throw LeafNodeError("haar function undefined on leaf " + to_string(n.id));
    double root_m = std::sqrt(m_value(mu, node));
    return {-root_m / mu.mass(n.child[0]), root_m / mu.mass(n.child[1])};
}

TreeFunction haar_function(const MeasureTree& mu, const NodeId& q) {
    const DyadicTree& tree = mu.tree();
    std::int32_t node = tree.require(q);
    auto [vl, vr] = haar_values(mu, node);
    const auto& n = tree.node(node);
    std::vector<double> v(tree.leaf_count(), 0.0);
    const auto& lc = tree.node(n.child[0]);
    const auto& rc = tree.node(n.child[1]);
    for (std::int32_t l = lc.leaf_begin; l < lc.leaf_end; ++l) v[l] = vl;
    for (std::int32_t l = rc.leaf_begin; l < rc.leaf_end; ++l) v[l] = vr;
    return TreeFunction(mu.tree_ptr(), std::move(v));
}

double haar_coeff_from_stats(const MeasureTree& mu, const FunctionStats& fs, std::int32_t node) {
    const auto& n = mu.tree().node(node);
    if (n.child[0] < 0)
        throw LeafNodeError("haar coefficient undefined on leaf " + to_string(n.id));
    return std::sqrt(m_value(mu, node)) * (fs.average[n.child[1]] - fs.average[n.child[0]]);
}

double haar_coeff(const TreeFunction& f, const MeasureTree& mu, const NodeId& q) {
    require_same_tree(f, mu);
    const DyadicTree& tree = f.tree();
    std::int32_t node = tree.require(q);
    const auto& n = tree.node(node);
    if (n.child[0] < 0)
        throw LeafNodeError("haar coefficient undefined on leaf " + to_string(n.id));
    return std::sqrt(m_value(mu, node)) *
           (average(f, mu, n.child[1]) - average(f, mu, n.child[0]));
}

TreeFunction martingale_diff(const TreeFunction& f, const MeasureTree& mu, const NodeId& q) {
    require_same_tree(f, mu);
    const DyadicTree& tree = f.tree();
    std::int32_t node = tree.require(q);
    const auto& n = tree.node(node);
    if (n.child[0] < 0)
        throw LeafNodeError("martingale difference undefined on leaf " + to_string(n.id));
    double aq = average(f, mu, node);
    std::vector<double> v(tree.leaf_count(), 0.0);
    for (int side = 0; side < 2; ++side) {
        const auto& c = tree.node(n.child[side]);
        double ar = average(f, mu, n.child[side]);
        for (std::int32_t l = c.leaf_begin; l < c.leaf_end; ++l) v[l] = ar - aq;
    }
    return TreeFunction(mu.tree_ptr(), std::move(v));
}

TreeFunction maximal_fn(const TreeFunction& f, const MeasureTree& mu, double q_exponent) {
    if (q_exponent < 1.0) throw BadExponentError("maximal_fn needs exponent >= 1");
    require_same_tree(f, mu);
    const DyadicTree& tree = f.tree();
    // per-node q-averages of |f|, then a root-to-leaf running maximum
    std::vector<double> qavg(tree.node_count(), 0.0);
    const auto& nodes = tree.nodes();
    for (std::size_t i = nodes.size(); i-- > 0;) {
        if (nodes[i].child[0] < 0) {
            double v = std::abs(f.value(nodes[i].leaf_begin));
            qavg[i] = std::pow(v, q_exponent) * mu.mass(static_cast<std::int32_t>(i));
        } else {
            qavg[i] = qavg[nodes[i].child[0]] + qavg[nodes[i].child[1]];
        }
    }
    std::vector<double> best(tree.node_count(), 0.0);
    std::vector<double> out(tree.leaf_count(), 0.0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        double here = std::pow(qavg[i] / mu.mass(static_cast<std::int32_t>(i)), 1.0 / q_exponent);
        double prev = nodes[i].parent >= 0 ? best[nodes[i].parent] : 0.0;
        best[i] = std::max(prev, here);
        if (nodes[i].child[0] < 0) out[nodes[i].leaf_begin] = best[i];
    }
    return TreeFunction(f.tree_ptr(), std::move(out));
}

TreeFunction square_fn(const TreeFunction& f, const MeasureTree& mu) {
    require_same_tree(f, mu);
    const DyadicTree& tree = f.tree();
    FunctionStats fs = compute_stats(f, mu);
    std::vector<double> acc(tree.node_count(), 0.0);  // running sum of squares
    std::vector<double> out(tree.leaf_count(), 0.0);
    const auto& nodes = tree.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        double prev = nodes[i].parent >= 0 ? acc[nodes[i].parent] : 0.0;
        if (nodes[i].parent >= 0) {
            double diff = fs.average[i] - fs.average[nodes[i].parent];
            prev += diff * diff;
        }
        acc[i] = prev;
        if (nodes[i].child[0] < 0) out[nodes[i].leaf_begin] = std::sqrt(acc[i]);
    }
    return TreeFunction(f.tree_ptr(), std::move(out));
}

void save_function_csv(const TreeFunction& f, std::ostream& out) {
    out << "offset,value\n";
    char buf[64];
    for (std::size_t l = 0; l < f.size(); ++l) {
        std::snprintf(buf, sizeof buf, "%.17g", f.value(static_cast<std::int32_t>(l)));
        out << l << ',' << buf << '\n';
    }
}

TreeFunction load_function_csv(const std::shared_ptr<const DyadicTree>& tree, std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty function file");
    std::vector<double> v(tree->leaf_count(), 0.0);
    std::vector<char> seen(tree->leaf_count(), 0);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string a, b;
        if (!std::getline(row, a, ',') || !std::getline(row, b))
            throw ConfigError("malformed function row: " + line);
        std::size_t idx = std::stoull(a);
        if (idx >= v.size()) throw ConfigError("function row offset out of range: " + line);
        v[idx] = std::stod(b);
        seen[idx] = 1;
    }
    for (char s : seen)
        if (!s) throw ConfigError("function file does not cover every leaf");
    return TreeFunction(tree, std::move(v));
}

}  // namespace dyadic
