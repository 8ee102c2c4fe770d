#include "dyadic/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace dyadic {

MeasureTree::MeasureTree(std::shared_ptr<const DyadicTree> tree, std::vector<double> leaf_mass,
                         MeasureKind kind, int struct_depth, std::vector<char> tail_leaf)
    : tree_(std::move(tree)), tail_leaf_(std::move(tail_leaf)), kind_(kind),
      struct_depth_(struct_depth) {
    if (leaf_mass.size() != tree_->leaf_count())
        throw ConfigError("leaf mass count does not match tree");
    for (double m : leaf_mass)
        if (!(m > 0.0) || !std::isfinite(m))
            throw ConfigError("leaf masses must be positive and finite");
    node_mass_.assign(tree_->node_count(), 0.0);
    for (std::size_t l = 0; l < leaf_mass.size(); ++l)
        node_mass_[tree_->leaf_node(static_cast<std::int32_t>(l))] = leaf_mass[l];
    // children are emitted after their parent in DFS order, so a reverse scan
    // sees both children before the parent
    const auto& nodes = tree_->nodes();
    for (std::size_t i = nodes.size(); i-- > 0;) {
        if (nodes[i].child[0] >= 0)
            node_mass_[i] = node_mass_[nodes[i].child[0]] + node_mass_[nodes[i].child[1]];
    }
}

double m_value(const MeasureTree& mu, std::int32_t node) {
    const auto& n = mu.tree().node(node);
    if (n.child[0] < 0) throw LeafNodeError("m(Q) undefined on leaf " + to_string(n.id));
    return mu.mass(n.child[0]) * mu.mass(n.child[1]) / mu.mass(node);
}

double m_value(const MeasureTree& mu, const NodeId& q) {
    return m_value(mu, mu.tree().require(q));
}

namespace lsmp_form {
double mass_Ik(int k) { return 1.0 / (2.0 * k); }
double mass_Ikb(int k) { return k == 1 ? 0.5 : 1.0 / (2.0 * k * (k - 1.0)); }
double m_Ik(int k) { return 1.0 / (2.0 * (k + 1.0) * (k + 1.0)); }
}  // namespace lsmp_form

namespace twist_form {
double a(int k) { return k == 1 ? 0.5 : 1.0 / std::sqrt(static_cast<double>(k)); }
double b(int k) { return 1.0 - a(k); }
double c(int k, int j) { return 1.0 - 1.0 / (k + j); }
double d(int k, int j) { return 1.0 / (k + j); }

double prefix_a(int k) {
    double p = 1.0;
    for (int i = 1; i <= k; ++i) p *= a(i);
    return p;
}

double prefix_c(int k, int j) {
    double p = 1.0;
    for (int i = 1; i <= j; ++i) p *= c(k, i);
    return p;
}

double mass_Ik(int k) { return prefix_a(k); }
double mass_Ikb(int k) { return prefix_a(k - 1) * b(k); }
double mass_Ikj(int k, int j) { return mass_Ikb(k) * prefix_c(k, j); }
double mass_Ikjb(int k, int j) { return mass_Ikb(k) * prefix_c(k, j - 1) * d(k, j); }

double m_Ik(int k) { return mass_Ik(k) * a(k + 1) * b(k + 1); }
double m_Ikb(int k) { return c(k, 1) * d(k, 1) * b(k) * mass_Ik(k - 1); }
double m_Ikj(int k, int j) {
    return c(k, j + 1) * d(k, j + 1) * c(k, j) * (j == 1 ? mass_Ikb(k) : mass_Ikj(k, j - 1));
}
double m_Ikjb(int k, int j) {
    return 0.25 * d(k, j) * (j == 1 ? mass_Ikb(k) : mass_Ikj(k, j - 1));
}
}  // namespace twist_form

namespace cell_layout {
NodeId unit_cell(const Window& w, int n) {
    (void)w;
    return NodeId{0, static_cast<std::uint64_t>(n - 1)};
}
NodeId Ik(const Window& w, int n, int k) {
    (void)w;
    return NodeId{-k, static_cast<std::uint64_t>(n - 1) << k};
}
NodeId Ikb(const Window& w, int n, int k) {
    NodeId q = Ik(w, n, k);
    q.offset |= 1;
    return q;
}
NodeId Ikj(const Window& w, int n, int k, int j) {
    (void)w;
    int l = k + j;
    return NodeId{-l, (static_cast<std::uint64_t>(n - 1) << l) | (std::uint64_t{1} << j)};
}
NodeId Ikjb(const Window& w, int n, int k, int j) {
    NodeId q = Ikj(w, n, k, j);
    q.offset |= 1;
    return q;
}
}  // namespace cell_layout

MeasureTree build_lebesgue(const Window& w) {
    auto tree = DyadicTree::build_complete(w);
    double leaf_len = std::ldexp(1.0, w.floor_level());
    std::vector<double> mass(tree->leaf_count(), leaf_len);
    return MeasureTree(std::move(tree), std::move(mass), MeasureKind::Lebesgue, 0);
}

MeasureTree build_lsmp(const Window& w) {
    const int S = w.depth - std::max(w.top_level, 0);
    if (w.top_level < 0 || S < 2)
        throw ConfigError("lsmp measure needs top_level >= 0 and at least two levels below "
                          "the unit scale");
    auto tree = DyadicTree::build_complete(w);
    const std::uint64_t cell_leaves = std::uint64_t{1} << S;  // leaves inside [0,1)
    const double leaf_len = std::ldexp(1.0, w.floor_level());

    std::vector<double> mass(tree->leaf_count());
    std::vector<char> tail(tree->leaf_count(), 0);
    for (std::uint64_t m = 0; m < tree->leaf_count(); ++m) {
        if (m >= cell_leaves) {
            mass[m] = leaf_len;  // unit density outside [0,1)
            continue;
        }
        if (m == 0) {
            mass[m] = lsmp_form::mass_Ik(S);  // unresolved chain below I_S
            tail[m] = 1;
            continue;
        }
        // leaf m sits inside I_k^b where 2^{S-k} <= m < 2^{S-k+1}
        int top_bit = 63 - __builtin_clzll(m);
        int k = S - top_bit;
        mass[m] = lsmp_form::mass_Ikb(k) / static_cast<double>(std::uint64_t{1} << top_bit);
    }
    return MeasureTree(std::move(tree), std::move(mass), MeasureKind::Lsmp, S, std::move(tail));
}

namespace {

// Classification of a node inside one unit cell of the twist construction.
// l >= 1 is the number of levels below the unit scale, mm the offset within
// the cell at that level.
enum class TwistClass { Ik, Ikb, Ikj, Ikjb, UniformInterior };

struct TwistNode {
    TwistClass cls;
    int k = 0;
    int j = 0;
};

TwistNode classify_twist(int l, std::uint64_t mm) {
    if (mm == 0) return {TwistClass::Ik, l, 0};
    if (mm == 1) return {TwistClass::Ikb, l, 0};
    int jbit = 63 - __builtin_clzll(mm);
    if (mm == (std::uint64_t{1} << jbit)) return {TwistClass::Ikj, l - jbit, jbit};
    if (mm == ((std::uint64_t{1} << jbit) | 1)) return {TwistClass::Ikjb, l - jbit, jbit};
    return {TwistClass::UniformInterior, 0, 0};
}

}  // namespace

MeasureTree build_twist(const Window& w) {
    const int S = w.depth - std::max(w.top_level, 0);
    if (w.top_level < 0 || S < 3)
        throw ConfigError("twist measure needs top_level >= 0 and at least three levels "
                          "below the unit scale");

    auto refine = [&](const NodeId& q) {
        if (q.level > 0) return true;   // above the unit scale
        if (q.level == 0) return true;  // unit cell splits into I_1, I_1^b
        int l = -q.level;
        std::uint64_t mm = q.offset & ((std::uint64_t{1} << l) - 1);
        TwistNode t = classify_twist(l, mm);
        switch (t.cls) {
            case TwistClass::Ik:
            case TwistClass::Ikb:
                return l < S;
            case TwistClass::Ikj:
            case TwistClass::Ikjb:
                return t.k + t.j < S;  // the b-side splits once alongside its sibling
            case TwistClass::UniformInterior:
                return false;
        }
        return false;
    };
    auto tree = DyadicTree::build(w, refine);

    std::vector<double> mass(tree->leaf_count());
    std::vector<char> tail(tree->leaf_count(), 0);
    for (std::size_t li = 0; li < tree->leaf_count(); ++li) {
        const NodeId id = tree->node(tree->leaf_node(static_cast<std::int32_t>(li))).id;
        int l = -id.level;
        std::uint64_t mm = id.offset & ((std::uint64_t{1} << l) - 1);
        TwistNode t = classify_twist(l, mm);
        switch (t.cls) {
            case TwistClass::Ik:  // tail of the a-chain
                mass[li] = twist_form::mass_Ik(S);
                tail[li] = 1;
                break;
            case TwistClass::Ikb:  // I_S^b, interior structure collapsed
                mass[li] = twist_form::mass_Ikb(S);
                tail[li] = 1;
                break;
            case TwistClass::Ikj:  // tail of the c-chain inside I_k^b
                mass[li] = twist_form::mass_Ikj(t.k, t.j);
                tail[li] = 1;
                break;
            case TwistClass::Ikjb:  // genuinely uniform
                mass[li] = twist_form::mass_Ikjb(t.k, t.j);
                break;
            case TwistClass::UniformInterior: {
                // half of the enclosing I_kj^b
                NodeId p{id.level + 1, id.offset >> 1};
                int pl = l - 1;
                std::uint64_t pm = p.offset & ((std::uint64_t{1} << pl) - 1);
                TwistNode pt = classify_twist(pl, pm);
                mass[li] = 0.5 * twist_form::mass_Ikjb(pt.k, pt.j);
                break;
            }
        }
    }
    return MeasureTree(std::move(tree), std::move(mass), MeasureKind::Twist, S, std::move(tail));
}

BalanceReport balance_report(const MeasureTree& mu) {
    const DyadicTree& tree = mu.tree();
    if (mu.window().depth < 2) throw ConfigError("balance report needs depth >= 2");
    BalanceReport rep;
    rep.doubling_const = 0.0;
    rep.balanced_const = 0.0;
    rep.sibling_const = 0.0;
    for (std::size_t i = 0; i < tree.node_count(); ++i) {
        const auto& n = tree.node(static_cast<std::int32_t>(i));
        const bool internal = n.child[0] >= 0;
        if (!internal && mu.is_tail_leaf(n.leaf_begin)) {
            ++rep.skipped_nodes;
            continue;
        }
        if (n.parent >= 0) {
            double r = mu.mass(n.parent) / mu.mass(static_cast<std::int32_t>(i));
            if (r > rep.doubling_const) {
                rep.doubling_const = r;
                rep.doubling_witness = n.id;
            }
        }
        if (!internal) continue;
        double mq = m_value(mu, static_cast<std::int32_t>(i));
        double mn = mu.mass(n.child[0]);
        double mx = mu.mass(n.child[1]);
        double min_child = std::min(mn, mx);
        double s = 2.0 * mq / min_child;  // |h_Q|_1 |h_Q|_inf
        rep.standardness_const = std::max(rep.standardness_const, s);
        if (n.parent >= 0) {
            double mp = m_value(mu, n.parent);
            double r = std::max(mq / mp, mp / mq);
            if (r > rep.balanced_const) {
                rep.balanced_const = r;
                rep.balanced_witness = n.id;
            }
            std::int32_t sib = tree.sibling_of(static_cast<std::int32_t>(i));
            if (sib >= 0 && !tree.is_leaf(sib)) {
                double r2 = mq / m_value(mu, sib);
                if (r2 > rep.sibling_const) {
                    rep.sibling_const = r2;
                    rep.sibling_witness = n.id;
                }
            } else if (sib >= 0) {
                ++rep.skipped_nodes;
            }
        }
    }
    return rep;
}

void save_measure_csv(const MeasureTree& mu, std::ostream& out) {
    out << "level,offset,mass\n";
    char buf[64];
    const DyadicTree& tree = mu.tree();
    for (std::size_t li = 0; li < tree.leaf_count(); ++li) {
        const NodeId id = tree.node(tree.leaf_node(static_cast<std::int32_t>(li))).id;
        std::snprintf(buf, sizeof buf, "%.17g", mu.leaf_mass(static_cast<std::int32_t>(li)));
        out << id.level << ',' << id.offset << ',' << buf << '\n';
    }
}

MeasureTree load_measure_csv(const Window& w, std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty measure file");
    std::vector<NodeId> leaves;
    std::vector<double> masses;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string a, b, c;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c))
            throw ConfigError("malformed measure row: " + line);
        NodeId q{std::stoi(a), static_cast<std::uint64_t>(std::stoull(b))};
        double m = std::stod(c);
        if (!(m > 0.0)) throw ConfigError("non-positive mass in measure file");
        leaves.push_back(q);
        masses.push_back(m);
    }
    auto tree = DyadicTree::build_from_leaves(w, leaves);
    // build_from_leaves reorders leaves left-to-right; remap the masses
    std::vector<double> ordered(tree->leaf_count());
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        std::int32_t node = tree->find(leaves[i]);
        ordered[tree->leaf_index(node)] = masses[i];
    }
    return MeasureTree(std::move(tree), std::move(ordered), MeasureKind::Generic, 0);
}

}  // namespace dyadic
