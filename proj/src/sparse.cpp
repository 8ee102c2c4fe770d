#include "dyadic/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace dyadic {

namespace {

TreeFunction localize(const TreeFunction& f, const DyadicTree& tree, std::int32_t node) {
    const auto& n = tree.node(node);
    std::vector<double> v(tree.leaf_count(), 0.0);
    for (std::int32_t l = n.leaf_begin; l < n.leaf_end; ++l) v[l] = f.value(l);
    return TreeFunction(f.tree_ptr(), std::move(v));
}

struct Selection {
    std::vector<std::int32_t> cubes;
    std::vector<SparseFamily::Reason> reasons;
    double selected_mass = 0.0;
};

/// One round of the stopping rule below `root` with f already localized.
Selection select_children(const Operator& op, const TreeFunction& g, const MeasureTree& mu,
                          std::int32_t root, double c1, double c2) {
    const DyadicTree& tree = g.tree();
    Selection out;

    TreeFunction absg = g;
    for (double& v : absg.values()) v = std::abs(v);
    FunctionStats abs_stats = compute_stats(absg, mu);
    const double avg0 = abs_stats.average[root];
    if (avg0 == 0.0) return out;

    auto ctx = op.prepare(g, mu);
    const int band = op.truncation_band();

    // partial sums of pieces over the band ancestors, evaluated at the
    // leftmost leaf of the candidate (constant there by the band choice)
    auto truncated_sum = [&](std::int32_t x) {
        std::int32_t leaf = tree.node(x).leaf_begin;
        std::int32_t top = x;
        for (int i = 0; i < band; ++i) {
            top = tree.node(top).parent;
            if (top < 0) return 0.0;  // band starts above the root: vacuous
        }
        // top must still be inside the root's subtree
        const auto& rn = tree.node(root);
        if (tree.node(top).leaf_begin < rn.leaf_begin || tree.node(top).leaf_end > rn.leaf_end)
            return 0.0;
        double acc = 0.0;
        for (std::int32_t a = top; a >= 0; a = tree.node(a).parent) {
            acc += op.piece(*ctx, a, leaf);
            if (a == root) break;
        }
        return acc;
    };

    std::vector<std::int32_t> stack;
    const auto& rn = tree.node(root);
    if (rn.child[0] >= 0) {
        stack.push_back(rn.child[1]);
        stack.push_back(rn.child[0]);
    }
    while (!stack.empty()) {
        std::int32_t x = stack.back();
        stack.pop_back();
        if (abs_stats.average[x] > c1 * avg0) {
            out.cubes.push_back(x);
            out.reasons.push_back(SparseFamily::Reason::Mass);
            out.selected_mass += mu.mass(x);
            continue;
        }
        if (std::abs(truncated_sum(x)) > c2 * avg0) {
            out.cubes.push_back(x);
            out.reasons.push_back(SparseFamily::Reason::Truncation);
            out.selected_mass += mu.mass(x);
            continue;
        }
        const auto& n = tree.node(x);
        if (n.child[0] >= 0) {
            stack.push_back(n.child[1]);
            stack.push_back(n.child[0]);
        }
    }
    return out;
}

struct BuildResult {
    SparseFamily family;
    bool budget_ok = true;
};

BuildResult try_build(const Operator& op, const TreeFunction& f, const MeasureTree& mu,
                      std::int32_t root_node, double c1, double c2, bool enforce_budget) {
    const DyadicTree& tree = f.tree();
    BuildResult res;
    res.family.root = tree.node(root_node).id;
    res.family.c1 = c1;
    res.family.c2 = c2;

    struct Item {
        std::int32_t node;
        int generation;
        SparseFamily::Reason reason;
    };
    std::vector<Item> queue{{root_node, 0, SparseFamily::Reason::Root}};
    std::size_t head = 0;
    while (head < queue.size()) {
        Item item = queue[head++];
        TreeFunction g = localize(f, tree, item.node);
        Selection sel = select_children(op, g, mu, item.node, c1, c2);
        if (enforce_budget && sel.selected_mass > 0.5 * mu.mass(item.node)) {
            res.budget_ok = false;
            return res;
        }
        res.family.members.push_back({tree.node(item.node).id, item.generation, item.reason,
                                      mu.mass(item.node) - sel.selected_mass});
        for (std::size_t i = 0; i < sel.cubes.size(); ++i)
            queue.push_back({sel.cubes[i], item.generation + 1, sel.reasons[i]});
    }
    std::stable_sort(res.family.members.begin(), res.family.members.end(),
                     [](const SparseFamily::Member& a, const SparseFamily::Member& b) {
                         return a.generation < b.generation;
                     });
    return res;
}

}  // namespace

SparseFamily build_sparse(const Operator& op, const TreeFunction& f, const MeasureTree& mu,
                          const NodeId& q0, double c1, double c2, bool auto_calibrate) {
    require_same_tree(f, mu);
    const DyadicTree& tree = f.tree();
    std::int32_t root_node = tree.require(q0);
    const auto& rn = tree.node(root_node);
    for (std::int32_t l = 0; l < static_cast<std::int32_t>(tree.leaf_count()); ++l) {
        if (l >= rn.leaf_begin && l < rn.leaf_end) continue;
        if (f.value(l) != 0.0)
            throw SupportViolationError("f is not supported inside " + to_string(q0));
    }

    if (!auto_calibrate) {
        BuildResult res = try_build(op, f, mu, root_node, c1, c2, false);
        return std::move(res.family);
    }
    double c = std::max(c1, 8.0);
    while (c <= 65536.0) {
        BuildResult res = try_build(op, f, mu, root_node, c, c, true);
        if (res.budget_ok) {
            res.family.auto_calibrated = true;
            return std::move(res.family);
        }
        c *= 2.0;
    }
    throw CalibrationFailedError("sparse calibration exceeded 2^16");
}

SparsityReport verify_sparsity(const SparseFamily& s, const MeasureTree& mu) {
    const DyadicTree& tree = mu.tree();
    SparsityReport rep;
    const std::size_t n = s.members.size();
    std::vector<std::int32_t> idx(n);
    std::vector<double> mass(n);
    for (std::size_t i = 0; i < n; ++i) {
        idx[i] = tree.require(s.members[i].node);
        mass[i] = mu.mass(idx[i]);
        rep.eta = std::min(rep.eta, s.members[i].witness_mass / mass[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        double packed = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (contains(s.members[i].node, s.members[j].node)) packed += mass[j];
        rep.carleson_packing = std::max(rep.carleson_packing, packed / mass[i]);
    }
    if (n >= 1 && n <= 20) {
        // ancestors of each member within the family
        std::vector<std::uint32_t> anc(n, 0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j && contains(s.members[j].node, s.members[i].node))
                    anc[i] |= (1u << j);
        double best = 0.0;
        for (std::uint32_t set = 1; set < (1u << n); ++set) {
            double total = 0.0, cover = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (!(set & (1u << i))) continue;
                total += mass[i];
                if ((anc[i] & set) == 0) cover += mass[i];  // maximal in the subcollection
            }
            best = std::max(best, total / cover);
        }
        rep.carleson_exact = best;
    }
    return rep;
}

namespace {

TreeFunction push_down(const DyadicTree& tree, std::vector<double> node_add,
                       const std::shared_ptr<const DyadicTree>& tree_ptr) {
    for (std::size_t i = 1; i < tree.node_count(); ++i)
        node_add[i] += node_add[tree.node(static_cast<std::int32_t>(i)).parent];
    std::vector<double> out(tree.leaf_count(), 0.0);
    for (std::int32_t l = 0; l < static_cast<std::int32_t>(tree.leaf_count()); ++l)
        out[l] = node_add[tree.leaf_node(l)];
    return TreeFunction(tree_ptr, std::move(out));
}

}  // namespace

TreeFunction sparse_op(const SparseFamily& s, const TreeFunction& f, const MeasureTree& mu) {
    require_same_tree(f, mu);
    const DyadicTree& tree = f.tree();
    std::vector<double> add(tree.node_count(), 0.0);
    for (const auto& m : s.members) {
        std::int32_t q = tree.require(m.node);
        add[q] += average(f, mu, q);
    }
    return push_down(tree, std::move(add), f.tree_ptr());
}

TreeFunction sparse_op_N(const SparseFamily& s, const TreeFunction& f, const MeasureTree& mu,
                         int N, UnresolvedPolicy policy, std::size_t* skipped_pairs) {
    require_same_tree(f, mu);
    const DyadicTree& tree = f.tree();
    const Window& w = tree.window();
    std::vector<double> add(tree.node_count(), 0.0);
    std::size_t skipped = 0;

    const std::size_t n = s.members.size();
    std::vector<std::int32_t> idx(n);
    std::vector<double> avg(n), mval(n);
    std::vector<char> resolved(n);
    for (std::size_t i = 0; i < n; ++i) {
        idx[i] = tree.require(s.members[i].node);
        avg[i] = average(f, mu, idx[i]);
        resolved[i] = !tree.is_leaf(idx[i]);
        mval[i] = resolved[i] ? m_value(mu, idx[i]) : 0.0;
        add[idx[i]] += avg[i];
    }
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            if (tree_distance(w, s.members[j].node, s.members[k].node) > N + 2) continue;
            if (!resolved[j] || !resolved[k]) {
                if (policy == UnresolvedPolicy::Strict)
                    throw UnresolvableNodeError("sparse form needs m(Q) on a leaf member");
                ++skipped;
                continue;
            }
            add[idx[k]] += avg[j] * std::sqrt(mval[j] * mval[k]) / mu.mass(idx[k]);
        }
    }
    if (skipped_pairs) *skipped_pairs = skipped;
    return push_down(tree, std::move(add), f.tree_ptr());
}

TreeFunction sparse_op_H(const SparseFamily& s, const TreeFunction& f, const MeasureTree& mu,
                         UnresolvedPolicy policy, std::size_t* skipped_pairs) {
    require_same_tree(f, mu);
    const DyadicTree& tree = f.tree();
    const Window& w = tree.window();
    std::vector<double> add(tree.node_count(), 0.0);
    std::size_t skipped = 0;

    const std::size_t n = s.members.size();
    std::vector<std::int32_t> idx(n);
    std::vector<double> avg(n);
    for (std::size_t i = 0; i < n; ++i) {
        idx[i] = tree.require(s.members[i].node);
        avg[i] = average(f, mu, idx[i]);
        add[idx[i]] += avg[i];
    }
    auto m_of = [&](std::int32_t node, bool& ok) {
        if (tree.is_leaf(node)) {
            ok = false;
            return 0.0;
        }
        return m_value(mu, node);
    };
    for (std::size_t q = 0; q < n; ++q) {
        const NodeId qid = s.members[q].node;
        for (std::size_t r = 0; r < n; ++r) {
            const NodeId rid = s.members[r].node;
            if (is_top(w, rid)) continue;
            const NodeId rpar = parent(w, rid);
            if (is_top(w, rpar)) continue;
            const NodeId rpar_sib = sibling(w, rpar);

            bool config1 = !is_top(w, qid) && parent(w, qid) == rpar_sib;  // Q^ = (R^)^s
            bool config2 = qid == rpar_sib;                                // Q = (R^)^s
            if (!config1 && !config2) continue;

            bool ok = true;
            double coeff = 0.0;
            std::int32_t rpar_idx = tree.require(rpar);
            double m_rpar = m_of(rpar_idx, ok);
            if (config1) {
                std::int32_t qpar_idx = tree.require(parent(w, qid));
                double m_qpar = m_of(qpar_idx, ok);
                coeff = std::sqrt(m_qpar * m_rpar) / mu.mass(idx[r]);
            } else {
                double m_q = m_of(idx[q], ok);
                coeff = std::sqrt(m_q * m_rpar) / mu.mass(idx[r]);
            }
            if (!ok) {
                if (policy == UnresolvedPolicy::Strict)
                    throw UnresolvableNodeError("sibling sparse form needs an unresolved m(Q)");
                ++skipped;
                continue;
            }
            add[idx[r]] += avg[q] * coeff;
        }
    }
    if (skipped_pairs) *skipped_pairs = skipped;
    return push_down(tree, std::move(add), f.tree_ptr());
}

double check_domination(const TreeFunction& lhs, const TreeFunction& rhs) {
    require_same_tree(lhs, rhs);
    double best = 0.0;
    for (std::size_t l = 0; l < lhs.size(); ++l) {
        double num = std::abs(lhs.value(static_cast<std::int32_t>(l)));
        double den = rhs.value(static_cast<std::int32_t>(l));
        if (den < 0.0) throw ConfigError("check_domination needs rhs >= 0");
        if (num == 0.0) continue;
        if (den == 0.0) return std::numeric_limits<double>::infinity();
        best = std::max(best, num / den);
    }
    return best;
}

std::string reason_name(SparseFamily::Reason r) {
    switch (r) {
        case SparseFamily::Reason::Root: return "root";
        case SparseFamily::Reason::Mass: return "mass";
        case SparseFamily::Reason::Truncation: return "truncation";
    }
    return "?";
}

void save_sparse_csv(const SparseFamily& s, std::ostream& out) {
    out << "generation,level,offset,reason,witness_mass\n";
    char buf[64];
    for (const auto& m : s.members) {
        std::snprintf(buf, sizeof buf, "%.17g", m.witness_mass);
        out << m.generation << ',' << m.node.level << ',' << m.node.offset << ','
            << reason_name(m.reason) << ',' << buf << '\n';
    }
}

}  // namespace dyadic
