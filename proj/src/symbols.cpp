#include "dyadic/symbols.hpp"

#include <algorithm>
#include <cmath>

namespace dyadic {

TreeFunction symbol_alpha(const MeasureTree& mu) {
    if (mu.kind() != MeasureKind::Lsmp)
        throw WrongMeasureError("symbol_alpha needs the lsmp measure");
    const DyadicTree& tree = mu.tree();
    const Window& w = mu.window();
    const int S = mu.struct_depth();
    std::vector<double> v(tree.leaf_count(), 0.0);
    for (int k = 1; k < S; ++k) {
        std::int32_t node = tree.find(cell_layout::Ik(w, 1, k));
        if (node < 0 || tree.is_leaf(node)) break;
        double alpha = std::sqrt(mu.mass(node) / k);
        auto [vl, vr] = haar_values(mu, node);
        const auto& n = tree.node(node);
        const auto& lc = tree.node(n.child[0]);
        const auto& rc = tree.node(n.child[1]);
        for (std::int32_t l = lc.leaf_begin; l < lc.leaf_end; ++l) v[l] += alpha * vl;
        for (std::int32_t l = rc.leaf_begin; l < rc.leaf_end; ++l) v[l] += alpha * vr;
    }
    return TreeFunction(mu.tree_ptr(), std::move(v));
}

TreeFunction symbol_fp(const MeasureTree& mu, double p) {
    if (p <= 1.0) throw BadExponentError("symbol_fp needs p > 1");
    if (mu.kind() != MeasureKind::Twist)
        throw WrongMeasureError("symbol_fp needs the twist measure");
    const DyadicTree& tree = mu.tree();
    const Window& w = mu.window();
    const int S = mu.struct_depth();
    const int cells = w.top_level >= 0 ? (1 << w.top_level) : 0;

    std::vector<double> v(tree.leaf_count(), 0.0);
    for (int n = 1; n <= cells; ++n) {
        const int k = n + 1;  // support lives on (I_{k,1})^b of cell n
        const double value = std::pow(n + 2.0, 1.0 / p);
        if (k + 1 <= S) {
            std::int32_t node = tree.require(cell_layout::Ikjb(w, n, k, 1));
            const auto& nd = tree.node(node);
            for (std::int32_t l = nd.leaf_begin; l < nd.leaf_end; ++l) v[l] = value;
        } else {
            // support not resolved: fold its mass into the containing leaf
            NodeId probe = k <= S ? cell_layout::Ikjb(w, n, k, 1) : cell_layout::Ik(w, n, S);
            std::int32_t node = tree.find(probe);
            while (node < 0) {
                probe = NodeId{probe.level + 1, probe.offset >> 1};
                node = tree.find(probe);
            }
            std::int32_t leaf = tree.node(node).leaf_begin;
            double support_mass = twist_form::mass_Ikjb(k, 1);
            v[leaf] += value * support_mass / mu.leaf_mass(leaf);
        }
    }
    return TreeFunction(mu.tree_ptr(), std::move(v));
}

double symbol_q_v(int k) {
    double v = 1.0;
    for (int i = 2; i <= k; ++i)
        v += twist_form::b(i) * (i % 2 == 0 ? 1.0 : -1.0) * std::log(static_cast<double>(i));
    return v;
}

double symbol_q_u(int k) {
    if (k == 1) return 0.0;
    return symbol_q_v(k - 1) -
           twist_form::a(k) * (k % 2 == 0 ? 1.0 : -1.0) * std::log(static_cast<double>(k));
}

TreeFunction symbol_q(const MeasureTree& mu) {
    if (mu.kind() != MeasureKind::Twist)
        throw WrongMeasureError("symbol_q needs the twist measure");
    const DyadicTree& tree = mu.tree();
    const Window& w = mu.window();
    const int S = mu.struct_depth();
    const int cells = w.top_level >= 0 ? (1 << w.top_level) : 0;

    std::vector<double> v(tree.leaf_count(), 0.0);
    std::vector<double> u(S + 1);
    double vk = 1.0;  // v_1
    u[1] = 0.0;
    for (int k = 2; k <= S; ++k) {
        double sgnlog = (k % 2 == 0 ? 1.0 : -1.0) * std::log(static_cast<double>(k));
        u[k] = vk - twist_form::a(k) * sgnlog;
        vk += twist_form::b(k) * sgnlog;
    }
    const double v_tail = vk;  // v_S, the conditional expectation on the chain tail

    for (int n = 1; n <= cells; ++n) {
        for (int k = 1; k <= S; ++k) {
            std::int32_t node = tree.require(cell_layout::Ikb(w, n, k));
            const auto& nd = tree.node(node);
            for (std::int32_t l = nd.leaf_begin; l < nd.leaf_end; ++l) v[l] = u[k];
        }
        std::int32_t tail = tree.require(cell_layout::Ik(w, n, S));
        v[tree.node(tail).leaf_begin] = v_tail;
    }
    return TreeFunction(mu.tree_ptr(), std::move(v));
}

double c_coefficient(const TreeFunction& b, const MeasureTree& mu, std::int32_t node) {
    const auto& n = b.tree().node(node);
    if (n.child[0] < 0) throw LeafNodeError("c_Q undefined on leaf " + to_string(n.id));
    double al = average(b, mu, n.child[0]);
    double ar = average(b, mu, n.child[1]);
    double ml = mu.mass(n.child[0]);
    double mr = mu.mass(n.child[1]);
    return (ar - al) * (ml - mr) / mu.mass(node) + average(b, mu, node);
}

double c_coefficient_integral(const TreeFunction& b, const MeasureTree& mu, std::int32_t node) {
    const auto& n = b.tree().node(node);
    if (n.child[0] < 0) throw LeafNodeError("c_Q undefined on leaf " + to_string(n.id));
    auto [vl, vr] = haar_values(mu, node);
    double acc = 0.0;
    for (int side = 0; side < 2; ++side) {
        const auto& c = b.tree().node(n.child[side]);
        double h2 = side == 0 ? vl * vl : vr * vr;
        for (std::int32_t l = c.leaf_begin; l < c.leaf_end; ++l)
            acc += b.value(l) * h2 * mu.leaf_mass(l);
    }
    return acc;
}

SymbolReport symbol_report(const TreeFunction& b, const MeasureTree& mu,
                           const std::vector<double>& p_list) {
    require_same_tree(b, mu);
    const DyadicTree& tree = b.tree();
    FunctionStats bs = compute_stats(b, mu);
    SymbolReport rep;

    const auto& nodes = tree.nodes();
    const std::size_t N = nodes.size();

    // packing sums accumulated from the leaves upward
    std::vector<double> sum_l2(N, 0.0), sum_inf(N, 0.0);
    for (std::size_t i = N; i-- > 0;) {
        const auto& n = nodes[i];
        if (n.child[0] < 0) continue;
        double e2 = 0.0, einf = 0.0;
        for (int side = 0; side < 2; ++side) {
            std::int32_t c = n.child[side];
            double diff = bs.average[c] - bs.average[i];
            e2 += diff * diff * mu.mass(c);
            einf = std::max(einf, std::abs(diff));
        }
        rep.delta_sup = std::max(rep.delta_sup, einf);
        sum_l2[i] = e2 + sum_l2[n.child[0]] + sum_l2[n.child[1]];
        sum_inf[i] = einf * einf * mu.mass(static_cast<std::int32_t>(i)) + sum_inf[n.child[0]] +
                     sum_inf[n.child[1]];
    }
    double carleson_sq = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        double m = mu.mass(static_cast<std::int32_t>(i));
        carleson_sq = std::max(carleson_sq, sum_l2[i] / m);
        rep.lacey_packing = std::max(rep.lacey_packing, sum_inf[i] / m);
    }
    rep.carleson_norm = std::sqrt(carleson_sq);

    // oscillation norms
    for (double p : p_list) {
        if (p < 1.0) throw BadExponentError("symbol_report needs p >= 1");
        const bool square = p == 2.0;
        double bmo_p = 0.0, BMO_p = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const auto& n = nodes[i];
            double own = 0.0;
            double c_own = bs.average[i];
            double c_par = n.parent >= 0 ? bs.average[n.parent] : 0.0;
            double par = 0.0;
            for (std::int32_t l = n.leaf_begin; l < n.leaf_end; ++l) {
                double lm = mu.leaf_mass(l);
                double bv = b.value(l);
                double d1 = bv - c_own;
                own += (square ? d1 * d1 : std::pow(std::abs(d1), p)) * lm;
                if (n.parent >= 0) {
                    double d2 = bv - c_par;
                    par += (square ? d2 * d2 : std::pow(std::abs(d2), p)) * lm;
                }
            }
            double m = mu.mass(static_cast<std::int32_t>(i));
            bmo_p = std::max(bmo_p, own / m);
            if (n.parent >= 0) BMO_p = std::max(BMO_p, par / m);
        }
        rep.bmo_norm[p] = std::pow(bmo_p, 1.0 / p);
        rep.BMO_norm[p] = std::pow(BMO_p, 1.0 / p);
    }

    // beta sequence over nodes whose sibling is also internal; c_Q comes from
    // the average form, with the direct integral kept as a consistency check
    auto c_from_stats = [&](std::int32_t i) {
        const auto& n = nodes[i];
        double al = bs.average[n.child[0]], ar = bs.average[n.child[1]];
        double ml = mu.mass(n.child[0]), mr = mu.mass(n.child[1]);
        return (ar - al) * (ml - mr) / mu.mass(i) + bs.average[i];
    };
    std::vector<double> c_int(N, 0.0);
    for (std::size_t i = N; i-- > 0;) {
        const auto& n = nodes[i];
        if (n.child[0] < 0) continue;
        auto [vl, vr] = haar_values(mu, static_cast<std::int32_t>(i));
        c_int[i] = vl * vl * bs.integral[n.child[0]] + vr * vr * bs.integral[n.child[1]];
    }
    for (std::size_t i = 0; i < N; ++i) {
        const auto& n = nodes[i];
        if (n.child[0] < 0 || n.parent < 0) continue;
        std::int32_t sib = tree.sibling_of(static_cast<std::int32_t>(i));
        if (tree.is_leaf(sib)) continue;
        double cq = c_from_stats(static_cast<std::int32_t>(i));
        rep.max_cq_mismatch = std::max(rep.max_cq_mismatch, std::abs(cq - c_int[i]));
        double cs = c_from_stats(sib);
        double beta = cq - cs;
        rep.beta_sup = std::max(rep.beta_sup, std::abs(beta));
        if (beta != 0.0) rep.beta_table.push_back({n.id, cq, cs, beta});
    }
    return rep;
}

}  // namespace dyadic
