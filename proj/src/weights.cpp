#include "dyadic/weights.hpp"

#include <algorithm>
#include <cmath>

#include "dyadic/rng.hpp"

namespace dyadic {

std::string weight_class_name(WeightClass cls) {
    switch (cls) {
        case WeightClass::Dyadic: return "A_p_dyadic";
        case WeightClass::Hat: return "A_p_hat";
        case WeightClass::ComplexityN: return "A_p_N";
        case WeightClass::Balanced: return "A_p_b";
        case WeightClass::Sibling: return "A_p_sib";
    }
    return "?";
}

TreeFunction dual_weight(const TreeFunction& w, double p) {
    if (p <= 1.0) throw BadExponentError("dual weight needs 1 < p < infinity");
    std::vector<double> v(w.size());
    const double e = -1.0 / (p - 1.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
        double x = w.value(static_cast<std::int32_t>(i));
        if (!(x > 0.0)) throw ConfigError("weights must be strictly positive");
        v[i] = std::pow(x, e);
    }
    return TreeFunction(w.tree_ptr(), std::move(v));
}

double weighted_norm(const TreeFunction& f, const TreeFunction& w, const MeasureTree& mu,
                     double p) {
    if (p < 1.0) throw BadExponentError("weighted norm needs p >= 1");
    require_same_tree(f, w);
    require_same_tree(f, mu);
    double acc = 0.0;
    for (std::size_t l = 0; l < f.size(); ++l) {
        std::int32_t i = static_cast<std::int32_t>(l);
        acc += std::pow(std::abs(f.value(i)), p) * w.value(i) * mu.leaf_mass(i);
    }
    return std::pow(acc, 1.0 / p);
}

namespace {

struct PairScanner {
    const DyadicTree& tree;
    const MeasureTree& mu;
    const FunctionStats& ws;
    const FunctionStats& ss;
    double p;
    CharacteristicResult res;

    bool m_of(std::int32_t node, double& out) const {
        if (tree.is_leaf(node)) return false;
        out = m_value(mu, node);
        return true;
    }

    void offer(std::int32_t q, std::int32_t r, double coeff) {
        if (coeff == 0.0) return;
        double v = coeff * ws.average[q] * std::pow(ss.average[r], p - 1.0);
        if (v > res.value) {
            res.value = v;
            res.witness_q = tree.node(q).id;
            res.witness_r = tree.node(r).id;
        }
    }

    /// c_p^b(Q,R): 1 on the diagonal, m(Q)^{p/2} m(R)^{p/2} / (mu(R) mu(Q)^{p-1}) off it.
    void offer_cpb(std::int32_t q, std::int32_t r) {
        if (q == r) {
            offer(q, r, 1.0);
            return;
        }
        double mq, mr;
        if (!m_of(q, mq) || !m_of(r, mr)) {
            ++res.skipped_pairs;
            return;
        }
        double coeff = std::pow(mq, p / 2.0) * std::pow(mr, p / 2.0) /
                       (mu.mass(r) * std::pow(mu.mass(q), p - 1.0));
        offer(q, r, coeff);
    }
};

}  // namespace

CharacteristicResult characteristic(const TreeFunction& w, const MeasureTree& mu, double p,
                                    WeightClass cls, int N) {
    if (p <= 1.0) throw BadExponentError("weight characteristic needs 1 < p < infinity");
    require_same_tree(w, mu);
    const DyadicTree& tree = w.tree();
    TreeFunction sigma = dual_weight(w, p);
    FunctionStats ws = compute_stats(w, mu);
    FunctionStats ss = compute_stats(sigma, mu);
    PairScanner scan{tree, mu, ws, ss, p, {}};

    const std::size_t Ncount = tree.node_count();
    for (std::size_t qi = 0; qi < Ncount; ++qi) {
        std::int32_t q = static_cast<std::int32_t>(qi);
        const auto& n = tree.node(q);
        switch (cls) {
            case WeightClass::Dyadic:
                scan.offer(q, q, 1.0);
                break;
            case WeightClass::Hat: {
                scan.offer(q, q, 1.0);
                if (n.parent >= 0) scan.offer(q, n.parent, 1.0);
                if (n.child[0] >= 0) {
                    scan.offer(q, n.child[0], 1.0);
                    scan.offer(q, n.child[1], 1.0);
                }
                break;
            }
            case WeightClass::ComplexityN: {
                // breadth-first ball of radius N+2 in the tree graph
                std::vector<std::int32_t> frontier{q}, next;
                std::vector<std::int32_t> seen{q};
                scan.offer_cpb(q, q);
                for (int step = 0; step < N + 2; ++step) {
                    next.clear();
                    for (std::int32_t x : frontier) {
                        const auto& xn = tree.node(x);
                        std::int32_t nb[3] = {xn.parent, xn.child[0], xn.child[1]};
                        for (std::int32_t y : nb) {
                            if (y < 0) continue;
                            if (std::find(seen.begin(), seen.end(), y) != seen.end()) continue;
                            seen.push_back(y);
                            next.push_back(y);
                            scan.offer_cpb(q, y);
                        }
                    }
                    frontier.swap(next);
                }
                break;
            }
            case WeightClass::Balanced: {
                scan.offer_cpb(q, q);
                if (n.parent < 0) break;
                std::int32_t sib = tree.sibling_of(q);
                scan.offer_cpb(q, sib);  // R in ch(Q^), R != Q
                const auto& pn = tree.node(n.parent);
                if (pn.parent >= 0) {
                    scan.offer_cpb(q, n.parent);  // R in ch(Q^(2))
                    scan.offer_cpb(q, tree.sibling_of(n.parent));
                }
                // Q in ch(R^(2)): R ranges over the children of Q and of Q^s
                for (std::int32_t base : {q, sib}) {
                    const auto& bn = tree.node(base);
                    if (bn.child[0] >= 0) {
                        scan.offer_cpb(q, bn.child[0]);
                        scan.offer_cpb(q, bn.child[1]);
                    }
                }
                break;
            }
            case WeightClass::Sibling: {
                scan.offer(q, q, 1.0);  // c_p = 1 on the diagonal
                // configurations keyed on R: Q^ = (R^)^s and Q = (R^)^s
                std::int32_t r = q;
                const auto& rn = tree.node(r);
                if (rn.parent < 0) break;
                std::int32_t rpar = rn.parent;
                std::int32_t rpar_sib = tree.sibling_of(rpar);
                if (rpar_sib < 0) break;
                double m_rpar = m_value(mu, rpar);

                // Q = (R^)^s
                {
                    std::int32_t qq = rpar_sib;
                    double mq;
                    if (!scan.m_of(qq, mq)) {
                        ++scan.res.skipped_pairs;
                    } else {
                        double coeff = std::pow(mq / mu.mass(qq), p - 1.0) * m_rpar / mu.mass(r);
                        scan.offer(qq, r, coeff);
                    }
                }
                // Q^ = (R^)^s: Q ranges over the children of (R^)^s
                if (!tree.is_leaf(rpar_sib)) {
                    double m_qpar = m_value(mu, rpar_sib);
                    for (int side = 0; side < 2; ++side) {
                        std::int32_t qq = tree.node(rpar_sib).child[side];
                        double coeff =
                            std::pow(m_qpar / mu.mass(r), p - 1.0) * m_rpar / mu.mass(r);
                        scan.offer(qq, r, coeff);
                    }
                } else {
                    ++scan.res.skipped_pairs;
                }
                break;
            }
        }
    }
    return scan.res;
}

WeightReport weight_report(const TreeFunction& w, const MeasureTree& mu, double p, int N) {
    WeightReport rep;
    rep.p = p;
    rep.N = N;
    rep.ap_dyadic = characteristic(w, mu, p, WeightClass::Dyadic);
    rep.ap_hat = characteristic(w, mu, p, WeightClass::Hat);
    rep.ap_n = characteristic(w, mu, p, WeightClass::ComplexityN, N);
    rep.ap_b = characteristic(w, mu, p, WeightClass::Balanced);
    rep.ap_sib = characteristic(w, mu, p, WeightClass::Sibling);
    return rep;
}

TreeFunction ladder_weight(const std::shared_ptr<const DyadicTree>& tree, double s) {
    // b0(leaf) = index of the dyadic shell [2^{J-k-1}, 2^{J-k}) containing the
    // leaf (0 on the right half of the window, deeper shells toward 0)
    const Window& w = tree->window();
    std::vector<double> v(tree->leaf_count());
    for (std::size_t l = 0; l < v.size(); ++l) {
        const NodeId id = tree->node(tree->leaf_node(static_cast<std::int32_t>(l))).id;
        int rel = id.level - w.floor_level();
        std::uint64_t pos = id.offset << rel;  // in units of the floor scale
        int shell = pos == 0 ? w.depth : w.depth - 1 - (63 - __builtin_clzll(pos));
        v[l] = std::exp(s * shell);
    }
    return TreeFunction(tree, std::move(v));
}

std::vector<WeightedRatioRow> weighted_ratio_experiment(
    const Operator& op, const MeasureTree& mu, double p, WeightedShape shape,
    const std::vector<double>& ladder, int trials, std::uint64_t seed,
    double bmo_norm_of_symbol, int complexity_N) {
    const auto tree = mu.tree_ptr();
    const double dual_exp = std::max(1.0, 1.0 / (p - 1.0));
    std::vector<WeightedRatioRow> rows;

    for (double s : ladder) {
        TreeFunction w = ladder_weight(tree, s);
        WeightedRatioRow row;
        row.ladder_s = s;
        row.characteristic_dyadic = characteristic(w, mu, p, WeightClass::Dyadic).value;
        double main = 0.0;
        switch (shape) {
            case WeightedShape::Paraproduct:
                main = row.characteristic_dyadic;
                row.shape = bmo_norm_of_symbol * std::pow(row.characteristic_dyadic, dual_exp);
                break;
            case WeightedShape::ShiftComplexityN:
                main = characteristic(w, mu, p, WeightClass::ComplexityN, complexity_N).value;
                row.shape = std::pow(row.characteristic_dyadic, 1.0 + 1.0 / (p - 1.0) - 2.0 / p) *
                            std::pow(main, 1.0 / p);
                break;
            case WeightedShape::ShiftL1Normalized:
                main = row.characteristic_dyadic;
                row.shape = std::pow(row.characteristic_dyadic, dual_exp);
                break;
            case WeightedShape::CommutatorShift:
                main = characteristic(w, mu, p, WeightClass::Balanced).value;
                row.shape =
                    std::pow(row.characteristic_dyadic,
                             1.0 + 1.0 / (p - 1.0) - 2.0 / p + dual_exp) *
                    std::pow(main, std::pow(2.0, complexity_N - 1) / p) * bmo_norm_of_symbol;
                break;
            case WeightedShape::CommutatorHilbert:
                main = characteristic(w, mu, p, WeightClass::Sibling).value;
                row.shape =
                    std::pow(row.characteristic_dyadic,
                             1.0 + 1.0 / (p - 1.0) - 2.0 / p + dual_exp) *
                    std::pow(main, 1.0 / p) * bmo_norm_of_symbol;
                break;
        }
        row.characteristic_main = main;

        for (int t = 0; t < trials; ++t) {
            TreeFunction f = random_signed(tree, derive_seed(seed, 1000 * t + 17));
            double denom = weighted_norm(f, w, mu, p);
            if (denom == 0.0) continue;
            TreeFunction g = op.apply(f, mu);
            row.empirical = std::max(row.empirical, weighted_norm(g, w, mu, p) / denom);
        }
        row.ratio = row.shape > 0.0 ? row.empirical / row.shape : 0.0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace dyadic
