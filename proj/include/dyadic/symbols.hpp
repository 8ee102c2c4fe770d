#pragma once

#include <map>
#include <vector>

#include "dyadic/tree_function.hpp"

namespace dyadic {

/// b = sum_k alpha_k h_{I_k} with alpha_k = k^{-1/2} mu(I_k)^{1/2} on the
/// lsmp measure: Carleson-packed but with divergent sup-norm packing sum.
TreeFunction symbol_alpha(const MeasureTree& mu);

/// f_p = (n+2)^{1/p} on the b-side of the first sibling pair inside I_{n+1}^b
/// of unit cell n (n >= 1), zero elsewhere; twist measure only. Support cells
/// that the tree does not resolve are folded into the containing leaf by
/// conditional expectation.
TreeFunction symbol_fp(const MeasureTree& mu, double p);

/// q = u_k on I_k^b in every unit cell, with the tail leaf of the a-chain set
/// to v_S so that <q>_{I_k} = v_k exactly on every resolved node.
TreeFunction symbol_q(const MeasureTree& mu);

/// Recursion values of the q symbol: v_1 = 1, v_k = v_{k-1} + b_k (-1)^k ln k;
/// u_1 = 0, u_k = v_{k-1} - a_k (-1)^k ln k.
double symbol_q_v(int k);
double symbol_q_u(int k);

/// Oscillation/packing norms of a symbol and the beta sequence diagnostics.
struct SymbolReport {
    std::map<double, double> bmo_norm;  // sup over all Q, centered at <b>_Q
    std::map<double, double> BMO_norm;  // sup over non-top Q, centered at <b>_{parent}
    double carleson_norm = 0.0;         // sup_Q (sum_{R<=Q} |Delta_R b|_2^2 / mu(Q))^{1/2}
    double lacey_packing = 0.0;         // sup_Q sum_{R<=Q} |Delta_R b|_inf^2 mu(R) / mu(Q)
    double delta_sup = 0.0;             // sup_Q |Delta_Q b|_inf
    double beta_sup = 0.0;              // sup |c_Q - c_{Q^s}|
    double max_cq_mismatch = 0.0;       // disagreement of the two c_Q formulas
    struct BetaEntry {
        NodeId node;
        double c_q;
        double c_sibling;
        double beta;
    };
    std::vector<BetaEntry> beta_table;  // rows with beta != 0 only

    /// beta of a specific node; rows omitted from the table are zero.
    double beta_at(const NodeId& q) const {
        for (const auto& e : beta_table)
            if (e.node == q) return e.beta;
        return 0.0;
    }
};

/// c_Q = <b, h_Q^2>_{L^2(mu)} evaluated from the averages of b:
/// (<b>_{Q+} - <b>_{Q-}) (mu(Q-) - mu(Q+)) / mu(Q) + <b>_Q.
double c_coefficient(const TreeFunction& b, const MeasureTree& mu, std::int32_t node);
/// The same coefficient as a direct leaf-sum integral of b h_Q^2.
double c_coefficient_integral(const TreeFunction& b, const MeasureTree& mu, std::int32_t node);

SymbolReport symbol_report(const TreeFunction& b, const MeasureTree& mu,
                           const std::vector<double>& p_list);

}  // namespace dyadic
