#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dyadic/operators.hpp"

namespace dyadic {

/// Family of stopping cubes produced by the sparse construction, organized by
/// generation. Each member owns the part of itself not covered by its
/// selected children (the witness set), so witnesses are pairwise disjoint by
/// construction.
struct SparseFamily {
    enum class Reason { Root, Mass, Truncation };
    struct Member {
        NodeId node;
        int generation = 0;
        Reason reason = Reason::Root;
        double witness_mass = 0.0;
    };
    NodeId root{};
    std::vector<Member> members;  // generation-major order, root first
    double c1 = 0.0;              // stopping constants actually used
    double c2 = 0.0;
    bool auto_calibrated = false;

    std::size_t size() const { return members.size(); }
};

/// Runs the stopping-time construction for T = sum_Q T_Q on f localized to
/// q0. A descendant is selected when its |f|-average exceeds c1 times the
/// root average, or when the truncated operator sum over the ancestor band
/// exceeds c2 times the root average (the band starts truncation_band()
/// levels up so the sum is constant on the candidate). Selection recurses
/// with f relocalized to each selected cube.
///
/// With auto_calibrate the two constants start at 8 and double until every
/// generation keeps at most half of its parent's mass, which makes the
/// family 1/2-sparse by construction; CalibrationFailedError past 2^16.
SparseFamily build_sparse(const Operator& op, const TreeFunction& f, const MeasureTree& mu,
                          const NodeId& q0, double c1 = 8.0, double c2 = 8.0,
                          bool auto_calibrate = true);

struct SparsityReport {
    double eta = 1.0;               // min mu(E_Q)/mu(Q)
    double carleson_packing = 0.0;  // sup_Q sum_{R in S, R subset Q} mu(R)/mu(Q)
    std::optional<double> carleson_exact;  // brute force over subcollections, |S| <= 20
};
SparsityReport verify_sparsity(const SparseFamily& s, const MeasureTree& mu);

/// How to treat cross terms whose m(.) needs children the tree lacks.
enum class UnresolvedPolicy { Strict, Skip };

/// A_S f = sum_{Q in S} <f>_Q 1_Q.
TreeFunction sparse_op(const SparseFamily& s, const TreeFunction& f, const MeasureTree& mu);

/// A^N_S adds the cross terms <f>_J sqrt(m(J) m(K)) / mu(K) 1_K over member
/// pairs at tree distance <= N+2.
TreeFunction sparse_op_N(const SparseFamily& s, const TreeFunction& f, const MeasureTree& mu,
                         int N, UnresolvedPolicy policy = UnresolvedPolicy::Strict,
                         std::size_t* skipped_pairs = nullptr);

/// E_S = A_S plus the sibling-configuration terms
///   parent(Q) = sibling(parent(R)):  <f>_Q sqrt(m(Q^)m(R^))/mu(R) 1_R
///   Q = sibling(parent(R)):          <f>_Q sqrt(m(Q)m(R^))/mu(R) 1_R.
TreeFunction sparse_op_H(const SparseFamily& s, const TreeFunction& f, const MeasureTree& mu,
                         UnresolvedPolicy policy = UnresolvedPolicy::Strict,
                         std::size_t* skipped_pairs = nullptr);

/// Smallest C with |lhs| <= C rhs at every leaf; +infinity when rhs vanishes
/// somewhere lhs does not.
double check_domination(const TreeFunction& lhs, const TreeFunction& rhs);

void save_sparse_csv(const SparseFamily& s, std::ostream& out);
std::string reason_name(SparseFamily::Reason r);

}  // namespace dyadic
