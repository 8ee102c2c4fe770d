#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dyadic/symbols.hpp"
#include "dyadic/tree_function.hpp"

namespace dyadic {

struct CoefficientOutOfRangeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

class Operator;
using OperatorPtr = std::shared_ptr<const Operator>;

/// A dyadic operator T = sum_Q T_Q. Every variant exposes its per-node pieces
/// [T_Q f](x), which is what the maximal truncation and the sparse stopping
/// time consume; apply() just sums the pieces along each leaf's ancestor
/// chain. Operators are bound to the tree of the symbol/signs they carry.
class Operator {
public:
    virtual ~Operator() = default;

    virtual std::string describe() const = 0;

    /// Pieces of the operator are constant this many levels below Q; the
    /// sparse stopping sums start at the ancestor this far above a candidate.
    virtual int truncation_band() const { return 1; }

    struct Context {
        virtual ~Context() = default;
    };
    virtual std::unique_ptr<Context> prepare(const TreeFunction& f,
                                             const MeasureTree& mu) const = 0;

    /// [T_Q f](leaf). `node` must be an ancestor-or-self of the leaf's node.
    virtual double piece(const Context& ctx, std::int32_t node, std::int32_t leaf) const = 0;

    virtual TreeFunction apply(const TreeFunction& f, const MeasureTree& mu) const;

    virtual OperatorPtr adjoint() const = 0;
};

/// Pi_b f = sum_Q <f>_Q Delta_Q b.
OperatorPtr make_paraproduct(TreeFunction b);
/// Pi*_b f = sum_Q E_Q(Delta_Q b Delta_Q f), the L^2(mu) adjoint of Pi_b.
OperatorPtr make_adjoint_paraproduct(TreeFunction b);
/// Delta_b f = sum_Q Delta_Q b Delta_Q f.
OperatorPtr make_delta_b(TreeFunction b);
/// Lambda0_b f = sum_Q <b>_Q Delta_Q f.
OperatorPtr make_lambda0(TreeFunction b);
/// Lambda_b f = sum_Q Delta_Q(b Delta_Q f) = sum_Q c_Q <f,h_Q> h_Q.
OperatorPtr make_lambda(TreeFunction b);
/// Martingale transform sum_Q eps_Q Delta_Q f, eps in {-1,0,+1} per node.
OperatorPtr make_martingale_transform(std::shared_ptr<const DyadicTree> tree,
                                      std::vector<std::int8_t> signs);
/// Dyadic Hilbert transform h_Q -> sign(Q) h_{Q^s}; sign(Q) = +1 on left
/// children. Sums over Q below the top with both Q and Q^s internal.
OperatorPtr make_hilbert(std::shared_ptr<const DyadicTree> tree);
/// Identity (norm-estimation baseline).
OperatorPtr make_identity(std::shared_ptr<const DyadicTree> tree);

/// Coefficient callback of a generalized Haar shift; |value| <= 1 required.
using ShiftCoeff = std::function<double(const NodeId& q, const NodeId& j, const NodeId& k)>;

struct HaarShiftSpec {
    int s = 0;  // J in D_s(Q)
    int t = 0;  // K in D_t(Q)
    ShiftCoeff coeff;
    bool l1_normalized = false;
    double kappa = 1.0;  // kernel bound kappa/mu(Q) in normalized mode
};
OperatorPtr make_haar_shift(std::shared_ptr<const DyadicTree> tree, HaarShiftSpec spec);

/// Uniform-coefficient shift (every admissible pair gets coefficient 1).
OperatorPtr make_uniform_shift(std::shared_ptr<const DyadicTree> tree, int s, int t,
                               bool l1_normalized = false);

/// [T, b] f = T(bf) - b T(f).
OperatorPtr make_commutator(OperatorPtr inner, TreeFunction b);
OperatorPtr make_sum(std::vector<OperatorPtr> parts);

/// outer(inner(f)), scaled. Compositions support apply/adjoint/norms but have
/// no per-node pieces, so they cannot feed the maximal truncation or the
/// sparse stopping time.
OperatorPtr make_composition(OperatorPtr outer, OperatorPtr inner, double scale = 1.0);
/// A B - B A.
OperatorPtr make_operator_bracket(OperatorPtr a, OperatorPtr b);

/// Shift coefficient CSV: q_level,q_offset,j_level,j_offset,k_level,k_offset,coeff.
ShiftCoeff load_shift_coeffs_csv(std::istream& in);

/// Residuals of the two product decompositions
/// b f = coarse + Pi_b f + Pi*_b f + Lambda_b f
///     = coarse + Pi_b f + Delta_b f + Lambda0_b f,
/// where coarse = <b>_root <f>_root on the window.
struct ProductDecomposition {
    TreeFunction via_lambda;   // coarse + Pi + Pi* + Lambda
    TreeFunction via_lambda0;  // coarse + Pi + Delta + Lambda0
    double residual_lambda = 0.0;   // max |bf - via_lambda| / scale
    double residual_lambda0 = 0.0;  // max |bf - via_lambda0| / scale
};
ProductDecomposition decompose_product(const TreeFunction& b, const TreeFunction& f,
                                       const MeasureTree& mu);

/// Commutator value plus its three-term split [T,Pi_b]+[T,Delta_b]+[T,Lambda0_b]
/// (the split differs from [T,b] by the rank-one coarse terms, reported).
struct CommutatorParts {
    TreeFunction full;          // T(bf) - b T(f)
    TreeFunction via_pi;        // [T, Pi_b] f
    TreeFunction via_delta;     // [T, Delta_b] f
    TreeFunction via_lambda0;   // [T, Lambda0_b] f
    double split_residual = 0.0;  // max |full - (sum of parts + coarse corr)|
};
CommutatorParts commutator_parts(const OperatorPtr& op, const TreeFunction& b,
                                 const TreeFunction& f, const MeasureTree& mu);

/// T^# f(x) = sup over nodes Q0 containing x of |sum_{Q0 strictly inside Q} T_Q f(x)|.
TreeFunction maximal_truncation(const Operator& op, const TreeFunction& f,
                                const MeasureTree& mu);

/// Nonhomogeneous Calderon-Zygmund decomposition at height lambda on Q0.
struct CZDecomposition {
    TreeFunction good;
    struct BadPart {
        NodeId cube;           // Q_k
        TreeFunction part;     // f 1_{Q_k} - <f 1_{Q_k}>_{parent} 1_{parent}
    };
    std::vector<BadPart> bad;
    double lambda = 0.0;
    double selected_mass = 0.0;  // sum of mu(Q_k)
};
CZDecomposition cz_decompose(const TreeFunction& f, const MeasureTree& mu, const NodeId& q0,
                             double lambda);

}  // namespace dyadic
