#include "dyadic/operators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace dyadic {

namespace {

double sign_of(const NodeId& q) { return is_left_child(q) ? 1.0 : -1.0; }

/// Value of h_Q at a leaf strictly below internal node `q`.
double haar_at(const MeasureTree& mu, std::int32_t q, std::int32_t leaf) {
    const DyadicTree& tree = mu.tree();
    std::int32_t child = tree.child_toward_leaf(q, leaf);
    double root_m = std::sqrt(m_value(mu, q));
    return (tree.node(q).child[0] == child ? -root_m : root_m) / mu.mass(child);
}

struct BaseContext : Operator::Context {
    const MeasureTree* mu = nullptr;
    const TreeFunction* f = nullptr;
    FunctionStats fs;
};

}  // namespace

TreeFunction Operator::apply(const TreeFunction& f, const MeasureTree& mu) const {
    require_same_tree(f, mu);
    auto ctx = prepare(f, mu);
    const DyadicTree& tree = f.tree();
    std::vector<double> out(tree.leaf_count(), 0.0);
    for (std::size_t l = 0; l < tree.leaf_count(); ++l) {
        std::int32_t leaf = static_cast<std::int32_t>(l);
        double acc = 0.0;
        for (std::int32_t node = tree.leaf_node(leaf); node >= 0;
             node = tree.node(node).parent)
            acc += piece(*ctx, node, leaf);
        out[l] = acc;
    }
    return TreeFunction(f.tree_ptr(), std::move(out));
}

// ---------------------------------------------------------------------------
// paraproduct family

namespace {

struct SymbolContext : BaseContext {
    FunctionStats bs;
};

class SymbolOperator : public Operator {
public:
    explicit SymbolOperator(TreeFunction b) : b_(std::move(b)) {}

    std::unique_ptr<Context> prepare(const TreeFunction& f, const MeasureTree& mu) const override {
        require_same_tree(f, mu);
        require_same_tree(b_, mu);
        auto ctx = std::make_unique<SymbolContext>();
        ctx->mu = &mu;
        ctx->f = &f;
        ctx->fs = compute_stats(f, mu);
        ctx->bs = compute_stats(b_, mu);
        return ctx;
    }

    const TreeFunction& symbol() const { return b_; }

protected:
    TreeFunction b_;
};

class Paraproduct final : public SymbolOperator {
public:
    using SymbolOperator::SymbolOperator;
    std::string describe() const override { return "Pi_b"; }
    double piece(const Context& c, std::int32_t node, std::int32_t leaf) const override {
        const auto& ctx = static_cast<const SymbolContext&>(c);
        const DyadicTree& tree = b_.tree();
        if (tree.is_leaf(node)) return 0.0;
        std::int32_t r = tree.child_toward_leaf(node, leaf);
        return ctx.fs.average[node] * (ctx.bs.average[r] - ctx.bs.average[node]);
    }
    OperatorPtr adjoint() const override { return make_adjoint_paraproduct(b_); }
};

class AdjointParaproduct final : public SymbolOperator {
public:
    using SymbolOperator::SymbolOperator;
    std::string describe() const override { return "Pi*_b"; }

    struct Ctx : SymbolContext {
        std::vector<double> mean;  // E_Q(Delta_Q b Delta_Q f) per node
    };
    std::unique_ptr<Context> prepare(const TreeFunction& f, const MeasureTree& mu) const override {
        auto base = SymbolOperator::prepare(f, mu);
        auto& sctx = static_cast<SymbolContext&>(*base);
        auto ctx = std::make_unique<Ctx>();
        static_cast<SymbolContext&>(*ctx) = std::move(sctx);
        const DyadicTree& tree = b_.tree();
        ctx->mean.assign(tree.node_count(), 0.0);
        for (std::size_t i = 0; i < tree.node_count(); ++i) {
            const auto& n = tree.node(static_cast<std::int32_t>(i));
            if (n.child[0] < 0) continue;
            double acc = 0.0;
            for (int side = 0; side < 2; ++side) {
                std::int32_t r = n.child[side];
                acc += (ctx->bs.average[r] - ctx->bs.average[i]) *
                       (ctx->fs.average[r] - ctx->fs.average[i]) * mu.mass(r);
            }
            ctx->mean[i] = acc / mu.mass(static_cast<std::int32_t>(i));
        }
        return ctx;
    }
    double piece(const Context& c, std::int32_t node, std::int32_t leaf) const override {
        (void)leaf;
        return static_cast<const Ctx&>(c).mean[node];
    }
    OperatorPtr adjoint() const override { return make_paraproduct(b_); }
};

class DeltaB final : public SymbolOperator {
public:
    using SymbolOperator::SymbolOperator;
    std::string describe() const override { return "Delta_b"; }
    double piece(const Context& c, std::int32_t node, std::int32_t leaf) const override {
        const auto& ctx = static_cast<const SymbolContext&>(c);
        const DyadicTree& tree = b_.tree();
        if (tree.is_leaf(node)) return 0.0;
        std::int32_t r = tree.child_toward_leaf(node, leaf);
        return (ctx.bs.average[r] - ctx.bs.average[node]) *
               (ctx.fs.average[r] - ctx.fs.average[node]);
    }
    OperatorPtr adjoint() const override;
};

/// g -> sum_Q Delta_Q(Delta_Q b g) = sum_Q <Delta_Q b g, h_Q> h_Q.
class AdjointDeltaB final : public SymbolOperator {
public:
    using SymbolOperator::SymbolOperator;
    std::string describe() const override { return "Delta_b*"; }
    double piece(const Context& c, std::int32_t node, std::int32_t leaf) const override {
        const auto& ctx = static_cast<const SymbolContext&>(c);
        const DyadicTree& tree = b_.tree();
        if (tree.is_leaf(node)) return 0.0;
        const auto& n = tree.node(node);
        auto [hl, hr] = haar_values(*ctx.mu, node);
        double coeff =
            (ctx.bs.average[n.child[0]] - ctx.bs.average[node]) * hl *
                ctx.fs.integral[n.child[0]] +
            (ctx.bs.average[n.child[1]] - ctx.bs.average[node]) * hr *
                ctx.fs.integral[n.child[1]];
        return coeff * haar_at(*ctx.mu, node, leaf);
    }
    OperatorPtr adjoint() const override { return std::make_shared<DeltaB>(b_); }
};

OperatorPtr DeltaB::adjoint() const { return std::make_shared<AdjointDeltaB>(b_); }

class Lambda0 final : public SymbolOperator {
public:
    using SymbolOperator::SymbolOperator;
    std::string describe() const override { return "Lambda0_b"; }
    double piece(const Context& c, std::int32_t node, std::int32_t leaf) const override {
        const auto& ctx = static_cast<const SymbolContext&>(c);
        const DyadicTree& tree = b_.tree();
        if (tree.is_leaf(node)) return 0.0;
        std::int32_t r = tree.child_toward_leaf(node, leaf);
        return ctx.bs.average[node] * (ctx.fs.average[r] - ctx.fs.average[node]);
    }
    OperatorPtr adjoint() const override { return std::make_shared<Lambda0>(b_); }
};

class LambdaB final : public SymbolOperator {
public:
    using SymbolOperator::SymbolOperator;
    std::string describe() const override { return "Lambda_b"; }

    struct Ctx : SymbolContext {
        std::vector<double> c_q;  // <b, h_Q^2> per internal node
    };
    std::unique_ptr<Context> prepare(const TreeFunction& f, const MeasureTree& mu) const override {
        auto base = SymbolOperator::prepare(f, mu);
        auto ctx = std::make_unique<Ctx>();
        static_cast<SymbolContext&>(*ctx) = std::move(static_cast<SymbolContext&>(*base));
        const DyadicTree& tree = b_.tree();
        ctx->c_q.assign(tree.node_count(), 0.0);
        for (std::size_t i = 0; i < tree.node_count(); ++i) {
            const auto& n = tree.node(static_cast<std::int32_t>(i));
            if (n.child[0] < 0) continue;
            double al = ctx->bs.average[n.child[0]], ar = ctx->bs.average[n.child[1]];
            double ml = mu.mass(n.child[0]), mr = mu.mass(n.child[1]);
            ctx->c_q[i] = (ar - al) * (ml - mr) / mu.mass(static_cast<std::int32_t>(i)) +
                          ctx->bs.average[i];
        }
        return ctx;
    }
    double piece(const Context& c, std::int32_t node, std::int32_t leaf) const override {
        const auto& ctx = static_cast<const Ctx&>(c);
        const DyadicTree& tree = b_.tree();
        if (tree.is_leaf(node)) return 0.0;
        double coeff = haar_coeff_from_stats(*ctx.mu, ctx.fs, node);
        return ctx.c_q[node] * coeff * haar_at(*ctx.mu, node, leaf);
    }
    OperatorPtr adjoint() const override { return std::make_shared<LambdaB>(b_); }
};

// ---------------------------------------------------------------------------
// martingale transform, Hilbert transform, identity

class MartingaleTransform final : public Operator {
public:
    MartingaleTransform(std::shared_ptr<const DyadicTree> tree, std::vector<std::int8_t> signs)
        : tree_(std::move(tree)), signs_(std::move(signs)) {
        if (signs_.size() != tree_->node_count())
            throw ConfigError("martingale transform needs one sign per node");
        for (auto s : signs_)
            if (s < -1 || s > 1)
                throw CoefficientOutOfRangeError("martingale signs must be in {-1,0,+1}");
    }
    std::string describe() const override { return "martingale_transform"; }
    std::unique_ptr<Context> prepare(const TreeFunction& f, const MeasureTree& mu) const override {
        require_same_tree(f, mu);
        auto ctx = std::make_unique<BaseContext>();
        ctx->mu = &mu;
        ctx->f = &f;
        ctx->fs = compute_stats(f, mu);
        return ctx;
    }
    double piece(const Context& c, std::int32_t node, std::int32_t leaf) const override {
        const auto& ctx = static_cast<const BaseContext&>(c);
        if (tree_->is_leaf(node)) return 0.0;
        std::int32_t r = tree_->child_toward_leaf(node, leaf);
        return signs_[node] * (ctx.fs.average[r] - ctx.fs.average[node]);
    }
    OperatorPtr adjoint() const override {
        return std::make_shared<MartingaleTransform>(tree_, signs_);
    }

private:
    std::shared_ptr<const DyadicTree> tree_;
    std::vector<std::int8_t> signs_;
};

class Hilbert final : public Operator {
public:
    explicit Hilbert(std::shared_ptr<const DyadicTree> tree, double scale = 1.0)
        : tree_(std::move(tree)), scale_(scale) {}
    std::string describe() const override { return "hilbert"; }
    int truncation_band() const override { return 2; }
    std::unique_ptr<Context> prepare(const TreeFunction& f, const MeasureTree& mu) const override {
        require_same_tree(f, mu);
        if (!f.tree().same_tree(*tree_))
            throw WindowMismatchError("operator bound to a different tree");
        auto ctx = std::make_unique<BaseContext>();
        ctx->mu = &mu;
        ctx->f = &f;
        ctx->fs = compute_stats(f, mu);
        return ctx;
    }
    // pieces grouped under the parent: T_P f = sum_{Q in ch(P)} sign(Q) <f,h_Q> h_{Q^s}
    double piece(const Context& c, std::int32_t node, std::int32_t leaf) const override {
        const auto& ctx = static_cast<const BaseContext&>(c);
        const DyadicTree& tree = *tree_;
        if (tree.is_leaf(node)) return 0.0;
        std::int32_t child = tree.child_toward_leaf(node, leaf);
        if (tree.is_leaf(child)) return 0.0;
        std::int32_t sib = tree.sibling_of(child);
        if (tree.is_leaf(sib)) return 0.0;
        double coeff = haar_coeff_from_stats(*ctx.mu, ctx.fs, sib);
        return scale_ * sign_of(tree.node(sib).id) * coeff * haar_at(*ctx.mu, child, leaf);
    }
    OperatorPtr adjoint() const override { return std::make_shared<Hilbert>(tree_, -scale_); }

private:
    std::shared_ptr<const DyadicTree> tree_;
    double scale_;
};

class Identity final : public Operator {
public:
    explicit Identity(std::shared_ptr<const DyadicTree> tree) : tree_(std::move(tree)) {}
    std::string describe() const override { return "identity"; }
    std::unique_ptr<Context> prepare(const TreeFunction& f, const MeasureTree& mu) const override {
        require_same_tree(f, mu);
        auto ctx = std::make_unique<BaseContext>();
        ctx->mu = &mu;
        ctx->f = &f;
        return ctx;
    }
    double piece(const Context& c, std::int32_t node, std::int32_t leaf) const override {
        const auto& ctx = static_cast<const BaseContext&>(c);
        return tree_->leaf_node(leaf) == node ? ctx.f->value(leaf) : 0.0;
    }
    TreeFunction apply(const TreeFunction& f, const MeasureTree& mu) const override {
        require_same_tree(f, mu);
        return f;
    }
    OperatorPtr adjoint() const override { return std::make_shared<Identity>(tree_); }

private:
    std::shared_ptr<const DyadicTree> tree_;
};

// ---------------------------------------------------------------------------
// generalized Haar shift

class HaarShift final : public Operator {
public:
    HaarShift(std::shared_ptr<const DyadicTree> tree, HaarShiftSpec spec)
        : tree_(std::move(tree)), spec_(std::move(spec)) {
        if (spec_.s < 0 || spec_.t < 0) throw ConfigError("shift complexity must be >= 0");
        if (!spec_.coeff) throw ConfigError("shift needs a coefficient callback");
    }
    std::string describe() const override {
        return "haar_shift(" + std::to_string(spec_.s) + "," + std::to_string(spec_.t) + ")" +
               (spec_.l1_normalized ? "[l1]" : "");
    }
    int truncation_band() const override { return spec_.t + 1; }

    struct Ctx : BaseContext {
        std::unordered_map<std::uint64_t, double> qk;  // (Q,K) -> sum_J c h-coeff
    };

    std::unique_ptr<Context> prepare(const TreeFunction& f, const MeasureTree& mu) const override {
        require_same_tree(f, mu);
        if (!f.tree().same_tree(*tree_))
            throw WindowMismatchError("operator bound to a different tree");
        auto ctx = std::make_unique<Ctx>();
        ctx->mu = &mu;
        ctx->f = &f;
        ctx->fs = compute_stats(f, mu);
        const DyadicTree& tree = *tree_;
        const std::uint64_t N = tree.node_count();

        std::vector<std::int32_t> js, ks;
        for (std::size_t qi = 0; qi < N; ++qi) {
            std::int32_t q = static_cast<std::int32_t>(qi);
            if (tree.is_leaf(q)) continue;
            collect_descendants(tree, q, spec_.s, js);
            collect_descendants(tree, q, spec_.t, ks);
            if (js.empty() || ks.empty()) continue;

            double factor = 1.0;
            if (spec_.l1_normalized) {
                double raw_sup = 0.0;
                for (std::int32_t j : js)
                    for (std::int32_t k : ks) {
                        double c = checked_coeff(tree, q, j, k);
                        if (c == 0.0) continue;
                        raw_sup = std::max(raw_sup, std::abs(c) * haar_sup(mu, j) *
                                                        haar_sup(mu, k));
                    }
                double bound = spec_.kappa / mu.mass(q);
                if (raw_sup > bound && raw_sup > 0.0) factor = bound / raw_sup;
            }
            for (std::int32_t j : js) {
                double coeff_j = haar_coeff_from_stats(mu, ctx->fs, j);
                if (coeff_j == 0.0) continue;
                for (std::int32_t k : ks) {
                    double c = checked_coeff(tree, q, j, k);
                    if (c == 0.0) continue;
                    ctx->qk[static_cast<std::uint64_t>(q) * N + k] += factor * c * coeff_j;
                }
            }
        }
        return ctx;
    }

    double piece(const Context& c, std::int32_t node, std::int32_t leaf) const override {
        const auto& ctx = static_cast<const Ctx&>(c);
        const DyadicTree& tree = *tree_;
        if (tree.is_leaf(node)) return 0.0;
        std::int32_t k = node;
        for (int step = 0; step < spec_.t; ++step) {
            if (tree.is_leaf(k)) return 0.0;
            k = tree.child_toward_leaf(k, leaf);
        }
        if (tree.is_leaf(k)) return 0.0;
        auto it = ctx.qk.find(static_cast<std::uint64_t>(node) * tree.node_count() + k);
        if (it == ctx.qk.end()) return 0.0;
        return it->second * haar_at(*ctx.mu, k, leaf);
    }

    OperatorPtr adjoint() const override {
        HaarShiftSpec adj;
        adj.s = spec_.t;
        adj.t = spec_.s;
        adj.l1_normalized = spec_.l1_normalized;
        adj.kappa = spec_.kappa;
        ShiftCoeff inner = spec_.coeff;
        adj.coeff = [inner](const NodeId& q, const NodeId& j, const NodeId& k) {
            return inner(q, k, j);
        };
        return std::make_shared<HaarShift>(tree_, std::move(adj));
    }

private:
    static void collect_descendants(const DyadicTree& tree, std::int32_t q, int depth,
                                    std::vector<std::int32_t>& out) {
        out.clear();
        out.push_back(q);
        std::vector<std::int32_t> next;
        for (int step = 0; step < depth; ++step) {
            next.clear();
            for (std::int32_t n : out) {
                if (tree.is_leaf(n)) continue;
                next.push_back(tree.node(n).child[0]);
                next.push_back(tree.node(n).child[1]);
            }
            out.swap(next);
        }
        // keep only internal nodes (Haar functions need children)
        out.erase(std::remove_if(out.begin(), out.end(),
                                 [&](std::int32_t n) { return tree.is_leaf(n); }),
                  out.end());
    }

    double checked_coeff(const DyadicTree& tree, std::int32_t q, std::int32_t j,
                         std::int32_t k) const {
        double c = spec_.coeff(tree.node(q).id, tree.node(j).id, tree.node(k).id);
        if (std::abs(c) > 1.0 + 1e-12)
            throw CoefficientOutOfRangeError("shift coefficient exceeds 1 in modulus");
        return c;
    }

    static double haar_sup(const MeasureTree& mu, std::int32_t node) {
        const auto& n = mu.tree().node(node);
        double min_child = std::min(mu.mass(n.child[0]), mu.mass(n.child[1]));
        return std::sqrt(m_value(mu, node)) / min_child;
    }

    std::shared_ptr<const DyadicTree> tree_;
    HaarShiftSpec spec_;
};

// ---------------------------------------------------------------------------
// composites

class Sum final : public Operator {
public:
    explicit Sum(std::vector<OperatorPtr> parts) : parts_(std::move(parts)) {
        if (parts_.empty()) throw ConfigError("operator sum needs at least one part");
    }
    std::string describe() const override {
        std::string s = "sum(";
        for (std::size_t i = 0; i < parts_.size(); ++i)
            s += (i ? "," : "") + parts_[i]->describe();
        return s + ")";
    }
    int truncation_band() const override {
        int b = 1;
        for (const auto& p : parts_) b = std::max(b, p->truncation_band());
        return b;
    }
    struct Ctx : Context {
        std::vector<std::unique_ptr<Context>> inner;
    };
    std::unique_ptr<Context> prepare(const TreeFunction& f, const MeasureTree& mu) const override {
        auto ctx = std::make_unique<Ctx>();
        for (const auto& p : parts_) ctx->inner.push_back(p->prepare(f, mu));
        return ctx;
    }
    double piece(const Context& c, std::int32_t node, std::int32_t leaf) const override {
        const auto& ctx = static_cast<const Ctx&>(c);
        double acc = 0.0;
        for (std::size_t i = 0; i < parts_.size(); ++i)
            acc += parts_[i]->piece(*ctx.inner[i], node, leaf);
        return acc;
    }
    TreeFunction apply(const TreeFunction& f, const MeasureTree& mu) const override {
        TreeFunction acc = parts_[0]->apply(f, mu);
        for (std::size_t i = 1; i < parts_.size(); ++i) acc += parts_[i]->apply(f, mu);
        return acc;
    }
    OperatorPtr adjoint() const override {
        std::vector<OperatorPtr> adj;
        adj.reserve(parts_.size());
        for (const auto& p : parts_) adj.push_back(p->adjoint());
        return std::make_shared<Sum>(std::move(adj));
    }

private:
    std::vector<OperatorPtr> parts_;
};

class Composition final : public Operator {
public:
    Composition(OperatorPtr outer, OperatorPtr inner, double scale)
        : outer_(std::move(outer)), inner_(std::move(inner)), scale_(scale) {}
    std::string describe() const override {
        return (scale_ == 1.0 ? "" : scale_ == -1.0 ? "-" : std::to_string(scale_) + "*") +
               outer_->describe() + "o" + inner_->describe();
    }
    std::unique_ptr<Context> prepare(const TreeFunction&, const MeasureTree&) const override {
        throw ConfigError("compositions have no per-node pieces");
    }
    double piece(const Context&, std::int32_t, std::int32_t) const override {
        throw ConfigError("compositions have no per-node pieces");
    }
    TreeFunction apply(const TreeFunction& f, const MeasureTree& mu) const override {
        TreeFunction g = outer_->apply(inner_->apply(f, mu), mu);
        if (scale_ != 1.0) g *= scale_;
        return g;
    }
    OperatorPtr adjoint() const override {
        return std::make_shared<Composition>(inner_->adjoint(), outer_->adjoint(), scale_);
    }

private:
    OperatorPtr outer_;
    OperatorPtr inner_;
    double scale_;
};

class Commutator final : public Operator {
public:
    Commutator(OperatorPtr inner, TreeFunction b, double scale = 1.0)
        : inner_(std::move(inner)), b_(std::move(b)), scale_(scale) {}
    std::string describe() const override { return "[" + inner_->describe() + ",b]"; }
    int truncation_band() const override { return inner_->truncation_band(); }

    struct Ctx : Context {
        TreeFunction bf;
        std::unique_ptr<Context> on_bf;
        std::unique_ptr<Context> on_f;
        const TreeFunction* f = nullptr;
    };
    std::unique_ptr<Context> prepare(const TreeFunction& f, const MeasureTree& mu) const override {
        require_same_tree(f, mu);
        require_same_tree(b_, f);
        auto ctx = std::make_unique<Ctx>();
        ctx->bf = pointwise_product(b_, f);
        ctx->on_bf = inner_->prepare(ctx->bf, mu);
        ctx->on_f = inner_->prepare(f, mu);
        ctx->f = &f;
        return ctx;
    }
    double piece(const Context& c, std::int32_t node, std::int32_t leaf) const override {
        const auto& ctx = static_cast<const Ctx&>(c);
        return scale_ * (inner_->piece(*ctx.on_bf, node, leaf) -
                         b_.value(leaf) * inner_->piece(*ctx.on_f, node, leaf));
    }
    TreeFunction apply(const TreeFunction& f, const MeasureTree& mu) const override {
        require_same_tree(b_, f);
        TreeFunction out = inner_->apply(pointwise_product(b_, f), mu) -
                           pointwise_product(b_, inner_->apply(f, mu));
        if (scale_ != 1.0) out *= scale_;
        return out;
    }
    OperatorPtr adjoint() const override {
        // [T, b]* = -[T*, b]
        return std::make_shared<Commutator>(inner_->adjoint(), b_, -scale_);
    }

private:
    OperatorPtr inner_;
    TreeFunction b_;
    double scale_;
};

}  // namespace

OperatorPtr make_paraproduct(TreeFunction b) { return std::make_shared<Paraproduct>(std::move(b)); }
OperatorPtr make_adjoint_paraproduct(TreeFunction b) {
    return std::make_shared<AdjointParaproduct>(std::move(b));
}
OperatorPtr make_delta_b(TreeFunction b) { return std::make_shared<DeltaB>(std::move(b)); }
OperatorPtr make_lambda0(TreeFunction b) { return std::make_shared<Lambda0>(std::move(b)); }
OperatorPtr make_lambda(TreeFunction b) { return std::make_shared<LambdaB>(std::move(b)); }
OperatorPtr make_martingale_transform(std::shared_ptr<const DyadicTree> tree,
                                      std::vector<std::int8_t> signs) {
    return std::make_shared<MartingaleTransform>(std::move(tree), std::move(signs));
}
OperatorPtr make_hilbert(std::shared_ptr<const DyadicTree> tree) {
    return std::make_shared<Hilbert>(std::move(tree));
}
OperatorPtr make_identity(std::shared_ptr<const DyadicTree> tree) {
    return std::make_shared<Identity>(std::move(tree));
}
OperatorPtr make_haar_shift(std::shared_ptr<const DyadicTree> tree, HaarShiftSpec spec) {
    return std::make_shared<HaarShift>(std::move(tree), std::move(spec));
}
OperatorPtr make_uniform_shift(std::shared_ptr<const DyadicTree> tree, int s, int t,
                               bool l1_normalized) {
    HaarShiftSpec spec;
    spec.s = s;
    spec.t = t;
    spec.l1_normalized = l1_normalized;
    spec.coeff = [](const NodeId&, const NodeId&, const NodeId&) { return 1.0; };
    return make_haar_shift(std::move(tree), std::move(spec));
}
OperatorPtr make_commutator(OperatorPtr inner, TreeFunction b) {
    return std::make_shared<Commutator>(std::move(inner), std::move(b));
}
OperatorPtr make_sum(std::vector<OperatorPtr> parts) {
    return std::make_shared<Sum>(std::move(parts));
}
OperatorPtr make_composition(OperatorPtr outer, OperatorPtr inner, double scale) {
    return std::make_shared<Composition>(std::move(outer), std::move(inner), scale);
}
OperatorPtr make_operator_bracket(OperatorPtr a, OperatorPtr b) {
    return make_sum({make_composition(a, b, 1.0), make_composition(b, a, -1.0)});
}

ShiftCoeff load_shift_coeffs_csv(std::istream& in) {
    auto table = std::make_shared<std::map<std::array<long long, 6>, double>>();
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty shift coefficient file");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::array<long long, 6> key{};
        std::string tok;
        for (int i = 0; i < 6; ++i) {
            if (!std::getline(row, tok, ',')) throw ConfigError("malformed shift row: " + line);
            key[i] = std::stoll(tok);
        }
        if (!std::getline(row, tok)) throw ConfigError("malformed shift row: " + line);
        (*table)[key] = std::stod(tok);
    }
    return [table](const NodeId& q, const NodeId& j, const NodeId& k) {
        std::array<long long, 6> key{q.level,
                                     static_cast<long long>(q.offset),
                                     j.level,
                                     static_cast<long long>(j.offset),
                                     k.level,
                                     static_cast<long long>(k.offset)};
        auto it = table->find(key);
        return it == table->end() ? 0.0 : it->second;
    };
}

// ---------------------------------------------------------------------------

ProductDecomposition decompose_product(const TreeFunction& b, const TreeFunction& f,
                                       const MeasureTree& mu) {
    require_same_tree(b, f);
    require_same_tree(b, mu);
    TreeFunction bf = pointwise_product(b, f);
    double coarse = average(b, mu, mu.tree().root()) * average(f, mu, mu.tree().root());

    TreeFunction pi = make_paraproduct(b)->apply(f, mu);
    TreeFunction pis = make_adjoint_paraproduct(b)->apply(f, mu);
    TreeFunction lam = make_lambda(b)->apply(f, mu);
    TreeFunction del = make_delta_b(b)->apply(f, mu);
    TreeFunction lam0 = make_lambda0(b)->apply(f, mu);

    ProductDecomposition out{pi + pis + lam, pi + del + lam0, 0.0, 0.0};
    double scale = std::max(1.0, bf.max_abs());
    for (std::size_t l = 0; l < bf.size(); ++l) {
        std::int32_t i = static_cast<std::int32_t>(l);
        out.residual_lambda =
            std::max(out.residual_lambda,
                     std::abs(bf.value(i) - out.via_lambda.value(i) - coarse) / scale);
        out.residual_lambda0 =
            std::max(out.residual_lambda0,
                     std::abs(bf.value(i) - out.via_lambda0.value(i) - coarse) / scale);
    }
    // include the coarse term in the returned reconstructions
    for (auto* g : {&out.via_lambda, &out.via_lambda0})
        for (double& v : g->values()) v += coarse;
    return out;
}

CommutatorParts commutator_parts(const OperatorPtr& op, const TreeFunction& b,
                                 const TreeFunction& f, const MeasureTree& mu) {
    require_same_tree(b, f);
    require_same_tree(b, mu);
    auto bracket = [&](const OperatorPtr& inner) {
        TreeFunction tf = op->apply(f, mu);
        return op->apply(inner->apply(f, mu), mu) - inner->apply(tf, mu);
    };
    CommutatorParts parts{make_commutator(op, b)->apply(f, mu),
                          bracket(make_paraproduct(b)),
                          bracket(make_delta_b(b)),
                          bracket(make_lambda0(b)),
                          0.0};
    // the split misses only the rank-one coarse term of the product
    // decomposition: <b>(<f> T1 - <Tf> 1)
    std::int32_t root = mu.tree().root();
    TreeFunction one = TreeFunction::constant(f.tree_ptr(), 1.0);
    TreeFunction t_one = op->apply(one, mu);
    TreeFunction tf = op->apply(f, mu);
    double b0 = average(b, mu, root);
    double f0 = average(f, mu, root);
    double tf0 = average(tf, mu, root);
    double scale = std::max(1.0, parts.full.max_abs());
    for (std::size_t l = 0; l < f.size(); ++l) {
        std::int32_t i = static_cast<std::int32_t>(l);
        double corr = b0 * (f0 * t_one.value(i) - tf0);
        double sum = parts.via_pi.value(i) + parts.via_delta.value(i) +
                     parts.via_lambda0.value(i) + corr;
        parts.split_residual =
            std::max(parts.split_residual, std::abs(parts.full.value(i) - sum) / scale);
    }
    return parts;
}

TreeFunction maximal_truncation(const Operator& op, const TreeFunction& f,
                                const MeasureTree& mu) {
    require_same_tree(f, mu);
    auto ctx = op.prepare(f, mu);
    const DyadicTree& tree = f.tree();
    std::vector<double> out(tree.leaf_count(), 0.0);
    std::vector<std::int32_t> chain;
    for (std::size_t l = 0; l < tree.leaf_count(); ++l) {
        std::int32_t leaf = static_cast<std::int32_t>(l);
        tree.ancestor_chain(leaf, chain);
        double partial = 0.0, best = 0.0;
        for (std::int32_t node : chain) {
            best = std::max(best, std::abs(partial));  // Q0 = node: ancestors above it
            partial += op.piece(*ctx, node, leaf);
        }
        out[l] = best;
    }
    return TreeFunction(f.tree_ptr(), std::move(out));
}

CZDecomposition cz_decompose(const TreeFunction& f, const MeasureTree& mu, const NodeId& q0,
                             double lambda) {
    require_same_tree(f, mu);
    if (!(lambda > 0.0)) throw ConfigError("cz decomposition needs lambda > 0");
    const DyadicTree& tree = f.tree();
    std::int32_t root = tree.require(q0);

    FunctionStats abs_stats;
    {
        TreeFunction absf = f;
        for (double& v : absf.values()) v = std::abs(v);
        abs_stats = compute_stats(absf, mu);
    }

    CZDecomposition out;
    out.lambda = lambda;
    std::vector<std::int32_t> selected;
    std::vector<std::int32_t> stack{root};
    while (!stack.empty()) {
        std::int32_t q = stack.back();
        stack.pop_back();
        if (abs_stats.average[q] > lambda) {
            selected.push_back(q);
            continue;
        }
        if (!tree.is_leaf(q)) {
            stack.push_back(tree.node(q).child[1]);
            stack.push_back(tree.node(q).child[0]);
        }
    }
    std::sort(selected.begin(), selected.end());

    TreeFunction good = f;
    FunctionStats fs = compute_stats(f, mu);
    for (std::int32_t q : selected) {
        const auto& n = tree.node(q);
        if (n.parent < 0)
            throw TopLevelError("selected cube has no parent inside the window");
        const auto& p = tree.node(n.parent);
        double mean_on_parent = fs.integral[q] / mu.mass(n.parent);
        std::vector<double> v(tree.leaf_count(), 0.0);
        for (std::int32_t l = p.leaf_begin; l < p.leaf_end; ++l) v[l] = -mean_on_parent;
        for (std::int32_t l = n.leaf_begin; l < n.leaf_end; ++l) v[l] += f.value(l);
        TreeFunction part(f.tree_ptr(), std::move(v));
        good -= part;
        out.selected_mass += mu.mass(q);
        out.bad.push_back({n.id, std::move(part)});
    }
    out.good = std::move(good);
    return out;
}

}  // namespace dyadic
