#include "dyadic/normest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dyadic/rng.hpp"

namespace dyadic {

namespace {

constexpr std::size_t kMaxLeaves = std::size_t{1} << 22;

void check_size(const MeasureTree& mu) {
    if (mu.tree().leaf_count() > kMaxLeaves)
        throw DimensionTooLargeError("norm estimation capped at 2^22 leaves");
}

double ratio_p(const Operator& op, const MeasureTree& mu, const TreeFunction& f, double p) {
    double denom = lp_norm(f, mu, p);
    if (denom == 0.0) return 0.0;
    return lp_norm(op.apply(f, mu), mu, p) / denom;
}

/// duality map S_p(g) = |g|^{p-1} sgn(g) (pointwise; mu enters via pairings)
TreeFunction duality_map(const TreeFunction& g, double p) {
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double x = g.value(static_cast<std::int32_t>(i));
        v[i] = std::pow(std::abs(x), p - 1.0) * (x < 0.0 ? -1.0 : 1.0);
    }
    return TreeFunction(g.tree_ptr(), std::move(v));
}

}  // namespace

NormEstimate l2_norm(const Operator& op, const MeasureTree& mu, double tol, int max_iter) {
    check_size(mu);
    const auto tree = mu.tree_ptr();
    auto adj = op.adjoint();

    NormEstimate est;
    est.method = "power_iteration_T*T";
    est.tolerance = tol;

    TreeFunction v = random_signed(tree, 0x5eedull);
    double nv = lp_norm(v, mu, 2.0);
    if (nv == 0.0) v = TreeFunction::constant(tree, 1.0), nv = lp_norm(v, mu, 2.0);
    v *= 1.0 / nv;

    double prev = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        TreeFunction tv = op.apply(v, mu);
        double sigma = lp_norm(tv, mu, 2.0);  // |v|_2 = 1
        est.iterations = it + 1;
        if (sigma == 0.0) {
            est.estimate = 0.0;
            break;
        }
        est.estimate = sigma;
        if (it > 0 && std::abs(sigma - prev) <= tol * std::max(1.0, sigma)) {
            est.witness = v;
            break;
        }
        prev = sigma;
        TreeFunction av = adj->apply(tv, mu);
        double na = lp_norm(av, mu, 2.0);
        if (na == 0.0) {
            est.witness = v;
            break;
        }
        av *= 1.0 / na;
        v = std::move(av);
        est.witness = v;
    }
    if (est.witness.size() == 0) est.witness = v;
    // certify
    double wn = lp_norm(est.witness, mu, 2.0);
    est.lower_bound = wn > 0.0 ? lp_norm(op.apply(est.witness, mu), mu, 2.0) / wn : 0.0;
    est.estimate = std::max(est.estimate, est.lower_bound);
    return est;
}

NormEstimate lp_lower(const Operator& op, const MeasureTree& mu, double p, std::uint64_t seed,
                      int random_witnesses) {
    if (p <= 1.0) throw BadExponentError("lp_lower needs 1 < p < infinity");
    check_size(mu);
    const DyadicTree& tree = mu.tree();
    const auto tree_ptr = mu.tree_ptr();

    NormEstimate est;
    est.method = "witness_set";

    auto offer = [&](const TreeFunction& f) {
        double r = ratio_p(op, mu, f, p);
        ++est.iterations;
        if (r > est.lower_bound) {
            est.lower_bound = r;
            est.witness = f;
        }
    };

    const std::size_t node_cap = 4096;
    const std::size_t stride = std::max<std::size_t>(1, tree.node_count() / node_cap);
    for (std::size_t i = 0; i < tree.node_count(); i += stride) {
        std::int32_t node = static_cast<std::int32_t>(i);
        offer(TreeFunction::indicator(tree_ptr, tree.node(node).id));
        if (!tree.is_leaf(node)) offer(haar_function(mu, tree.node(node).id));
    }
    for (int t = 0; t < random_witnesses; ++t) {
        Rng rng(derive_seed(seed, t));
        std::vector<double> v(tree.leaf_count());
        for (double& x : v) x = rng.uniform() < 0.5 ? -1.0 : 1.0;
        offer(TreeFunction(tree_ptr, std::move(v)));
    }
    est.estimate = est.lower_bound;
    return est;
}

NormEstimate lp_ascent(const Operator& op, const MeasureTree& mu, double p, int restarts,
                       std::uint64_t seed, int max_iter, double tol) {
    if (p <= 1.0) throw BadExponentError("lp_ascent needs 1 < p < infinity");
    check_size(mu);
    const auto tree_ptr = mu.tree_ptr();
    auto adj = op.adjoint();
    const double pp = p / (p - 1.0);

    NormEstimate est;
    est.method = "nonlinear_power_method";
    est.tolerance = tol;

    for (int r = 0; r < restarts; ++r) {
        TreeFunction x = random_signed(tree_ptr, derive_seed(seed, 7ull * r + 3));
        double nx = lp_norm(x, mu, p);
        if (nx == 0.0) continue;
        x *= 1.0 / nx;
        double prev = 0.0;
        for (int it = 0; it < max_iter; ++it) {
            TreeFunction g = op.apply(x, mu);
            double val = lp_norm(g, mu, p);
            ++est.iterations;
            if (val + 1e-9 * std::max(1.0, prev) < prev)
                throw AssertionFailedError("p-norm ascent objective decreased");
            if (val > est.estimate) {
                est.estimate = val;
                est.witness = x;
            }
            if (val == 0.0 || val - prev <= tol * std::max(1.0, val)) break;
            prev = val;
            TreeFunction y = duality_map(g, p);
            y *= 1.0 / std::pow(val, p - 1.0);
            TreeFunction z = adj->apply(y, mu);
            TreeFunction xn = duality_map(z, pp);
            double nxn = lp_norm(xn, mu, p);
            if (nxn == 0.0) break;
            xn *= 1.0 / nxn;
            x = std::move(xn);
        }
    }
    if (est.witness.size() > 0) {
        double wn = lp_norm(est.witness, mu, p);
        est.lower_bound = wn > 0.0 ? lp_norm(op.apply(est.witness, mu), mu, p) / wn : 0.0;
    }
    return est;
}

double weak11_ratio(const TreeFunction& tf, const TreeFunction& f, const MeasureTree& mu) {
    double l1 = lp_norm(f, mu, 1.0);
    if (l1 == 0.0) return 0.0;
    const std::size_t n = tf.size();
    std::vector<std::pair<double, double>> lv(n);  // (|Tf|, leaf mass)
    for (std::size_t i = 0; i < n; ++i)
        lv[i] = {std::abs(tf.value(static_cast<std::int32_t>(i))),
                 mu.leaf_mass(static_cast<std::int32_t>(i))};
    std::sort(lv.begin(), lv.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    double best = 0.0, cum = 0.0;
    for (const auto& [value, mass] : lv) {
        cum += mass;  // mu{|Tf| >= value}
        if (value > 0.0) best = std::max(best, value * cum);
    }
    return best / l1;
}

NormEstimate weak11_estimate(const OpCallable& op, const MeasureTree& mu, std::uint64_t seed,
                             int random_trials) {
    check_size(mu);
    const DyadicTree& tree = mu.tree();
    const auto tree_ptr = mu.tree_ptr();
    NormEstimate est;
    est.method = "weak11_level_sets";

    auto offer = [&](const TreeFunction& f) {
        double r = weak11_ratio(op(f), f, mu);
        ++est.iterations;
        if (r > est.lower_bound) {
            est.lower_bound = r;
            est.witness = f;
        }
    };

    // leaf indicators (sampled)
    const std::size_t leaf_cap = 64;
    const std::size_t stride = std::max<std::size_t>(1, tree.leaf_count() / leaf_cap);
    for (std::size_t l = 0; l < tree.leaf_count(); l += stride)
        offer(TreeFunction::indicator(tree_ptr,
                                      tree.node(tree.leaf_node(static_cast<std::int32_t>(l))).id));

    // mean-zero spikes in the style of the bad parts of the CZ decomposition
    const std::size_t node_stride = std::max<std::size_t>(1, tree.node_count() / leaf_cap);
    for (std::size_t i = 0; i < tree.node_count(); i += node_stride) {
        std::int32_t node = static_cast<std::int32_t>(i);
        const auto& n = tree.node(node);
        if (n.parent < 0) continue;
        TreeFunction spike = TreeFunction::indicator(tree_ptr, n.id);
        TreeFunction par = TreeFunction::indicator(tree_ptr, tree.node(n.parent).id);
        par *= mu.mass(node) / mu.mass(n.parent);
        offer(spike - par);
    }

    for (int t = 0; t < random_trials; ++t) {
        if (t % 2 == 0)
            offer(random_positive(tree_ptr, derive_seed(seed, 31 * t)));
        else
            offer(random_signed(tree_ptr, derive_seed(seed, 31 * t)));
    }
    est.estimate = est.lower_bound;
    return est;
}

NormEstimate weak11_estimate(const Operator& op, const MeasureTree& mu, std::uint64_t seed,
                             int random_trials) {
    return weak11_estimate(
        [&](const TreeFunction& f) { return op.apply(f, mu); }, mu, seed, random_trials);
}

}  // namespace dyadic
