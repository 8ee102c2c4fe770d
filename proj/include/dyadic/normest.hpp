#pragma once

#include <functional>
#include <string>

#include "dyadic/operators.hpp"

namespace dyadic {

/// Result of a norm estimation run. `lower_bound` is certified: re-applying
/// the operator to `witness` reproduces it. `estimate` is the best ascent
/// value; for p != 2 it is a lower bound on the true norm, never an upper one.
struct NormEstimate {
    double lower_bound = 0.0;
    double estimate = 0.0;
    std::string method;
    int iterations = 0;
    double tolerance = 0.0;
    TreeFunction witness;
};

/// Operator norm on L^2(mu) via power iteration on T*T under the mu-weighted
/// inner product. Relative tolerance 1e-8 or 10^4 iterations.
NormEstimate l2_norm(const Operator& op, const MeasureTree& mu, double tol = 1e-8,
                     int max_iter = 10000);

/// Best ratio |Tf|_p / |f|_p over a witness set: indicators 1_Q, Haar
/// functions h_Q, and seeded random sign patterns.
NormEstimate lp_lower(const Operator& op, const MeasureTree& mu, double p,
                      std::uint64_t seed = 1, int random_witnesses = 16);

/// Nonlinear power method for the L^p(mu) operator norm with seeded restarts.
/// The objective is nondecreasing along each ascent (checked at every step).
NormEstimate lp_ascent(const Operator& op, const MeasureTree& mu, double p, int restarts = 4,
                       std::uint64_t seed = 1, int max_iter = 200, double tol = 1e-9);

using OpCallable = std::function<TreeFunction(const TreeFunction&)>;

/// sup over trial functions and all levels lambda of
/// lambda * mu{|Tf| >= lambda} / |f|_1; the level grid is the exact set of
/// values of |Tf|, so the supremum over lambda is exact per trial.
NormEstimate weak11_estimate(const OpCallable& op, const MeasureTree& mu,
                             std::uint64_t seed = 1, int random_trials = 24);
NormEstimate weak11_estimate(const Operator& op, const MeasureTree& mu, std::uint64_t seed = 1,
                             int random_trials = 24);

/// Exact weak-(1,1) level functional of a single pair (f, Tf).
double weak11_ratio(const TreeFunction& tf, const TreeFunction& f, const MeasureTree& mu);

}  // namespace dyadic
