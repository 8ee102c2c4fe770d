#pragma once

#include <string>
#include <vector>

#include "dyadic/operators.hpp"

namespace dyadic {

/// The five Muckenhoupt-type characteristics on a dyadic window.
enum class WeightClass {
    Dyadic,      // pairs Q = R only
    Hat,         // R in {Q, parent} or R a child of Q
    ComplexityN, // all pairs at tree distance <= N+2, coefficient c_p^b
    Balanced,    // R in ch(Q^) or ch(Q^(2)), or Q in ch(R^(2)), coefficient c_p^b
    Sibling      // the sibling-configuration table
};

std::string weight_class_name(WeightClass cls);

struct CharacteristicResult {
    double value = 0.0;
    NodeId witness_q{};
    NodeId witness_r{};
    std::size_t skipped_pairs = 0;  // pairs dropped for missing relatives
};

/// Exact finite supremum of coeff(Q,R) <w>_Q <sigma>_R^{p-1} over admissible
/// pairs, sigma = w^{-1/(p-1)}. Pairs whose coefficient needs m(.) on a leaf
/// (or relatives outside the window) are skipped and counted.
CharacteristicResult characteristic(const TreeFunction& w, const MeasureTree& mu, double p,
                                    WeightClass cls, int N = 1);

struct WeightReport {
    double p = 2.0;
    int N = 1;
    CharacteristicResult ap_dyadic, ap_hat, ap_n, ap_b, ap_sib;
};
WeightReport weight_report(const TreeFunction& w, const MeasureTree& mu, double p, int N = 1);

/// (int |f|^p w dmu)^{1/p}.
double weighted_norm(const TreeFunction& f, const TreeFunction& w, const MeasureTree& mu,
                     double p);

/// The dual weight sigma = w^{-1/(p-1)} as a function.
TreeFunction dual_weight(const TreeFunction& w, double p);

/// Deterministic ladder profile: w = exp(s * b0) where b0 counts the dyadic
/// shell of the leaf relative to the left edge of the window.
TreeFunction ladder_weight(const std::shared_ptr<const DyadicTree>& tree, double s);

/// Which theorem shape to compare an empirical operator norm against.
enum class WeightedShape {
    Paraproduct,        // [w]_Dyadic^max(1, 1/(p-1)) * |b|_BMO
    ShiftComplexityN,   // [w]_Dyadic^(1+1/(p-1)-2/p) [w]_N^(1/p)
    ShiftL1Normalized,  // [w]_Dyadic^max(1,1/(p-1))
    CommutatorShift,    // [w]_Dyadic^(1+1/(p-1)-2/p+max(1,1/(p-1))) [w]_b^(2^(N-1)/p) |b|_BMO
    CommutatorHilbert   // [w]_Dyadic^(1+1/(p-1)-2/p+max(1,1/(p-1))) [w]_sib^(1/p) |b|_BMO
};

struct WeightedRatioRow {
    double ladder_s = 0.0;
    double characteristic_main = 0.0;   // [w] for the class the shape keys on
    double characteristic_dyadic = 0.0;
    double empirical = 0.0;  // max_f |op f|_{L^p(w)} / |f|_{L^p(w)}
    double shape = 0.0;      // the theorem's characteristic expression
    double ratio = 0.0;      // empirical / shape
};

/// Monte-Carlo weighted-norm ratios of `op` along a weight ladder. No
/// sharpness claim: the table reports how the empirical ratio sits below the
/// theorem shape.
std::vector<WeightedRatioRow> weighted_ratio_experiment(
    const Operator& op, const MeasureTree& mu, double p, WeightedShape shape,
    const std::vector<double>& ladder, int trials, std::uint64_t seed,
    double bmo_norm_of_symbol = 1.0, int complexity_N = 1);

}  // namespace dyadic
