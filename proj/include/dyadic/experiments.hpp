#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dyadic/measure.hpp"

namespace dyadic {

/// Configuration of one registered experiment (E1..E8). Unset numeric fields
/// (zero) fall back to per-experiment defaults; the seed fixes every random
/// draw, so equal configs produce byte-identical outputs.
struct ExperimentConfig {
    std::string id;
    int window_J = -1;
    int depth = -1;
    std::string measure;  // informational override where it makes sense
    std::string symbol;
    std::vector<double> p_list;
    std::uint64_t seed = 1;
    int trials = -1;
    std::string out_dir = ".";
};

struct ExperimentResult {
    std::string id;
    std::string title;
    bool passed = true;
    std::vector<std::string> checks;    // human-readable, one per assertion
    std::vector<std::string> failures;  // subset of checks that failed
    std::vector<std::string> csv_files;
    std::string summary_file;
};

std::vector<std::string> experiment_ids();
std::string describe_experiment(const std::string& id);

/// Runs one experiment, writes its CSV tables and a JSON summary into
/// cfg.out_dir, and evaluates the registered assertions. Throws
/// UnknownExperimentError / ConfigError on bad configs; assertion failures
/// are reported in the result, not thrown.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Sum_{k >= k0} 1/k^2 (trigamma), used by the packing-norm closed forms.
double inverse_square_tail(int k0);
/// Closed-form Carleson supremum of the alpha symbol localized at I_{k0}.
double alpha_carleson_sup(int k0);
/// H_K / 2, the sup-norm packing partial sum of the alpha symbol.
double alpha_supnorm_packing(int K);

/// Lebesgue tree with leaf masses jittered by the seed; stays doubling and
/// balanced with constants close to the uniform ones.
MeasureTree build_perturbed_lebesgue(const Window& w, std::uint64_t seed,
                                     double amplitude = 0.5);

}  // namespace dyadic
