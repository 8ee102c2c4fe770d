// Command-line runner for the dyadic harmonic analysis library: measures,
// symbol reports, operator application, sparse families, weight
// characteristics, norm estimation, and the registered experiments E1..E8.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "dyadic/experiments.hpp"
#include "dyadic/normest.hpp"
#include "dyadic/rng.hpp"
#include "dyadic/sparse.hpp"
#include "dyadic/symbols.hpp"
#include "dyadic/weights.hpp"

using namespace dyadic;
using nlohmann::json;

namespace {

struct CommonOpts {
    int window_J = 0;
    int depth = 8;
    std::string measure = "lebesgue";
    std::string symbol = "alpha";
    std::string weight = "one";
    std::string op = "pi";
    std::string input;  // function CSV for apply/sparse
    std::vector<double> p_list = {2.0};
    std::uint64_t seed = 1;
    std::string out;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--window-J", o.window_J, "top level J of the window [0,2^J)");
    cmd->add_option("--depth", o.depth, "window depth D (leaves at scale 2^{J-D})");
    cmd->add_option("--measure", o.measure, "lebesgue | lsmp | twist | file:PATH");
    cmd->add_option("--symbol", o.symbol, "alpha | fp:P | q | file:PATH");
    cmd->add_option("--weight", o.weight, "one | expb:S | file:PATH");
    cmd->add_option("--op", o.op,
                    "pi | pistar | deltab | lambda0 | lambdab | hilbert | martingale | "
                    "shift:S,T[,l1]");
    cmd->add_option("--f", o.input, "input function: random | file:PATH");
    cmd->add_option("--p", o.p_list, "exponent list");
    cmd->add_option("--seed", o.seed, "seed for all randomness");
    cmd->add_option("--out", o.out, "output path (file or directory)");
}

MeasureTree make_measure(const CommonOpts& o) {
    Window w(o.window_J, o.depth);
    if (o.measure == "lebesgue") return build_lebesgue(w);
    if (o.measure == "lsmp") return build_lsmp(w);
    if (o.measure == "twist") return build_twist(w);
    if (o.measure.rfind("file:", 0) == 0) {
        std::ifstream in(o.measure.substr(5));
        if (!in) throw ConfigError("cannot read measure file " + o.measure.substr(5));
        return load_measure_csv(w, in);
    }
    throw ConfigError("unknown measure spec: " + o.measure);
}

TreeFunction make_symbol(const CommonOpts& o, const MeasureTree& mu) {
    if (o.symbol == "alpha") return symbol_alpha(mu);
    if (o.symbol == "q") return symbol_q(mu);
    if (o.symbol.rfind("fp:", 0) == 0) return symbol_fp(mu, std::stod(o.symbol.substr(3)));
    if (o.symbol.rfind("file:", 0) == 0) {
        std::ifstream in(o.symbol.substr(5));
        if (!in) throw ConfigError("cannot read symbol file " + o.symbol.substr(5));
        return load_function_csv(mu.tree_ptr(), in);
    }
    throw ConfigError("unknown symbol spec: " + o.symbol);
}

TreeFunction make_weight_fn(const CommonOpts& o, const MeasureTree& mu) {
    if (o.weight == "one") return TreeFunction::constant(mu.tree_ptr(), 1.0);
    if (o.weight.rfind("expb:", 0) == 0)
        return ladder_weight(mu.tree_ptr(), std::stod(o.weight.substr(5)));
    if (o.weight.rfind("file:", 0) == 0) {
        std::ifstream in(o.weight.substr(5));
        if (!in) throw ConfigError("cannot read weight file " + o.weight.substr(5));
        return load_function_csv(mu.tree_ptr(), in);
    }
    throw ConfigError("unknown weight spec: " + o.weight);
}

TreeFunction make_input(const CommonOpts& o, const MeasureTree& mu) {
    if (o.input.empty() || o.input == "random")
        return random_signed(mu.tree_ptr(), derive_seed(o.seed, 42));
    if (o.input.rfind("file:", 0) == 0) {
        std::ifstream in(o.input.substr(5));
        if (!in) throw ConfigError("cannot read function file " + o.input.substr(5));
        return load_function_csv(mu.tree_ptr(), in);
    }
    throw ConfigError("unknown function spec: " + o.input);
}

OperatorPtr make_operator(const CommonOpts& o, const MeasureTree& mu) {
    if (o.op == "hilbert") return make_hilbert(mu.tree_ptr());
    if (o.op == "martingale")
        return make_martingale_transform(mu.tree_ptr(),
                                         random_signs(mu.tree_ptr(), derive_seed(o.seed, 7)));
    if (o.op.rfind("shift:", 0) == 0) {
        std::string spec = o.op.substr(6);
        std::istringstream ss(spec);
        std::string s_str, t_str, flag;
        std::getline(ss, s_str, ',');
        std::getline(ss, t_str, ',');
        std::getline(ss, flag, ',');
        return make_uniform_shift(mu.tree_ptr(), std::stoi(s_str), std::stoi(t_str),
                                  flag == "l1");
    }
    TreeFunction b = make_symbol(o, mu);
    if (o.op == "pi") return make_paraproduct(b);
    if (o.op == "pistar") return make_adjoint_paraproduct(b);
    if (o.op == "deltab") return make_delta_b(b);
    if (o.op == "lambda0") return make_lambda0(b);
    if (o.op == "lambdab") return make_lambda(b);
    throw ConfigError("unknown operator spec: " + o.op);
}

void emit(const std::string& out, const std::string& payload) {
    if (out.empty()) {
        std::cout << payload;
        return;
    }
    std::ofstream f(out);
    if (!f) throw ConfigError("cannot write " + out);
    f << payload;
}

json characteristic_json(const CharacteristicResult& c) {
    return json{{"value", c.value},
                {"witness_q", {{"level", c.witness_q.level}, {"offset", c.witness_q.offset}}},
                {"witness_r", {{"level", c.witness_r.level}, {"offset", c.witness_r.offset}}},
                {"skipped_pairs", c.skipped_pairs}};
}

int cmd_measure(const CommonOpts& o, const std::string& dump) {
    MeasureTree mu = make_measure(o);
    BalanceReport rep = balance_report(mu);
    json j{{"measure", o.measure},
           {"window_J", o.window_J},
           {"depth", o.depth},
           {"leaves", mu.tree().leaf_count()},
           {"nodes", mu.tree().node_count()},
           {"total_mass", mu.total_mass()},
           {"doubling_const", rep.doubling_const},
           {"balanced_const", rep.balanced_const},
           {"sibling_const", rep.sibling_const},
           {"standardness_const", rep.standardness_const},
           {"skipped_nodes", rep.skipped_nodes}};
    emit(o.out, j.dump(2) + "\n");
    if (!dump.empty()) {
        std::ofstream f(dump);
        if (!f) throw ConfigError("cannot write " + dump);
        save_measure_csv(mu, f);
    }
    return 0;
}

int cmd_symbol_report(const CommonOpts& o) {
    MeasureTree mu = make_measure(o);
    TreeFunction b = make_symbol(o, mu);
    SymbolReport rep = symbol_report(b, mu, o.p_list);
    json j{{"symbol", o.symbol},
           {"carleson_norm", rep.carleson_norm},
           {"lacey_packing", rep.lacey_packing},
           {"delta_sup", rep.delta_sup},
           {"beta_sup", rep.beta_sup},
           {"cq_formula_mismatch", rep.max_cq_mismatch}};
    for (const auto& [p, v] : rep.bmo_norm) j["bmo_norm"][std::to_string(p)] = v;
    for (const auto& [p, v] : rep.BMO_norm) j["BMO_norm"][std::to_string(p)] = v;
    emit(o.out, j.dump(2) + "\n");
    return 0;
}

int cmd_apply(const CommonOpts& o) {
    MeasureTree mu = make_measure(o);
    auto op = make_operator(o, mu);
    TreeFunction f = make_input(o, mu);
    TreeFunction g = op->apply(f, mu);
    std::ostringstream out;
    save_function_csv(g, out);
    emit(o.out, out.str());
    return 0;
}

int cmd_sparse(const CommonOpts& o) {
    MeasureTree mu = make_measure(o);
    auto op = make_operator(o, mu);
    TreeFunction f = make_input(o, mu);
    for (double& v : f.values()) v = std::abs(v);
    SparseFamily s = build_sparse(*op, f, mu, mu.tree().node(0).id);
    std::ostringstream out;
    save_sparse_csv(s, out);
    emit(o.out, out.str());
    SparsityReport rep = verify_sparsity(s, mu);
    std::cerr << "eta=" << rep.eta << " carleson_packing=" << rep.carleson_packing
              << " constants C1=C2=" << s.c1 << "\n";
    return 0;
}

int cmd_weights(const CommonOpts& o) {
    MeasureTree mu = make_measure(o);
    TreeFunction w = make_weight_fn(o, mu);
    json j;
    for (double p : o.p_list) {
        WeightReport rep = weight_report(w, mu, p);
        json& slot = j[std::to_string(p)];
        slot["A_p_dyadic"] = characteristic_json(rep.ap_dyadic);
        slot["A_p_hat"] = characteristic_json(rep.ap_hat);
        slot["A_p_N1"] = characteristic_json(rep.ap_n);
        slot["A_p_b"] = characteristic_json(rep.ap_b);
        slot["A_p_sib"] = characteristic_json(rep.ap_sib);
    }
    emit(o.out, j.dump(2) + "\n");
    return 0;
}

int cmd_norm(const CommonOpts& o) {
    MeasureTree mu = make_measure(o);
    auto op = make_operator(o, mu);
    json j{{"op", o.op}};
    NormEstimate l2 = l2_norm(*op, mu);
    j["l2"] = {{"estimate", l2.estimate},
               {"lower_bound", l2.lower_bound},
               {"iterations", l2.iterations},
               {"method", l2.method}};
    for (double p : o.p_list) {
        if (p == 2.0) continue;
        NormEstimate lo = lp_lower(*op, mu, p, o.seed);
        NormEstimate asc = lp_ascent(*op, mu, p, 4, o.seed);
        j["lp"][std::to_string(p)] = {{"witness_lower", lo.lower_bound},
                                      {"ascent", asc.estimate},
                                      {"method", asc.method}};
    }
    NormEstimate wk = weak11_estimate(*op, mu, o.seed);
    j["weak11"] = {{"estimate", wk.lower_bound}, {"trials", wk.iterations}};
    emit(o.out, j.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dyadic harmonic analysis on finite trees"};
    app.set_config("--config", "", "flat key=value config file; flags win");
    app.require_subcommand(1);

    CommonOpts o;
    std::string dump_csv;

    auto* c_measure = app.add_subcommand("measure", "build a measure and report its balance");
    add_common(c_measure, o);
    c_measure->add_option("--dump-csv", dump_csv, "also write the leaf-mass CSV here");

    auto* c_symbol = app.add_subcommand("symbol-report", "oscillation norms of a symbol");
    add_common(c_symbol, o);

    auto* c_apply = app.add_subcommand("apply", "apply an operator to a function");
    add_common(c_apply, o);

    auto* c_sparse = app.add_subcommand("sparse", "run the sparse stopping construction");
    add_common(c_sparse, o);

    auto* c_weights = app.add_subcommand("weights", "the five weight characteristics");
    add_common(c_weights, o);

    auto* c_norm = app.add_subcommand("norm", "operator norm estimates");
    add_common(c_norm, o);

    std::string run_id;
    ExperimentConfig ecfg;
    auto* c_run = app.add_subcommand("run", "run a registered experiment (E1..E8)");
    c_run->add_option("id", run_id, "experiment id")->required();
    c_run->add_option("--window-J", ecfg.window_J, "window top level");
    c_run->add_option("--depth", ecfg.depth, "window depth");
    c_run->add_option("--p", ecfg.p_list, "exponent list");
    c_run->add_option("--seed", ecfg.seed, "seed");
    c_run->add_option("--trials", ecfg.trials, "trial count / table size");
    c_run->add_option("--out", ecfg.out_dir, "output directory");

    std::string describe_id;
    auto* c_desc = app.add_subcommand("describe", "describe a registered experiment");
    c_desc->add_option("id", describe_id, "experiment id")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_measure->parsed()) return cmd_measure(o, dump_csv);
        if (c_symbol->parsed()) return cmd_symbol_report(o);
        if (c_apply->parsed()) return cmd_apply(o);
        if (c_sparse->parsed()) return cmd_sparse(o);
        if (c_weights->parsed()) return cmd_weights(o);
        if (c_norm->parsed()) return cmd_norm(o);
        if (c_desc->parsed()) {
            std::cout << describe_experiment(describe_id) << "\n";
            return 0;
        }
        if (c_run->parsed()) {
            ecfg.id = run_id;
            ExperimentResult res = run_experiment(ecfg);
            std::cout << res.id << ": " << res.title << "\n";
            for (const auto& c : res.checks) {
                bool failed = std::find(res.failures.begin(), res.failures.end(), c) !=
                              res.failures.end();
                std::cout << "  [" << (failed ? "FAIL" : "ok") << "] " << c << "\n";
            }
            std::cout << "summary: " << res.summary_file << "\n";
            if (!res.passed) {
                std::cerr << "assertions failed: " << res.failures.size() << "\n";
                return 1;
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
