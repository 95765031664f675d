// Copyright (c) 2026 the riskmdp authors
// SPDX-License-Identifier: MIT
//
// Command-line front end: validate model files, run the finite- and
// infinite-horizon solvers, evaluate fixed policies, cross-check the
// operator solvers against the trajectory-tree oracle, and reproduce the
// built-in examples.
//
// Exit codes: 0 success, 2 validation failure or cap exceeded, 3 I/O error,
// 4 solver failure (including a failed oracle cross-check).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "riskmdp/bellman.hpp"
#include "riskmdp/json_io.hpp"
#include "riskmdp/lob.hpp"
#include "riskmdp/model.hpp"
#include "riskmdp/oracle.hpp"
#include "riskmdp/parallel.hpp"
#include "riskmdp/solver.hpp"

namespace {

using riskmdp::ActionWeights;
using riskmdp::Error;
using riskmdp::FiniteSolveResult;
using riskmdp::InfiniteSolveResult;
using riskmdp::Mode;
using riskmdp::Model;
using riskmdp::PolicyLayer;
using riskmdp::RandomizedPolicy;
using riskmdp::SimplexMode;
using riskmdp::ValueLayer;
using riskmdp::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitSolver = 4;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) riskmdp::fail("IoError", "cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) riskmdp::fail("IoError", "read failure on '" + path + "'");
    return std::move(buf).str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) riskmdp::fail("IoError", "cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) riskmdp::fail("IoError", "write failure on '" + path + "'");
}

int exit_code_for(const Error& e) {
    if (e.kind() == "IoError") return kExitIo;
    if (e.kind() == "SolveFailed") return kExitSolver;
    return kExitValidation;
}

void print_diagnostics(const Error& e) {
    json item;
    item["kind"] = e.kind();
    item["message"] = std::string(e.what());
    json list = json::array({item});
    std::cout << riskmdp::dump_canonical(list);
}

/// Display-friendly number: 12 significant digits, no float dust.
std::string fmt_short(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string layer_key(const Model& m, int t) {
    return m.mode == Mode::kStationary ? "all" : std::to_string(t);
}

json values_to_json(const Model& m, const std::vector<ValueLayer>& layers) {
    json out = json::object();
    for (std::size_t li = 0; li < layers.size(); ++li) {
        json layer = json::object();
        for (int x = 0; x < m.n_states(); ++x)
            layer[m.states[static_cast<std::size_t>(x)]] =
                layers[li][static_cast<std::size_t>(x)];
        out[layer_key(m, static_cast<int>(li) + 1)] = std::move(layer);
    }
    return out;
}

json policy_to_json(const Model& m, const RandomizedPolicy& policy) {
    json out = json::object();
    for (std::size_t li = 0; li < policy.layers.size(); ++li) {
        const int t = static_cast<int>(li) + 1;
        json layer = json::object();
        for (int x = 0; x < m.n_states(); ++x) {
            const ActionWeights& w = policy.layers[li].states[static_cast<std::size_t>(x)];
            json rows = json::array();
            for (std::size_t a = 0; a < w.size(); ++a) {
                if (w[a] == 0.0) continue;
                rows.push_back(json::array(
                    {m.state_layer(t, x).actions[a].name, w[a]}));
            }
            layer[m.states[static_cast<std::size_t>(x)]] = std::move(rows);
        }
        out[layer_key(m, t)] = std::move(layer);
    }
    return out;
}

/// Parses the {"policy": {"t": {state: [[action, weight], ...]}}} shape
/// produced by cmd_solve (either a bare wrapper or a full result file).
RandomizedPolicy policy_from_json(const Model& m, const json& root) {
    if (!root.is_object() || !root.contains("policy"))
        riskmdp::fail("ValidationError", "$.policy: missing policy object");
    const json& pol = root.at("policy");
    if (!pol.is_object())
        riskmdp::fail("ValidationError", "$.policy: must be an object");
    const int T = m.mode == Mode::kStationary ? 1 : m.horizon;
    RandomizedPolicy out;
    for (int t = 1; t <= T; ++t) {
        const std::string key = layer_key(m, t);
        if (!pol.contains(key))
            riskmdp::fail("PolicyIncomplete", "$.policy." + key + ": missing layer");
        const json& jlayer = pol.at(key);
        PolicyLayer layer;
        for (int x = 0; x < m.n_states(); ++x) {
            const std::string& sname = m.states[static_cast<std::size_t>(x)];
            const std::string path = "$.policy." + key + "." + sname;
            if (!jlayer.is_object() || !jlayer.contains(sname))
                riskmdp::fail("PolicyIncomplete", path + ": missing state entry");
            const json& rows = jlayer.at(sname);
            if (!rows.is_array())
                riskmdp::fail("ValidationError", path + ": must be an array");
            const auto& actions = m.state_layer(t, x).actions;
            ActionWeights w(actions.size(), 0.0);
            for (const json& row : rows) {
                if (!row.is_array() || row.size() != 2 || !row[0].is_string() ||
                    !row[1].is_number())
                    riskmdp::fail("ValidationError",
                                  path + ": rows must be [action, weight] pairs");
                const std::string aname = row[0].get<std::string>();
                std::size_t idx = actions.size();
                for (std::size_t a = 0; a < actions.size(); ++a)
                    if (actions[a].name == aname) idx = a;
                if (idx == actions.size())
                    riskmdp::fail("ValidationError",
                                  path + ": unknown action '" + aname + "'");
                w[idx] = row[1].get<double>();
            }
            double total = 0.0;
            for (double v : w) {
                if (!(v >= 0.0))
                    riskmdp::fail("ValidationError", path + ": weights must be >= 0");
                total += v;
            }
            if (std::abs(total - 1.0) > 1e-9)
                riskmdp::fail("ValidationError",
                              path + ": weights sum to " + fmt_short(total));
            layer.states.push_back(std::move(w));
        }
        out.layers.push_back(std::move(layer));
    }
    return out;
}

void write_table(const std::string& path, const Model& m,
                 const std::vector<ValueLayer>& layers) {
    std::string text = "t\tstate\tvalue\n";
    for (std::size_t li = 0; li < layers.size(); ++li)
        for (int x = 0; x < m.n_states(); ++x) {
            text += layer_key(m, static_cast<int>(li) + 1);
            text += '\t';
            text += m.states[static_cast<std::size_t>(x)];
            text += '\t';
            text += riskmdp::jsondetail::fmt_double(
                layers[li][static_cast<std::size_t>(x)]);
            text += '\n';
        }
    write_file(path, text);
}

struct SolveFlags {
    std::string model_path;
    std::string out_path;
    std::string table_path;
    std::string simplex = "auto";
    double tol = 1e-8;
    int max_iters = 0;
};

int cmd_validate(const std::string& model_path) {
    std::string text;
    try {
        text = read_file(model_path);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitIo;
    }
    try {
        (void)riskmdp::load_model(text);
    } catch (const Error& e) {
        print_diagnostics(e);
        return kExitValidation;
    }
    std::cout << "OK\n";
    return kExitOk;
}

int cmd_solve(const SolveFlags& flags) {
    std::string text;
    try {
        text = read_file(flags.model_path);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitIo;
    }
    Model m;
    SimplexMode mode{};
    try {
        m = riskmdp::load_model(text);
        mode = riskmdp::simplex_mode_from_string(flags.simplex);
    } catch (const Error& e) {
        print_diagnostics(e);
        return kExitValidation;
    }

    json result;
    std::vector<ValueLayer> layers;
    try {
        if (m.mode == Mode::kFinite) {
            const FiniteSolveResult res = riskmdp::solve_finite(m, mode);
            layers = res.values.layers;
            result["j0"] = res.values.j0;
            result["values"] = values_to_json(m, layers);
            result["policy"] = policy_to_json(m, res.policy);
            std::cout << "j0 " << fmt_short(res.values.j0) << "\n";
        } else {
            const InfiniteSolveResult res =
                riskmdp::solve_infinite(m, flags.tol, flags.max_iters, mode);
            if (!res.converged) {
                std::cerr << "solver did not converge within "
                          << res.iters << " iterations (residual "
                          << fmt_short(res.residual) << ")\n";
                return kExitSolver;
            }
            layers = res.values.layers;
            result["j0"] = res.values.j0;
            result["values"] = values_to_json(m, layers);
            result["policy"] = policy_to_json(m, res.policy);
            result["iters"] = res.iters;
            result["residual"] = res.residual;
            result["converged"] = res.converged;
            double lo = layers[0][0];
            double hi = layers[0][0];
            for (double v : layers[0]) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            std::cout << "values in [" << fmt_short(lo) << ", " << fmt_short(hi)
                      << "], iters " << res.iters << ", residual "
                      << fmt_short(res.residual) << ", j0 "
                      << fmt_short(res.values.j0) << "\n";
        }
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitSolver;
    }
    try {
        write_file(flags.out_path, riskmdp::dump_canonical(result));
        if (!flags.table_path.empty()) write_table(flags.table_path, m, layers);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}

int cmd_evaluate(const std::string& model_path, const std::string& policy_path,
                 const std::string& out_path, double tol) {
    std::string mtext;
    std::string ptext;
    try {
        mtext = read_file(model_path);
        ptext = read_file(policy_path);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitIo;
    }
    Model m;
    RandomizedPolicy policy;
    try {
        m = riskmdp::load_model(mtext);
        json jpol = json::parse(ptext, nullptr, false);
        if (jpol.is_discarded())
            riskmdp::fail("ParseError", "policy file is not valid JSON");
        policy = policy_from_json(m, jpol);
    } catch (const Error& e) {
        print_diagnostics(e);
        return kExitValidation;
    }
    json result;
    try {
        if (m.mode == Mode::kFinite) {
            const FiniteSolveResult res =
                riskmdp::evaluate_policy_finite(m, policy, m.horizon);
            result["j0"] = res.values.j0;
            result["values"] = values_to_json(m, res.values.layers);
            result["policy"] = policy_to_json(m, res.policy);
            std::cout << "j0 " << fmt_short(res.values.j0) << "\n";
        } else {
            const InfiniteSolveResult res =
                riskmdp::evaluate_policy_infinite(m, policy, tol);
            if (!res.converged) {
                std::cerr << "policy evaluation did not converge\n";
                return kExitSolver;
            }
            result["j0"] = res.values.j0;
            result["values"] = values_to_json(m, res.values.layers);
            result["policy"] = policy_to_json(m, res.policy);
            result["iters"] = res.iters;
            result["residual"] = res.residual;
            result["converged"] = res.converged;
            std::cout << "j0 " << fmt_short(res.values.j0) << "\n";
        }
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return exit_code_for(e) == kExitValidation ? kExitValidation : kExitSolver;
    }
    try {
        write_file(out_path, riskmdp::dump_canonical(result));
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}

int cmd_oracle_check(const std::string& model_path, int horizon, int trials,
                     std::uint64_t seed, std::size_t max_nodes) {
    std::string text;
    try {
        text = read_file(model_path);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitIo;
    }
    try {
        Model m = riskmdp::load_model(text);
        if (m.mode == Mode::kStationary) {
            if (horizon < 1)
                riskmdp::fail("BadArgs",
                              "stationary models need --horizon >= 1 to unroll");
            m = riskmdp::to_finite(m, horizon);
        } else if (horizon > 0 && horizon != m.horizon) {
            riskmdp::fail("BadArgs", "--horizon " + std::to_string(horizon) +
                                         " does not match the model horizon " +
                                         std::to_string(m.horizon));
        }
        const int T = m.horizon;
        riskmdp::detail::UniformStream u(seed);
        double worst = 0.0;
        for (int trial = 0; trial < trials; ++trial) {
            RandomizedPolicy pol;
            for (int t = 1; t <= T; ++t) {
                PolicyLayer layer;
                for (int x = 0; x < m.n_states(); ++x) {
                    ActionWeights w(static_cast<std::size_t>(m.n_actions(t, x)));
                    double total = 0.0;
                    for (double& v : w) {
                        v = 0.05 + u.next();
                        total += v;
                    }
                    for (double& v : w) v /= total;
                    layer.states.push_back(std::move(w));
                }
                pol.layers.push_back(std::move(layer));
            }
            const double tree = riskmdp::oracle::tree_risk(m, pol, T, max_nodes);
            const double op =
                riskmdp::evaluate_policy_finite(m, pol, T).values.j0;
            worst = std::max(worst, std::abs(tree - op));
        }
        std::cout << "max |tree - operator| = " << fmt_short(worst) << " over "
                  << trials << " trials\n";
        if (worst > 1e-9) {
            std::cerr << "oracle cross-check failed: discrepancy exceeds 1e-9\n";
            return kExitSolver;
        }
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return exit_code_for(e);
    }
    return kExitOk;
}

int cmd_example_appendix_a() {
    const riskmdp::oracle::AppendixA res = riskmdp::oracle::appendix_a();
    const std::vector<riskmdp::Pmf> pmfs = {
        riskmdp::Pmf::from_atoms({{0.0, 0.9}, {5.0, 0.1}}),
        riskmdp::Pmf::from_atoms({{0.0, 0.5}, {1.4, 0.5}})};
    std::vector<riskmdp::KusuokaScenario> scen;
    scen.push_back({riskmdp::Pmf::from_atoms({{1.0, 0.8}, {0.1, 0.2}}), 0.0});
    scen.push_back({riskmdp::Pmf::dirac(0.5), 0.0});
    const riskmdp::RiskSpec rho = riskmdp::RiskSpec::kusuoka(std::move(scen));
    const riskmdp::SimplexResult mixed = riskmdp::simplex_min(pmfs, rho);
    std::cout << "rho(pure control 0)  = " << fmt_short(res.rho0) << "\n"
              << "rho(pure control 1)  = " << fmt_short(res.rho1) << "\n"
              << "rho(even mixture)    = " << fmt_short(res.rho_half) << "\n"
              << "simplex minimum      = " << fmt_short(mixed.value)
              << " at lambda = [" << fmt_short(mixed.lambda[0]) << ", "
              << fmt_short(mixed.lambda[1]) << "]\n";
    return kExitOk;
}

int cmd_example_liquidation(int ns, std::int64_t u0, int horizon,
                            const std::string& out_path,
                            std::string result_path, double tau) {
    Model m;
    try {
        m = riskmdp::build_liquidation(ns, u0, horizon,
                                       riskmdp::default_book_dynamics(ns), tau);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitValidation;
    }
    json result;
    double j0 = 0.0;
    try {
        const FiniteSolveResult res = riskmdp::solve_finite(m);
        j0 = res.values.j0;
        result["j0"] = j0;
        result["values"] = values_to_json(m, res.values.layers);
        result["policy"] = policy_to_json(m, res.policy);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitSolver;
    }
    try {
        write_file(out_path, riskmdp::save_model(m));
        if (result_path.empty()) {
            result_path = out_path;
            const std::string suffix = ".json";
            if (result_path.size() >= suffix.size() &&
                result_path.compare(result_path.size() - suffix.size(),
                                    suffix.size(), suffix) == 0)
                result_path.resize(result_path.size() - suffix.size());
            result_path += ".result.json";
        }
        write_file(result_path, riskmdp::dump_canonical(result));
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitIo;
    }
    std::cout << "states " << m.n_states() << ", horizon " << horizon
              << ", j0 " << fmt_short(j0) << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"risk-averse MDP solver with nested distributional risk measures"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads,
                   "worker thread cap (default: RISKMDP_THREADS, then all cores)");

    std::string model_path;
    std::string policy_path;
    std::string out_path;
    SolveFlags solve_flags;
    double eval_tol = 1e-8;
    int horizon = 0;
    int trials = 20;
    std::uint64_t seed = 1;
    std::size_t max_nodes = 4000000;
    int liq_ns = 2;
    std::int64_t liq_u0 = 2;
    int liq_horizon = 2;
    double liq_tau = 1.0;
    std::string liq_out;
    std::string liq_result;

    CLI::App* validate = app.add_subcommand("validate", "check a model file");
    validate->add_option("--model", model_path, "model JSON path")->required();

    CLI::App* solve = app.add_subcommand("solve", "solve a model");
    solve->add_option("--model", solve_flags.model_path, "model JSON path")->required();
    solve->add_option("--out", solve_flags.out_path, "result JSON path")->required();
    solve->add_option("--tol", solve_flags.tol, "stationary solve tolerance");
    solve->add_option("--max-iters", solve_flags.max_iters,
                      "iteration cap (0 = automatic)");
    solve->add_option("--simplex", solve_flags.simplex,
                      "simplex search mode: auto|vertex|grid");
    solve->add_option("--table", solve_flags.table_path,
                      "also write a TSV value table to this path");

    CLI::App* evaluate = app.add_subcommand("evaluate", "evaluate a fixed policy");
    evaluate->add_option("--model", model_path, "model JSON path")->required();
    evaluate->add_option("--policy", policy_path, "policy JSON path")->required();
    evaluate->add_option("--out", out_path, "result JSON path")->required();
    evaluate->add_option("--tol", eval_tol, "stationary evaluation tolerance");

    CLI::App* oracle_check = app.add_subcommand(
        "oracle-check", "compare the operator evaluator with the trajectory tree");
    oracle_check->add_option("--model", model_path, "model JSON path")->required();
    oracle_check->add_option("--horizon", horizon,
                             "unroll horizon (stationary models)");
    oracle_check->add_option("--trials", trials, "number of random policies");
    oracle_check->add_option("--seed", seed, "policy generator seed");
    oracle_check->add_option("--max-nodes", max_nodes,
                             "trajectory-tree node cap (exceeding it exits 2)");

    CLI::App* examples = app.add_subcommand("examples", "built-in worked examples");
    examples->require_subcommand(1);
    CLI::App* appendix_a = examples->add_subcommand(
        "appendix-a", "two-control example where mixing beats both pure controls");
    CLI::App* liquidation = examples->add_subcommand(
        "liquidation", "risk-averse limit-order-book liquidation model");
    liquidation->add_option("--ns", liq_ns, "price levels")->required();
    liquidation->add_option("--u0", liq_u0, "initial inventory")->required();
    liquidation->add_option("--horizon", liq_horizon, "decision epochs")->required();
    liquidation->add_option("--out", liq_out, "model JSON output path")->required();
    liquidation->add_option("--result", liq_result,
                            "solved result path (default: <out>.result.json)");
    liquidation->add_option("--tau", liq_tau, "entropic risk-aversion parameter");

    CLI11_PARSE(app, argc, argv);
    riskmdp::set_max_threads(threads);

    if (*validate) return cmd_validate(model_path);
    if (*solve) return cmd_solve(solve_flags);
    if (*evaluate) return cmd_evaluate(model_path, policy_path, out_path, eval_tol);
    if (*oracle_check)
        return cmd_oracle_check(model_path, horizon, trials, seed, max_nodes);
    if (*appendix_a) return cmd_example_appendix_a();
    if (*liquidation)
        return cmd_example_liquidation(liq_ns, liq_u0, liq_horizon, liq_out,
                                       liq_result, liq_tau);
    return kExitOk;
}
