// Copyright (c) 2026 the riskmdp authors
// SPDX-License-Identifier: MIT
//
// JSON serialization for models and solver results.  Parsing is strict:
// unknown fields are rejected with a path to the offending location, and
// semantic problems surface as ValidationError.  Emission goes through a
// small canonical writer (sorted keys, %.17g doubles, two-space indent,
// leaf arrays inlined) so that identical inputs produce identical bytes.

#ifndef RISKMDP_JSON_IO_HPP
#define RISKMDP_JSON_IO_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "riskmdp/error.hpp"
#include "riskmdp/model.hpp"
#include "riskmdp/pmf.hpp"
#include "riskmdp/risk.hpp"

namespace riskmdp {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Canonical emitter
// ---------------------------------------------------------------------------

namespace jsondetail {

/// 17 significant digits: enough to reproduce any double exactly on re-parse.
inline std::string fmt_double(double v) {
    if (!std::isfinite(v)) fail("ValidationError", "cannot serialize non-finite number");
    if (v == 0.0) return "0"; // canonical zero, never "-0"
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_escaped(const std::string& s, std::string& out) {
    out += '"';
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\b': out += "\\b"; break;
        case '\f': out += "\\f"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "\\u%04x", c);
                out += buf;
            } else {
                out += c;
            }
        }
    }
    out += '"';
}

inline bool is_scalar(const json& j) {
    return !j.is_object() && !j.is_array();
}

inline void write_scalar(const json& j, std::string& out) {
    if (j.is_string()) {
        write_escaped(j.get<std::string>(), out);
    } else if (j.is_boolean()) {
        out += j.get<bool>() ? "true" : "false";
    } else if (j.is_number_integer()) {
        out += std::to_string(j.get<long long>());
    } else if (j.is_number_unsigned()) {
        out += std::to_string(j.get<unsigned long long>());
    } else if (j.is_number_float()) {
        out += fmt_double(j.get<double>());
    } else if (j.is_null()) {
        out += "null";
    } else {
        fail("ValidationError", "unsupported JSON value type");
    }
}

inline void write_value(const json& j, int depth, std::string& out) {
    const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(depth + 1) * 2, ' ');
    if (j.is_object()) {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (const auto& item : j.items()) {
            if (!first) out += ",\n";
            first = false;
            out += inner;
            write_escaped(item.key(), out);
            out += ": ";
            write_value(item.value(), depth + 1, out);
        }
        out += '\n';
        out += pad;
        out += '}';
    } else if (j.is_array()) {
        if (j.empty()) {
            out += "[]";
            return;
        }
        bool flat = true;
        for (const json& el : j)
            if (!is_scalar(el)) flat = false;
        if (flat) {
            out += '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ", ";
                write_scalar(j[i], out);
            }
            out += ']';
        } else {
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ",\n";
                out += inner;
                write_value(j[i], depth + 1, out);
            }
            out += '\n';
            out += pad;
            out += ']';
        }
    } else {
        write_scalar(j, out);
    }
}

} // namespace jsondetail

/// Serializes with sorted keys, fixed indentation, and %.17g doubles, so
/// equal documents always produce byte-identical text.
inline std::string dump_canonical(const json& j) {
    std::string out;
    jsondetail::write_value(j, 0, out);
    out += '\n';
    return out;
}

// ---------------------------------------------------------------------------
// Strict parse helpers
// ---------------------------------------------------------------------------

namespace jsondetail {

[[noreturn]] inline void bad(const std::string& path, const std::string& msg) {
    fail("ValidationError", path + ": " + msg);
}

inline void check_keys(const json& j, const std::set<std::string>& allowed,
                       const std::string& path) {
    for (const auto& item : j.items())
        if (allowed.find(item.key()) == allowed.end())
            bad(path + "." + item.key(), "unknown field");
}

inline const json& member(const json& j, const char* key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) bad(path, std::string("missing required field '") + key + "'");
    return *it;
}

inline double as_double(const json& j, const std::string& path) {
    if (!j.is_number()) bad(path, "expected a number");
    return j.get<double>();
}

inline int as_int(const json& j, const std::string& path) {
    if (!j.is_number_integer() && !j.is_number_unsigned())
        bad(path, "expected an integer");
    const long long v = j.get<long long>();
    if (v < -2147483647LL || v > 2147483647LL) bad(path, "integer out of range");
    return static_cast<int>(v);
}

inline std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) bad(path, "expected a string");
    return j.get<std::string>();
}

inline const json& as_object(const json& j, const std::string& path) {
    if (!j.is_object()) bad(path, "expected an object");
    return j;
}

inline const json& as_array(const json& j, const std::string& path) {
    if (!j.is_array()) bad(path, "expected an array");
    return j;
}

/// Parses an array of [number, number] pairs.
inline std::vector<std::pair<double, double>> as_pairs(const json& j,
                                                       const std::string& path) {
    as_array(j, path);
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        const json& el = j[i];
        if (!el.is_array() || el.size() != 2) bad(p, "expected a [x, y] pair");
        out.emplace_back(as_double(el[0], p + "[0]"), as_double(el[1], p + "[1]"));
    }
    return out;
}

/// Runs a Pmf/RiskSpec constructor, rebranding its errors with the JSON path.
template <typename Fn>
auto with_path(const std::string& path, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        fail("ValidationError", path + ": " + e.what());
    }
}

} // namespace jsondetail

// ---------------------------------------------------------------------------
// RiskSpec <-> JSON
// ---------------------------------------------------------------------------

inline json pmf_to_json(const Pmf& mu) {
    json arr = json::array();
    for (std::size_t i = 0; i < mu.size(); ++i)
        arr.push_back(json::array({mu.value(i), mu.prob(i)}));
    return arr;
}

inline Pmf pmf_from_json(const json& j, const std::string& path) {
    return jsondetail::with_path(
        path, [&] { return Pmf::from_atoms(jsondetail::as_pairs(j, path)); });
}

inline json risk_to_json(const RiskSpec& spec) {
    json j;
    switch (spec.kind()) {
    case RiskKind::Entropic:
        j["kind"] = "entropic";
        j["tau"] = spec.as_entropic().tau;
        break;
    case RiskKind::Spectral:
        j["kind"] = "spectral";
        j["eta"] = pmf_to_json(spec.as_spectral().eta);
        break;
    case RiskKind::Kusuoka: {
        j["kind"] = "kusuoka";
        json arr = json::array();
        for (const KusuokaScenario& sc : spec.as_kusuoka().scenarios) {
            json s;
            s["eta"] = pmf_to_json(sc.eta);
            s["beta"] = sc.beta;
            arr.push_back(std::move(s));
        }
        j["scenarios"] = std::move(arr);
        break;
    }
    case RiskKind::Combo: {
        j["kind"] = "combo";
        json arr = json::array();
        for (const ComboTerm& term : spec.as_combo().terms) {
            json t;
            t["weight"] = term.weight;
            t["spec"] = risk_to_json(term.spec);
            arr.push_back(std::move(t));
        }
        j["terms"] = std::move(arr);
        break;
    }
    }
    return j;
}

inline RiskSpec risk_from_json(const json& j, const std::string& path) {
    using namespace jsondetail;
    as_object(j, path);
    const std::string kind = as_string(member(j, "kind", path), path + ".kind");
    if (kind == "entropic") {
        check_keys(j, {"kind", "tau"}, path);
        const double tau = as_double(member(j, "tau", path), path + ".tau");
        return with_path(path, [&] { return RiskSpec::entropic(tau); });
    }
    if (kind == "spectral") {
        check_keys(j, {"kind", "eta"}, path);
        const Pmf eta = pmf_from_json(member(j, "eta", path), path + ".eta");
        return with_path(path, [&] { return RiskSpec::spectral(eta); });
    }
    if (kind == "kusuoka") {
        check_keys(j, {"kind", "scenarios"}, path);
        const json& arr = as_array(member(j, "scenarios", path), path + ".scenarios");
        std::vector<KusuokaScenario> scenarios;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string p = path + ".scenarios[" + std::to_string(i) + "]";
            as_object(arr[i], p);
            check_keys(arr[i], {"eta", "beta"}, p);
            scenarios.push_back(
                {pmf_from_json(member(arr[i], "eta", p), p + ".eta"),
                 as_double(member(arr[i], "beta", p), p + ".beta")});
        }
        return with_path(path, [&] { return RiskSpec::kusuoka(scenarios); });
    }
    if (kind == "combo") {
        check_keys(j, {"kind", "terms"}, path);
        const json& arr = as_array(member(j, "terms", path), path + ".terms");
        std::vector<ComboTerm> terms;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string p = path + ".terms[" + std::to_string(i) + "]";
            as_object(arr[i], p);
            check_keys(arr[i], {"weight", "spec"}, p);
            ComboTerm term{as_double(member(arr[i], "weight", p), p + ".weight"),
                           risk_from_json(member(arr[i], "spec", p), p + ".spec")};
            terms.push_back(std::move(term));
        }
        return with_path(path, [&] { return RiskSpec::combo(terms); });
    }
    jsondetail::bad(path + ".kind", "unknown risk kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Model <-> JSON
// ---------------------------------------------------------------------------

inline json model_to_json(const Model& m) {
    using jsondetail::bad;
    json j;
    j["format_version"] = 1;
    j["mode"] = m.mode == Mode::kFinite ? "finite" : "stationary";
    if (m.mode == Mode::kFinite) j["horizon"] = m.horizon;
    j["gamma"] = m.gamma;
    j["cost_bound"] = m.cost_bound;
    j["states"] = m.states;
    json init = json::array();
    for (std::size_t i = 0; i < m.initial.size(); ++i)
        init.push_back(json::array(
            {static_cast<long long>(m.initial.value(i)), m.initial.prob(i)}));
    j["initial"] = std::move(init);
    j["risk0"] = risk_to_json(m.risk0);
    json layers = json::array();
    for (std::size_t li = 0; li < m.layers.size(); ++li) {
        json jl;
        if (m.mode == Mode::kFinite)
            jl["t"] = static_cast<long long>(li + 1);
        else
            jl["t"] = "all";
        json jstates;
        for (int x = 0; x < m.n_states(); ++x) {
            const StateLayer& sl = m.layers[li].states[static_cast<std::size_t>(x)];
            json js;
            js["risk"] = risk_to_json(sl.risk);
            json jactions;
            for (const ActionEntry& ae : sl.actions) {
                std::vector<Transition> sorted = ae.transitions;
                std::sort(sorted.begin(), sorted.end(),
                          [](const Transition& a, const Transition& b) {
                              return a.next < b.next;
                          });
                json kernel = json::array();
                json costs = json::array();
                for (const Transition& tr : sorted) {
                    kernel.push_back(json::array({tr.next, tr.prob}));
                    costs.push_back(json::array({tr.next, tr.cost}));
                }
                json ja;
                ja["kernel"] = std::move(kernel);
                ja["costs"] = std::move(costs);
                if (jactions.contains(ae.name)) bad("actions", "duplicate action name");
                jactions[ae.name] = std::move(ja);
            }
            js["actions"] = std::move(jactions);
            jstates[m.states[static_cast<std::size_t>(x)]] = std::move(js);
        }
        jl["states"] = std::move(jstates);
        layers.push_back(std::move(jl));
    }
    j["layers"] = std::move(layers);
    return j;
}

inline Model model_from_json(const json& root) {
    using namespace jsondetail;
    as_object(root, "$");
    check_keys(root,
               {"format_version", "mode", "horizon", "gamma", "cost_bound", "states",
                "initial", "risk0", "layers"},
               "$");
    if (as_int(member(root, "format_version", "$"), "$.format_version") != 1)
        bad("$.format_version", "unsupported format version");

    Model m;
    const std::string mode = as_string(member(root, "mode", "$"), "$.mode");
    if (mode == "finite") {
        m.mode = Mode::kFinite;
        m.horizon = as_int(member(root, "horizon", "$"), "$.horizon");
    } else if (mode == "stationary") {
        m.mode = Mode::kStationary;
        if (root.contains("horizon"))
            bad("$.horizon", "stationary mode takes no horizon");
        m.horizon = 1;
    } else {
        bad("$.mode", "expected 'finite' or 'stationary'");
    }
    m.gamma = as_double(member(root, "gamma", "$"), "$.gamma");
    m.cost_bound = as_double(member(root, "cost_bound", "$"), "$.cost_bound");

    const json& jstates = as_array(member(root, "states", "$"), "$.states");
    std::map<std::string, int> state_index;
    for (std::size_t i = 0; i < jstates.size(); ++i) {
        std::string name =
            as_string(jstates[i], "$.states[" + std::to_string(i) + "]");
        if (!state_index.emplace(name, static_cast<int>(i)).second)
            bad("$.states[" + std::to_string(i) + "]", "duplicate state name");
        m.states.push_back(std::move(name));
    }
    const int n = m.n_states();

    {
        const json& jinit = member(root, "initial", "$");
        auto pairs = as_pairs(jinit, "$.initial");
        std::vector<std::pair<double, double>> atoms;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const std::string p = "$.initial[" + std::to_string(i) + "]";
            const int idx = as_int(jinit[i][0], p + "[0]");
            if (idx < 0 || idx >= n) bad(p, "state index out of range");
            atoms.emplace_back(static_cast<double>(idx), pairs[i].second);
        }
        m.initial = with_path("$.initial", [&] { return Pmf::from_atoms(atoms); });
    }

    m.risk0 = risk_from_json(member(root, "risk0", "$"), "$.risk0");

    const json& jlayers = as_array(member(root, "layers", "$"), "$.layers");
    const std::size_t expected_layers =
        m.mode == Mode::kFinite ? static_cast<std::size_t>(m.horizon) : 1;
    if (m.mode == Mode::kFinite && m.horizon < 1) bad("$.horizon", "must be >= 1");
    if (jlayers.size() != expected_layers)
        bad("$.layers", "expected " + std::to_string(expected_layers) +
                            " layer(s), got " + std::to_string(jlayers.size()));
    for (std::size_t li = 0; li < jlayers.size(); ++li) {
        const std::string lp = "$.layers[" + std::to_string(li) + "]";
        const json& jl = as_object(jlayers[li], lp);
        check_keys(jl, {"t", "states"}, lp);
        const json& jt = member(jl, "t", lp);
        if (m.mode == Mode::kFinite) {
            if (as_int(jt, lp + ".t") != static_cast<int>(li + 1))
                bad(lp + ".t", "layers must be listed in order t = 1..T");
        } else if (!jt.is_string() || jt.get<std::string>() != "all") {
            bad(lp + ".t", "stationary layer must use \"t\": \"all\"");
        }
        const json& jst = as_object(member(jl, "states", lp), lp + ".states");
        Layer layer;
        layer.states.resize(static_cast<std::size_t>(n));
        std::set<std::string> allowed(m.states.begin(), m.states.end());
        check_keys(jst, allowed, lp + ".states");
        for (int x = 0; x < n; ++x) {
            const std::string& name = m.states[static_cast<std::size_t>(x)];
            const std::string sp = lp + ".states." + name;
            auto it = jst.find(name);
            if (it == jst.end()) bad(sp, "missing state entry");
            const json& js = as_object(*it, sp);
            check_keys(js, {"risk", "actions"}, sp);
            StateLayer sl;
            sl.risk = risk_from_json(member(js, "risk", sp), sp + ".risk");
            const json& jactions =
                as_object(member(js, "actions", sp), sp + ".actions");
            for (const auto& item : jactions.items()) {
                const std::string ap = sp + ".actions." + item.key();
                const json& ja = as_object(item.value(), ap);
                check_keys(ja, {"kernel", "costs"}, ap);
                ActionEntry ae;
                ae.name = item.key();
                const json& jkernel = member(ja, "kernel", ap);
                const json& jcosts = member(ja, "costs", ap);
                auto kpairs = as_pairs(jkernel, ap + ".kernel");
                auto cpairs = as_pairs(jcosts, ap + ".costs");
                std::map<int, double> cost_of;
                for (std::size_t i = 0; i < cpairs.size(); ++i) {
                    const std::string p = ap + ".costs[" + std::to_string(i) + "]";
                    const int idx = as_int(jcosts[i][0], p + "[0]");
                    if (idx < 0 || idx >= n) bad(p, "successor index out of range");
                    if (!cost_of.emplace(idx, cpairs[i].second).second)
                        bad(p, "duplicate successor index");
                }
                std::set<int> seen;
                for (std::size_t i = 0; i < kpairs.size(); ++i) {
                    const std::string p = ap + ".kernel[" + std::to_string(i) + "]";
                    const int idx = as_int(jkernel[i][0], p + "[0]");
                    if (idx < 0 || idx >= n) bad(p, "successor index out of range");
                    if (!seen.insert(idx).second) bad(p, "duplicate successor index");
                    auto cit = cost_of.find(idx);
                    if (cit == cost_of.end())
                        bad(ap + ".costs",
                            "no cost for successor " + std::to_string(idx));
                    ae.transitions.push_back({idx, kpairs[i].second, cit->second});
                }
                if (cost_of.size() != seen.size())
                    bad(ap + ".costs", "cost entry for successor outside the kernel support");
                std::sort(ae.transitions.begin(), ae.transitions.end(),
                          [](const Transition& a, const Transition& b) {
                              return a.next < b.next;
                          });
                sl.actions.push_back(std::move(ae));
            }
            layer.states[static_cast<std::size_t>(x)] = std::move(sl);
        }
        m.layers.push_back(std::move(layer));
    }
    m.validate();
    return m;
}

/// Parses and fully validates a model document.
inline Model load_model(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const std::exception& e) {
        fail("ParseError", e.what());
    }
    return model_from_json(root);
}

/// Canonical JSON text for a model; load_model(save_model(m)) reproduces m.
inline std::string save_model(const Model& m) {
    m.validate();
    return dump_canonical(model_to_json(m));
}

} // namespace riskmdp

#endif // RISKMDP_JSON_IO_HPP
