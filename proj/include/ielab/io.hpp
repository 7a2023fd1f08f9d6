#pragma once

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "game.hpp"
#include "instances.hpp"

namespace ielab {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "1.0.0";

// ------------------------------------------------------------ scalars

inline Rational rational_from_json(const json& j, const std::string& what) {
    try {
        if (j.is_string()) return parse_rational(j.get<std::string>());
        if (j.is_number_integer()) return Rational(j.get<long long>());
        if (j.is_number()) return rational_from_double(j.get<double>());
    } catch (const std::invalid_argument& e) {
        throw InvalidInput(what + ": " + e.what());
    }
    throw InvalidInput(what + ": expected a number or a rational string");
}

inline json rational_to_json(const Rational& r) {
    if (denominator(r) == 1 && abs(numerator(r)) < 1'000'000'000) return json(numerator(r).convert_to<long long>());
    return json(to_string(r));
}

template <class T>
json scalar_to_json(const T& v) {
    if constexpr (is_exact_v<T>)
        return rational_to_json(v);
    else
        return json(v);
}

// "x,a,h" with 1-based entries
inline int triple_from_key(const std::string& key, const Dims& d) {
    int x = 0, a = 0, h = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(key);
    if (!(in >> x >> c1 >> a >> c2 >> h) || c1 != ',' || c2 != ',' || !in.eof())
        throw InvalidInput("bad triple key '" + key + "', expected \"x,a,h\"");
    if (x < 1 || x > d.S || a < 1 || a > d.A || h < 1 || h > d.H) throw InvalidInput("triple key '" + key + "' out of range");
    return d.triple(x - 1, a - 1, h - 1);
}

inline std::string triple_key(const Dims& d, int t) {
    auto [x, a, h] = d.unpack(t);
    return std::to_string(x + 1) + "," + std::to_string(a + 1) + "," + std::to_string(h + 1);
}

namespace detail {

inline void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
    if (!j.is_object()) throw InvalidInput(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw InvalidInput(where + ": unknown field '" + it.key() + "'");
    }
}

inline const json& need(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw InvalidInput(where + ": missing field '" + key + "'");
    return j.at(key);
}

inline std::vector<Rational> rational_list(const json& j, const std::string& what) {
    if (!j.is_array()) throw InvalidInput(what + ": expected an array");
    std::vector<Rational> out;
    for (const auto& v : j) out.push_back(rational_from_json(v, what));
    return out;
}

inline json rational_list_json(const std::vector<Rational>& v) {
    json a = json::array();
    for (const auto& r : v) a.push_back(rational_to_json(r));
    return a;
}

// model text before the shared reward support is known
struct RawModel {
    Dims dims;
    std::vector<Rational> init, trans;
    std::vector<std::map<Rational, Rational>> rewards;  // [triple]: value -> prob
};

inline RawModel parse_raw_model(const json& j, bool need_rewards, const std::string& where) {
    reject_unknown(j, {"S", "A", "H", "init", "transitions", "rewards"}, where);
    RawModel m;
    m.dims = Dims{need(j, "S", where).get<int>(), need(j, "A", where).get<int>(), need(j, "H", where).get<int>()};
    const Dims& d = m.dims;
    if (d.S < 1 || d.A < 1 || d.H < 1) throw InvalidInput(where + ": S, A, H must be positive");
    m.init = rational_list(need(j, "init", where), where + ".init");
    if (m.init.size() != static_cast<std::size_t>(d.S)) throw InvalidInput(where + ".init: need S entries");
    m.trans.assign(static_cast<std::size_t>(d.triples()) * d.S, Rational(0));
    std::vector<char> seen(static_cast<std::size_t>(d.triples()), 0);
    const json& tr = need(j, "transitions", where);
    if (!tr.is_object()) throw InvalidInput(where + ".transitions: expected an object keyed by \"x,a,h\"");
    for (auto it = tr.begin(); it != tr.end(); ++it) {
        int t = triple_from_key(it.key(), d);
        auto p = rational_list(it.value(), where + ".transitions." + it.key());
        if (p.size() != static_cast<std::size_t>(d.S)) throw InvalidInput(where + ".transitions." + it.key() + ": need S entries");
        std::copy(p.begin(), p.end(), m.trans.begin() + static_cast<std::ptrdiff_t>(t) * d.S);
        seen[static_cast<std::size_t>(t)] = 1;
    }
    for (int t = 0; t < d.triples(); ++t) {
        if (seen[static_cast<std::size_t>(t)]) continue;
        if (d.unpack(t)[2] + 1 == d.H)
            m.trans[static_cast<std::size_t>(t) * d.S] = 1;  // last step: sink on state 1
        else
            throw InvalidInput(where + ".transitions: missing triple " + triple_key(d, t));
    }
    m.rewards.resize(static_cast<std::size_t>(d.triples()));
    if (!j.contains("rewards")) {
        if (need_rewards) throw InvalidInput(where + ": missing field 'rewards'");
        for (auto& r : m.rewards) r[Rational(0)] = 1;
        return m;
    }
    const json& rw = j.at("rewards");
    if (!rw.is_object()) throw InvalidInput(where + ".rewards: expected an object keyed by \"x,a,h\"");
    std::vector<char> rseen(static_cast<std::size_t>(d.triples()), 0);
    for (auto it = rw.begin(); it != rw.end(); ++it) {
        int t = triple_from_key(it.key(), d);
        const std::string w = where + ".rewards." + it.key();
        auto& dist = m.rewards[static_cast<std::size_t>(t)];
        if (it.value().is_object()) {
            reject_unknown(it.value(), {"support", "probs"}, w);
            auto v = rational_list(need(it.value(), "support", w), w + ".support");
            auto p = rational_list(need(it.value(), "probs", w), w + ".probs");
            if (v.size() != p.size() || v.empty()) throw InvalidInput(w + ": support and probs differ in length");
            for (std::size_t i = 0; i < v.size(); ++i) dist[v[i]] += p[i];
        } else {
            dist[rational_from_json(it.value(), w)] = 1;  // point mass
        }
        rseen[static_cast<std::size_t>(t)] = 1;
    }
    for (int t = 0; t < d.triples(); ++t)
        if (!rseen[static_cast<std::size_t>(t)]) throw InvalidInput(where + ".rewards: missing triple " + triple_key(d, t));
    return m;
}

inline Model<Rational> build_model(const RawModel& r, const SupportPtr& sup) {
    auto m = Model<Rational>::blank(r.dims, sup);
    m.init = r.init;
    m.trans = r.trans;
    for (int t = 0; t < r.dims.triples(); ++t)
        for (const auto& [v, p] : r.rewards[static_cast<std::size_t>(t)]) {
            int i = sup->index_of(v);
            if (i < 0) throw InvalidInput("reward value outside the support");
            m.rew[static_cast<std::size_t>(t) * sup->size() + static_cast<std::size_t>(i)] += p;
        }
    m.finalize();
    return m;
}

}  // namespace detail

// ------------------------------------------------------------ models

inline Model<Rational> model_from_json(const json& j) {
    auto raw = detail::parse_raw_model(j, true, "model");
    std::set<Rational> vals;
    for (const auto& r : raw.rewards)
        for (const auto& [v, p] : r) vals.insert(v);
    return detail::build_model(raw, make_support({vals.begin(), vals.end()}));
}

template <class T>
json model_to_json(const Model<T>& m, bool with_rewards = true) {
    const Dims& d = m.dims;
    json j;
    j["S"] = d.S;
    j["A"] = d.A;
    j["H"] = d.H;
    json init = json::array();
    for (const auto& v : m.init) init.push_back(scalar_to_json(v));
    j["init"] = init;
    json tr = json::object(), rw = json::object();
    for (int t = 0; t < d.triples(); ++t) {
        json p = json::array();
        for (int y = 0; y < d.S; ++y) p.push_back(scalar_to_json(m.next(t)[y]));
        tr[triple_key(d, t)] = p;
        json sup = json::array(), probs = json::array();
        for (int i = 0; i < m.R(); ++i) {
            if (m.reward(t)[i] == 0) continue;
            sup.push_back(rational_to_json(m.support->values[static_cast<std::size_t>(i)]));
            probs.push_back(scalar_to_json(m.reward(t)[i]));
        }
        rw[triple_key(d, t)] = json{{"support", sup}, {"probs", probs}};
    }
    j["transitions"] = tr;
    if (with_rewards) j["rewards"] = rw;
    return j;
}

// ------------------------------------------------------------ priors

// A prior as written: either explicit atoms or a factored description
// (transition atoms times independent per-triple reward marginals).
struct PriorSpec {
    std::string name;
    std::variant<FactoredPrior, Prior<Rational>> body;

    bool factored() const { return body.index() == 0; }
    Dims dims() const { return factored() ? std::get<0>(body).dims() : std::get<1>(body).dims; }

    template <class T>
    PriorPtr<T> build() const {
        if (factored()) return std::make_shared<const Prior<T>>(expand<T>(std::get<0>(body)));
        if constexpr (is_exact_v<T>)
            return std::make_shared<const Prior<T>>(std::get<1>(body));
        else
            return std::make_shared<const Prior<T>>(convert_prior<T>(std::get<1>(body)));
    }

    DetReport det() const { return factored() ? det_parameters(std::get<0>(body)) : det_parameters(std::get<1>(body)); }
    ProbReport prob(const ProbInputs& in) const {
        return factored() ? prob_parameters(std::get<0>(body), in) : prob_parameters(std::get<1>(body), in);
    }

    json to_json() const;
    std::string digest() const { return detail::digest(to_json().dump()); }
};

inline json marginal_to_json(const RewardMarginal& m) {
    return json{{"means", detail::rational_list_json(m.means)}, {"probs", detail::rational_list_json(m.probs)}};
}

inline json PriorSpec::to_json() const {
    json j;
    if (factored()) {
        const auto& fp = std::get<0>(body);
        json f;
        json tr = json::array();
        for (std::size_t i = 0; i < fp.transition_atoms.size(); ++i)
            tr.push_back(json{{"model", model_to_json(fp.transition_atoms[i], false)},
                              {"weight", rational_to_json(fp.transition_weights[i])}});
        f["transitions"] = tr;
        f["family"] = fp.family == RewardFamily::bernoulli ? "bernoulli" : "point";
        json mg = json::object();
        for (int t = 0; t < fp.dims().triples(); ++t) mg[triple_key(fp.dims(), t)] = marginal_to_json(fp.marginals[static_cast<std::size_t>(t)]);
        f["marginals"] = mg;
        j["factored"] = f;
    } else {
        const auto& p = std::get<1>(body);
        json atoms = json::array();
        for (std::size_t i = 0; i < p.size(); ++i)
            atoms.push_back(json{{"model", model_to_json(p.atoms[i])}, {"weight", rational_to_json(p.weights[i])}});
        j["atoms"] = atoms;
    }
    return j;
}

inline RewardMarginal marginal_from_json(const json& j, const std::string& where) {
    detail::reject_unknown(j, {"means", "probs"}, where);
    RewardMarginal m{detail::rational_list(detail::need(j, "means", where), where + ".means"),
                     detail::rational_list(detail::need(j, "probs", where), where + ".probs")};
    return m;
}

inline PriorSpec builtin_prior(const std::string& name) { return PriorSpec{name, instances::by_name(name)}; }

// "builtin:<name>", {"builtin": name}, {"atoms": [...]} or {"factored": {...}}
inline PriorSpec prior_from_json(const json& j) {
    if (j.is_string()) {
        auto s = j.get<std::string>();
        if (s.rfind("builtin:", 0) == 0) return builtin_prior(s.substr(8));
        throw InvalidInput("prior: expected \"builtin:<name>\" or an object");
    }
    detail::reject_unknown(j, {"builtin", "atoms", "factored", "name"}, "prior");
    if (j.contains("builtin")) return builtin_prior(j.at("builtin").get<std::string>());
    std::string name = j.value("name", std::string("custom"));
    if (j.contains("atoms")) {
        const json& a = j.at("atoms");
        if (!a.is_array() || a.empty()) throw InvalidInput("prior.atoms: expected a nonempty array");
        std::vector<detail::RawModel> raws;
        std::vector<Rational> w;
        std::set<Rational> vals;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const std::string where = "prior.atoms[" + std::to_string(i) + "]";
            detail::reject_unknown(a[i], {"model", "weight"}, where);
            raws.push_back(detail::parse_raw_model(detail::need(a[i], "model", where), true, where + ".model"));
            w.push_back(rational_from_json(detail::need(a[i], "weight", where), where + ".weight"));
            for (const auto& r : raws.back().rewards)
                for (const auto& [v, p] : r) vals.insert(v);
        }
        auto sup = make_support({vals.begin(), vals.end()});
        std::vector<Model<Rational>> atoms;
        for (const auto& r : raws) atoms.push_back(detail::build_model(r, sup));
        return PriorSpec{name, Prior<Rational>(std::move(atoms), std::move(w))};
    }
    if (j.contains("factored")) {
        const json& f = j.at("factored");
        detail::reject_unknown(f, {"transitions", "family", "marginals", "default_marginal"}, "prior.factored");
        FactoredPrior fp;
        std::string fam = f.value("family", std::string("point"));
        if (fam == "bernoulli")
            fp.family = RewardFamily::bernoulli;
        else if (fam != "point")
            throw InvalidInput("prior.factored.family: expected \"point\" or \"bernoulli\"");
        const json& tr = detail::need(f, "transitions", "prior.factored");
        if (!tr.is_array() || tr.empty()) throw InvalidInput("prior.factored.transitions: expected a nonempty array");
        auto zero = make_support({Rational(0)});
        for (std::size_t i = 0; i < tr.size(); ++i) {
            const std::string where = "prior.factored.transitions[" + std::to_string(i) + "]";
            detail::reject_unknown(tr[i], {"model", "weight"}, where);
            auto raw = detail::parse_raw_model(detail::need(tr[i], "model", where), false, where + ".model");
            for (auto& r : raw.rewards) r = {{Rational(0), Rational(1)}};
            fp.transition_atoms.push_back(detail::build_model(raw, zero));
            fp.transition_weights.push_back(rational_from_json(detail::need(tr[i], "weight", where), where + ".weight"));
        }
        const Dims d = fp.dims();
        fp.marginals.resize(static_cast<std::size_t>(d.triples()));
        std::vector<char> seen(static_cast<std::size_t>(d.triples()), 0);
        if (f.contains("default_marginal")) {
            auto m = marginal_from_json(f.at("default_marginal"), "prior.factored.default_marginal");
            std::fill(fp.marginals.begin(), fp.marginals.end(), m);
            std::fill(seen.begin(), seen.end(), 1);
        }
        if (f.contains("marginals")) {
            const json& mg = f.at("marginals");
            if (!mg.is_object()) throw InvalidInput("prior.factored.marginals: expected an object keyed by \"x,a,h\"");
            for (auto it = mg.begin(); it != mg.end(); ++it) {
                int t = triple_from_key(it.key(), d);
                fp.marginals[static_cast<std::size_t>(t)] = marginal_from_json(it.value(), "prior.factored.marginals." + it.key());
                seen[static_cast<std::size_t>(t)] = 1;
            }
        }
        for (int t = 0; t < d.triples(); ++t)
            if (!seen[static_cast<std::size_t>(t)]) throw InvalidInput("prior.factored.marginals: missing triple " + triple_key(d, t));
        fp.validate();
        return PriorSpec{name, std::move(fp)};
    }
    throw InvalidInput("prior: need one of 'builtin', 'atoms', 'factored'");
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidInput("'" + path + "': " + e.what());
    }
}

// ------------------------------------------------------------ ledgers

inline json policy_to_json(const Policy& pi) {
    json a = json::array();
    for (int v : pi.act) a.push_back(v + 1);
    return a;
}

inline json steps_to_json(const Trajectory& tau, const RewardSupport& sup) {
    json s = json::array();
    for (std::size_t h = 0; h < tau.size(); ++h) {
        const Step& st = tau[h];
        json r = st.r < 0 ? json(nullptr) : rational_to_json(sup.values[static_cast<std::size_t>(st.r)]);
        s.push_back(json::array({st.x + 1, st.a + 1, static_cast<int>(h) + 1, r}));
    }
    return s;
}

inline json triples_to_json(const TripleSet& U) {
    json a = json::array();
    for (int t : U.members()) {
        auto [x, aa, h] = U.dims().unpack(t);
        a.push_back(json::array({x + 1, aa + 1, h + 1}));
    }
    return a;
}

// header line carrying dims, kind and the censor set, then one line per entry
inline std::string ledger_to_jsonl(const Ledger& l, const RewardSupport& sup) {
    std::string out;
    json head{{"type", "ledger"}, {"S", l.dims.S}, {"A", l.dims.A}, {"H", l.dims.H}, {"kind", to_string(l.kind)}, {"U", triples_to_json(l.U)}};
    out += head.dump() + "\n";
    for (const auto& e : l.entries) out += json{{"policy", policy_to_json(e.policy)}, {"steps", steps_to_json(e.steps, sup)}}.dump() + "\n";
    return out;
}

inline Ledger ledger_from_jsonl(const std::string& text, const RewardSupport& sup) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("ledger: empty input");
    json head = json::parse(line);
    detail::reject_unknown(head, {"type", "S", "A", "H", "kind", "U"}, "ledger header");
    Dims d{head.at("S").get<int>(), head.at("A").get<int>(), head.at("H").get<int>()};
    LedgerKind kind = LedgerKind::raw;
    std::string ks = head.value("kind", std::string("raw"));
    for (auto k : {LedgerKind::raw, LedgerKind::totally_censored, LedgerKind::honest, LedgerKind::hallucinated})
        if (ks == to_string(k)) kind = k;
    TripleSet U(d);
    for (const auto& t : head.at("U")) {
        int x = t.at(0).get<int>() - 1, a = t.at(1).get<int>() - 1, h = t.at(2).get<int>() - 1;
        if (x < 0 || x >= d.S || a < 0 || a >= d.A || h < 0 || h >= d.H) throw InvalidInput("ledger: U triple out of range");
        U.insert(d.triple(x, a, h));
    }
    Ledger l(d, U, kind);
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json e = json::parse(line);
        const std::string where = "ledger line " + std::to_string(lineno);
        detail::reject_unknown(e, {"policy", "steps"}, where);
        Policy pi(d);
        const json& pj = e.at("policy");
        if (pj.size() != pi.act.size()) throw InvalidInput(where + ": policy needs S*H actions");
        for (std::size_t i = 0; i < pi.act.size(); ++i) {
            pi.act[i] = pj[i].get<int>() - 1;
            if (pi.act[i] < 0 || pi.act[i] >= d.A) throw InvalidInput(where + ": action out of range");
        }
        const json& sj = e.at("steps");
        if (sj.size() != static_cast<std::size_t>(d.H)) throw InvalidInput(where + ": need H steps");
        Trajectory tau(static_cast<std::size_t>(d.H));
        for (int h = 0; h < d.H; ++h) {
            const json& s = sj[static_cast<std::size_t>(h)];
            Step& st = tau[static_cast<std::size_t>(h)];
            st.x = s.at(0).get<int>() - 1;
            st.a = s.at(1).get<int>() - 1;
            if (st.x < 0 || st.x >= d.S || st.a < 0 || st.a >= d.A || s.at(2).get<int>() != h + 1)
                throw InvalidInput(where + ": malformed step");
            if (s.at(3).is_null()) {
                st.r = -1;
            } else {
                st.r = sup.index_of(rational_from_json(s.at(3), where));
                if (st.r < 0) throw InvalidInput(where + ": reward outside the support");
            }
            if (st.a != pi(st.x, h)) throw InvalidInput(where + ": step disagrees with the policy");
            bool cens = U.contains(d.triple(st.x, st.a, h));
            if (cens != (st.r < 0)) throw InvalidInput(where + ": censoring disagrees with U");
        }
        l.entries.push_back({std::move(pi), std::move(tau)});
    }
    return l;
}

// ------------------------------------------------------------ game logs

inline json episode_to_json(const EpisodeRecord& e, const RewardSupport& sup) {
    return json{{"type", "episode"},       {"k", e.k},
                {"phase", e.phase},        {"hallucination", e.hallucination},
                {"ledger_kind", to_string(e.kind)}, {"ledger_id", e.ledger_id},
                {"policy", policy_to_json(e.policy)}, {"trajectory", steps_to_json(e.tau, sup)},
                {"stream", e.stream}};
}

inline json phase_to_json(const PhaseRecord& p) {
    json j{{"type", "phase"},
           {"phase", p.phase},
           {"kstar", p.kstar},
           {"U_size", p.U.size()},
           {"punish_prob", p.punish_prob},
           {"hal_model", p.hal_model + 1},
           {"cens_id", p.cens_id},
           {"hal_id", p.hal_id},
           {"hon_id", p.hon_id},
           {"hal_policy", policy_to_json(p.hal_policy)},
           {"exploit_policy", policy_to_json(p.exploit_policy)},
           {"new_triples", p.new_triples},
           {"covered", p.covered}};
    if (p.gap) j["gap"] = *p.gap;
    if (p.hh_lhs) j["hh_lhs"] = *p.hh_lhs;
    if (p.hh_rhs) j["hh_rhs"] = *p.hh_rhs;
    if (p.hh_holds) j["hh_holds"] = *p.hh_holds;
    if (p.chose_in_target) j["chose_in_target"] = *p.chose_in_target;
    return j;
}

inline json summary_to_json(const GameLog& log) {
    const auto& s = log.summary;
    return json{{"type", "summary"},
                {"seed", log.seed},
                {"agent", to_string(log.agent)},
                {"truth", s.truth + 1},
                {"phases_run", s.phases_run},
                {"phases_to_coverage", s.phases_to_coverage},
                {"reach_size", s.reach_size},
                {"new_triple_until_coverage", s.new_triple_until_coverage},
                {"visits", s.visits}};
}

// episode records in order, each followed by its phase record at phase end,
// and one summary record last
inline std::string game_log_jsonl(const GameLog& log, const RewardSupport& sup) {
    std::string out;
    std::size_t e = 0;
    for (const auto& p : log.phases) {
        for (; e < log.episodes.size() && log.episodes[e].phase == p.phase; ++e) out += episode_to_json(log.episodes[e], sup).dump() + "\n";
        out += phase_to_json(p).dump() + "\n";
    }
    out += summary_to_json(log).dump() + "\n";
    return out;
}

inline json config_to_json(const MechanismConfig& c) {
    return json{{"n_phase", c.n_phase},
                {"n_lrn", c.n_lrn},
                {"eps_pun", rational_to_json(c.eps_pun)},
                {"rho", rational_to_json(c.rho)},
                {"total_phases", c.total_phases}};
}

// ------------------------------------------------------------ summary CSV

// Column order is fixed; append new columns at the end only.
inline const std::vector<std::string>& summary_csv_columns() {
    static const std::vector<std::string> cols = {
        "seed",        "agent",         "truth",       "n_phase",    "n_lrn",
        "eps_pun",     "rho",           "total_phases", "phases_run", "reach_size",
        "phases_to_coverage", "explored", "new_triple_until_coverage", "min_reach_visits"};
    return cols;
}

inline std::string summary_csv_header() {
    std::string s;
    for (const auto& c : summary_csv_columns()) s += (s.empty() ? "" : ",") + c;
    return s + "\n";
}

template <class T>
std::string summary_csv_row(const GameLog& log, const Model<T>& truth) {
    const auto& s = log.summary;
    const auto& c = log.config;
    auto reach = reach_set(truth, from_rational<T>(c.rho));
    int min_visits = -1;
    for (int t : reach.members()) {
        int v = s.visits[static_cast<std::size_t>(t)];
        if (min_visits < 0 || v < min_visits) min_visits = v;
    }
    std::ostringstream o;
    o << log.seed << ',' << to_string(log.agent) << ',' << s.truth + 1 << ',' << c.n_phase << ',' << c.n_lrn << ','
      << json(to_double(c.eps_pun)).dump() << ',' << json(to_double(c.rho)).dump() << ',' << c.total_phases << ',' << s.phases_run << ','
      << s.reach_size << ',' << s.phases_to_coverage << ',' << (s.phases_to_coverage >= 0 ? 1 : 0) << ','
      << (s.new_triple_until_coverage ? 1 : 0) << ',' << min_visits << '\n';
    return o.str();
}

}  // namespace ielab
