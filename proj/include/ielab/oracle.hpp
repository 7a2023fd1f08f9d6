#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "analysis.hpp"
#include "mechanism.hpp"

namespace ielab {

enum class AgentMode { canonical_truster, fully_rational };

inline const char* to_string(AgentMode m) { return m == AgentMode::fully_rational ? "fully_rational" : "canonical_truster"; }

// where the hallucinated model is drawn from; `unconditioned` drops the
// punish event and is only a negative control
enum class HallucinationSource { conditioned, unconditioned };

struct OracleOptions {
    AgentMode agent = AgentMode::fully_rational;
    HallucinationSource source = HallucinationSource::conditioned;
    std::size_t leaf_cap = 1'000'000;
};

// joint law of (ledger, true atom): key -> ledger, truth -> mass
template <class T>
struct LedgerLaw {
    struct Cell {
        Ledger ledger;
        std::map<std::size_t, T> truth;
    };
    std::map<std::string, Cell> cells;

    void add(const Ledger& l, std::size_t truth, const T& p) {
        auto key = l.key();
        auto it = cells.find(key);
        if (it == cells.end()) it = cells.emplace(key, Cell{l, {}}).first;
        auto [jt, fresh] = it->second.truth.emplace(truth, p);
        if (!fresh) jt->second += p;
    }
    T total() const {
        T s(0);
        for (const auto& [k, c] : cells)
            for (const auto& [i, p] : c.truth) s += p;
        return s;
    }
};

template <class T>
struct Branch {
    std::size_t truth = 0;
    Ledger raw;
    T prob{0};
    double leaves = 1;  // unmerged leaves this branch stands for
};

template <class T>
struct CensGroup {
    Ledger cens;
    TripleSet U;
    ModelEvent punish;
    T mass{0};         // true probability of this censored ledger
    T punish_prob{0};  // Pr_can[punish | cens]
    std::vector<std::pair<std::size_t, T>> hal_models;  // law of the hallucinated atom
    std::map<std::string, T> hal_law;                   // law of the hallucinated ledger
    std::map<std::string, double> hal_pairs;            // (atom, draw) pairs per ledger
    std::vector<std::size_t> branches;
};

template <class T>
struct PhaseTable {
    long phase = 0;
    bool initial = false;
    T p0{0};  // prior probability that a given episode is the hallucination episode
    std::vector<std::string> hon_key;  // per branch
    std::vector<std::size_t> group_of;
    std::vector<CensGroup<T>> groups;
    std::unordered_map<std::string, Ledger> ledgers;
    std::unordered_map<std::string, std::map<std::size_t, T>> J_hal, J_hon;
    std::unordered_map<std::string, std::size_t> choice;  // hallucinated key -> chosen policy index
    std::size_t work = 0;
};

// Exact enumeration of the first L phases of the mechanism with the
// configured agent. Branches are merged by (true atom, raw ledger); the
// uniform hallucination episode is factored out analytically.
template <class T>
class JointTable {
public:
    JointTable(PriorPtr<T> prior, MechanismConfig cfg, long phases, OracleOptions opt = {})
        : prior_(std::move(prior)), cfg_(cfg), opt_(opt) {
        cfg_.validate();
        const auto& P = *prior_;
        std::vector<Branch<T>> start;
        for (std::size_t i = 0; i < P.size(); ++i) start.push_back({i, Ledger(P.dims), P.weights[i], 1.0});
        starts_.push_back(std::move(start));
        for (long l = 1; l <= phases; ++l) advance();
    }

    const PriorPtr<T>& prior() const { return prior_; }
    const MechanismConfig& config() const { return cfg_; }
    const OracleOptions& options() const { return opt_; }
    long phases() const { return static_cast<long>(tables_.size()); }

    // branches at the start of phase l (l = 1 .. phases()+1)
    const std::vector<Branch<T>>& start(long l) const { return starts_.at(static_cast<std::size_t>(l - 1)); }
    const PhaseTable<T>& table(long l) const {
        if (l < 1 || l > phases()) throw OracleUnavailable("no oracle table for phase " + std::to_string(l));
        return tables_[static_cast<std::size_t>(l - 1)];
    }

    std::vector<T> truth_marginal(long l) const {
        std::vector<T> m(prior_->size(), T(0));
        for (const auto& b : start(l)) m[b.truth] += b.prob;
        return m;
    }
    T total_mass(long l) const {
        T s(0);
        for (const auto& b : start(l)) s += b.prob;
        return s;
    }
    std::size_t leaf_count(long l) const { return start(l).size(); }
    // leaves with the hallucination episode and hallucinated-model draws unmerged
    double expanded_leaf_count(long l) const {
        double s = 0;
        for (const auto& b : start(l)) s += b.leaves;
        return s;
    }

    T p0_for(long phase, long k) const { return hallucination_prior<T>(cfg_, phase, k); }

    // Pr[mu* | revealed = key] when the revealed ledger is hallucinated
    // with probability p0 and honest otherwise
    Posterior<T> mechanism_posterior(long phase, const std::string& key, const T& p0) const {
        const auto& tab = table(phase);
        Posterior<T> post{prior_, std::vector<T>(prior_->size(), T(0)), key, "mechanism"};
        if (p0 != 0)
            if (auto it = tab.J_hal.find(key); it != tab.J_hal.end())
                for (const auto& [i, p] : it->second) post.w[i] += p0 * p;
        if (p0 != 1)
            if (auto it = tab.J_hon.find(key); it != tab.J_hon.end())
                for (const auto& [i, p] : it->second) post.w[i] += (T(1) - p0) * p;
        detail::normalize_or_throw(post.w, "revealed ledger impossible under both branches at phase " + std::to_string(phase));
        return post;
    }

    Posterior<T> mechanism_posterior(long k, const Ledger& revealed) const {
        long l = cfg_.phase_of(k);
        return mechanism_posterior(l, revealed.key(), p0_for(l, k));
    }

    // Pr[hallucination episode | revealed = key], from the J tables
    T p_hal(long phase, const std::string& key, const T& p0) const {
        const auto& tab = table(phase);
        T hal(0), hon(0);
        if (auto it = tab.J_hal.find(key); it != tab.J_hal.end())
            for (const auto& [i, p] : it->second) hal += p;
        if (auto it = tab.J_hon.find(key); it != tab.J_hon.end())
            for (const auto& [i, p] : it->second) hon += p;
        T num = p0 * hal, den = p0 * hal + (T(1) - p0) * hon;
        if (!(den > 0)) throw ZeroEvidence("p_hal of an impossible ledger");
        return num / den;
    }

    // same quantity summed branch by branch
    T p_hal_direct(long phase, const std::string& key, const T& p0) const {
        const auto& tab = table(phase);
        const auto& br = start(phase);
        T hal(0), hon(0);
        for (std::size_t b = 0; b < br.size(); ++b) {
            const auto& g = tab.groups[tab.group_of[b]];
            if (auto it = g.hal_law.find(key); it != g.hal_law.end()) hal += br[b].prob * it->second;
            if (tab.hon_key[b] == key) hon += br[b].prob;
        }
        T den = p0 * hal + (T(1) - p0) * hon;
        if (!(den > 0)) throw ZeroEvidence("p_hal of an impossible ledger");
        return p0 * hal / den;
    }

    const Policy& policy(std::size_t idx) const { return prior_->values().policies[idx]; }

    std::size_t choice(long phase, const std::string& key) const {
        const auto& tab = table(phase);
        auto it = tab.choice.find(key);
        if (it == tab.choice.end()) throw ZeroEvidence("ledger is not a realizable hallucinated ledger at phase " + std::to_string(phase));
        return it->second;
    }

    // the agent's choice on any revealed ledger of the phase
    std::size_t choose(long phase, const std::string& key, const T& p0) const {
        if (opt_.agent == AgentMode::canonical_truster) {
            const auto& tab = table(phase);
            return canonical_choice(tab.ledgers.at(key));
        }
        return greedy_index(mechanism_posterior(phase, key, p0));
    }

    enum class Source { censored, honest, hallucinated };

    LedgerLaw<T> law(Source s, long phase) const {
        const auto& tab = table(phase);
        const auto& br = start(phase);
        LedgerLaw<T> out;
        for (std::size_t b = 0; b < br.size(); ++b) {
            const auto& g = tab.groups[tab.group_of[b]];
            switch (s) {
                case Source::censored: out.add(g.cens, br[b].truth, br[b].prob); break;
                case Source::honest: out.add(tab.ledgers.at(tab.hon_key[b]), br[b].truth, br[b].prob); break;
                case Source::hallucinated:
                    for (const auto& [k, q] : g.hal_law) out.add(tab.ledgers.at(k), br[b].truth, T(br[b].prob * q));
                    break;
            }
        }
        return out;
    }

private:
    std::size_t greedy_index(const Posterior<T>& post) const { return argmax_policies(policy_values(post)).front(); }
    std::size_t canonical_choice(const Ledger& l) const { return greedy_index(canonical_posterior(prior_, l)); }

    void advance() {
        const long l = phases() + 1;
        const auto& P = *prior_;
        const auto& br = starts_.back();
        PhaseTable<T> tab;
        tab.phase = l;
        tab.initial = cfg_.initial_phase(l);
        tab.p0 = tab.initial ? T(1) : T(1) / T(cfg_.n_phase);
        const double kfac = tab.initial ? 1.0 : static_cast<double>(cfg_.n_phase);

        std::unordered_map<std::string, std::size_t> group_index;
        tab.group_of.resize(br.size());
        tab.hon_key.resize(br.size());
        for (std::size_t b = 0; b < br.size(); ++b) {
            const Ledger& raw = br[b].raw;
            Ledger cens = totally_censor(raw);
            auto ck = cens.key();
            auto [it, fresh] = group_index.emplace(ck, tab.groups.size());
            if (fresh) {
                CensGroup<T> g;
                g.U = underexplored_set(raw, cfg_.n_lrn);
                g.cens = std::move(cens);
                tab.groups.push_back(std::move(g));
            }
            auto& g = tab.groups[it->second];
            g.branches.push_back(b);
            g.mass += br[b].prob;
            tab.group_of[b] = it->second;
            Ledger hon = honest_ledger(raw, g.U);
            tab.hon_key[b] = hon.key();
            tab.J_hon[tab.hon_key[b]][br[b].truth] += br[b].prob;
            tab.ledgers.emplace(tab.hon_key[b], std::move(hon));
        }

        for (auto& g : tab.groups) {
            g.punish = punish_event(P, g.U.complement(), cfg_.eps_pun);
            auto cens_post = canonical_posterior(prior_, g.cens);
            g.punish_prob = cens_post.mass(g.punish);
            Posterior<T> hal_post;
            try {
                hal_post = opt_.source == HallucinationSource::conditioned ? canonical_posterior(prior_, g.cens, g.punish)
                                                                           : cens_post;
            } catch (const ZeroEvidence&) {
                throw ZeroEvidence("phase " + std::to_string(l) + ": punish event has zero canonical mass given the censored ledger");
            }
            for (std::size_t i = 0; i < hal_post.w.size(); ++i) {
                if (hal_post.w[i] == 0) continue;
                g.hal_models.emplace_back(i, hal_post.w[i]);
                for (auto& [led, q] : hallucinated_ledger_law(g.cens, P.atoms[i], g.U, opt_.leaf_cap)) {
                    auto k = led.key();
                    g.hal_law[k] += hal_post.w[i] * q;
                    g.hal_pairs[k] += 1;
                    tab.ledgers.emplace(k, std::move(led));
                }
            }
            for (std::size_t b : g.branches)
                for (const auto& [k, q] : g.hal_law) tab.J_hal[k][br[b].truth] += br[b].prob * q;
        }

        for (const auto& g : tab.groups)
            for (const auto& [k, q] : g.hal_law)
                if (!tab.choice.count(k))
                    tab.choice.emplace(k, opt_.agent == AgentMode::canonical_truster
                                              ? canonical_choice(tab.ledgers.at(k))
                                              : greedy_index(mechanism_posterior_from(tab, k)));

        std::unordered_map<std::string, std::size_t> next_index;
        std::vector<Branch<T>> next;
        for (std::size_t b = 0; b < br.size(); ++b) {
            const auto& g = tab.groups[tab.group_of[b]];
            const auto& truth = P.atoms[br[b].truth];
            for (const auto& [k, q] : g.hal_law) {
                std::size_t pi_idx = tab.choice.at(k);
                const Policy& pi = policy(pi_idx);
                double pairs = g.hal_pairs.at(k);
                for (auto& [tau, p] : enumerate_trajectories(truth, pi)) {
                    if (++tab.work > opt_.leaf_cap)
                        throw CapExceeded("oracle enumeration exceeds " + std::to_string(opt_.leaf_cap) + " leaves at phase " +
                                          std::to_string(l));
                    Ledger raw = br[b].raw;
                    raw.entries.push_back({pi, std::move(tau)});
                    auto key = std::to_string(br[b].truth) + "#" + raw.key();
                    T mass = br[b].prob * q * p;
                    double leaves = br[b].leaves * kfac * pairs;
                    auto [it, fresh] = next_index.emplace(key, next.size());
                    if (fresh)
                        next.push_back({br[b].truth, std::move(raw), mass, leaves});
                    else {
                        next[it->second].prob += mass;
                        next[it->second].leaves += leaves;
                    }
                }
            }
        }
        tables_.push_back(std::move(tab));
        starts_.push_back(std::move(next));
    }

    Posterior<T> mechanism_posterior_from(const PhaseTable<T>& tab, const std::string& key) const {
        Posterior<T> post{prior_, std::vector<T>(prior_->size(), T(0)), key, "mechanism"};
        if (auto it = tab.J_hal.find(key); it != tab.J_hal.end())
            for (const auto& [i, p] : it->second) post.w[i] += tab.p0 * p;
        if (tab.p0 != 1)
            if (auto it = tab.J_hon.find(key); it != tab.J_hon.end())
                for (const auto& [i, p] : it->second) post.w[i] += (T(1) - tab.p0) * p;
        detail::normalize_or_throw(post.w, "hallucinated ledger with zero mass");
        return post;
    }

    PriorPtr<T> prior_;
    MechanismConfig cfg_;
    OracleOptions opt_;
    std::vector<std::vector<Branch<T>>> starts_;
    std::vector<PhaseTable<T>> tables_;
};

template <class T>
std::shared_ptr<const JointTable<T>> enumerate_game(const MechanismConfig& cfg, const PriorPtr<T>& prior, long phases,
                                                    OracleOptions opt = {}) {
    return std::make_shared<const JointTable<T>>(prior, cfg, phases, opt);
}

// ------------------------------------------------------------ hygiene

template <class T>
T total_variation(const std::vector<T>& p, const std::vector<T>& q) {
    T s(0);
    for (std::size_t i = 0; i < p.size(); ++i) s += abs_value(T(p[i] - q[i]));
    return s / T(2);
}

template <class T>
struct HygieneReport {
    T max_tv{0};
    std::string worst_key;
    std::size_t ledgers = 0;
};

// max over realizable ledgers of TV(true posterior, canonical posterior)
template <class T>
HygieneReport<T> hygiene_tv(const PriorPtr<T>& prior, const LedgerLaw<T>& law) {
    HygieneReport<T> rep;
    for (const auto& [key, cell] : law.cells) {
        std::vector<T> truth(prior->size(), T(0));
        for (const auto& [i, p] : cell.truth) truth[i] += p;
        detail::normalize_or_throw(truth, "ledger with zero mass in the law");
        auto can = canonical_posterior(prior, cell.ledger);
        T tv = total_variation(truth, can.w);
        ++rep.ledgers;
        if (rep.ledgers == 1 || tv > rep.max_tv) {
            rep.max_tv = tv;
            rep.worst_key = key;
        }
    }
    return rep;
}

enum class HygieneLedger { censored, honest };

template <class T>
HygieneReport<T> hygiene_tv(const JointTable<T>& table, HygieneLedger kind, long phase) {
    using S = typename JointTable<T>::Source;
    return hygiene_tv(table.prior(), table.law(kind == HygieneLedger::censored ? S::censored : S::honest, phase));
}

namespace counterexamples {

// one arm, one step, point reward uniform on {0, 4/5}; the mechanism always
// reveals the reward 4/5 whatever the truth
template <class T>
std::pair<PriorPtr<T>, LedgerLaw<T>> fabricated_rewards() {
    const Dims d{1, 1, 1};
    auto sup = make_support({Rational(0), Rational(4, 5)});
    std::vector<Model<T>> atoms;
    for (int r = 0; r < 2; ++r) {
        auto m = Model<Rational>::blank(d, sup);
        m.init = {1};
        m.trans = {1};
        m.rew[static_cast<std::size_t>(r)] = 1;
        m.finalize();
        atoms.push_back(convert_model<T>(m));
    }
    auto prior = std::make_shared<const Prior<T>>(std::move(atoms), std::vector<T>{from_rational<T>(Rational(1, 2)), from_rational<T>(Rational(1, 2))});
    Ledger l(d);
    l.entries.push_back({Policy(d, 0), {{0, 0, 1}}});
    LedgerLaw<T> law;
    for (std::size_t i = 0; i < 2; ++i) law.add(l, i, prior->weights[i]);
    return {prior, law};
}

// two-armed bandit, rewards in {0,1} per arm, uniform prior; arm 1 is pulled
// first and the revealed ledger is the second pull: arm 1 again if it paid,
// arm 2 otherwise
template <class T>
std::pair<PriorPtr<T>, LedgerLaw<T>> policy_selection() {
    const Dims d{1, 2, 1};
    auto sup = make_support({Rational(0), Rational(1)});
    std::vector<Model<T>> atoms;
    std::vector<std::pair<int, int>> rewards;
    for (int r1 = 0; r1 < 2; ++r1)
        for (int r2 = 0; r2 < 2; ++r2) {
            auto m = Model<Rational>::blank(d, sup);
            m.init = {1};
            m.trans = {1, 1};
            m.rew[static_cast<std::size_t>(r1)] = 1;
            m.rew[2 + static_cast<std::size_t>(r2)] = 1;
            m.finalize();
            atoms.push_back(convert_model<T>(m));
            rewards.emplace_back(r1, r2);
        }
    std::vector<T> w(4, from_rational<T>(Rational(1, 4)));
    auto prior = std::make_shared<const Prior<T>>(std::move(atoms), std::move(w));
    LedgerLaw<T> law;
    for (std::size_t i = 0; i < 4; ++i) {
        auto [r1, r2] = rewards[i];
        int a2 = r1 == 1 ? 0 : 1;
        Ledger l(d);
        l.entries.push_back({Policy(d, a2), {{0, a2, a2 == 0 ? r1 : r2}}});
        law.add(l, i, prior->weights[i]);
    }
    return {prior, law};
}

}  // namespace counterexamples

// ------------------------------------------------------------ distribution equality

template <class T>
struct DistributionCheck {
    T max_tv{0};
    std::size_t groups = 0, skipped = 0;
};

// per censored ledger: TV between law(honest | cens, punish) from the table
// and the hallucinated-ledger law
template <class T>
DistributionCheck<T> hallucination_distribution_check(const JointTable<T>& table, long phase) {
    const auto& tab = table.table(phase);
    const auto& br = table.start(phase);
    DistributionCheck<T> out;
    for (const auto& g : tab.groups) {
        std::map<std::string, T> hon;
        T mass(0);
        for (std::size_t b : g.branches)
            if (g.punish.contains(br[b].truth)) {
                hon[tab.hon_key[b]] += br[b].prob;
                mass += br[b].prob;
            }
        if (!(mass > 0)) {
            ++out.skipped;
            continue;
        }
        std::map<std::string, std::pair<T, T>> both;
        for (auto& [k, p] : hon) both[k].first = p / mass;
        for (const auto& [k, p] : g.hal_law) both[k].second = p;
        T tv(0);
        for (const auto& [k, pq] : both) tv += abs_value(T(pq.first - pq.second));
        tv /= T(2);
        if (out.groups == 0 || tv > out.max_tv) out.max_tv = tv;
        ++out.groups;
    }
    return out;
}

// ------------------------------------------------------------ one-step audit

// target subset given the under-explored set and a model carrying the transitions
template <class T>
using TargetSet = std::function<PolicySubset(const TripleSet& U, const Model<T>& truth)>;

template <class T>
TargetSet<T> sufficiently_visiting_target(const T& rho0) {
    return [rho0](const TripleSet& U, const Model<T>& m) { return sufficiently_visiting_policies(m, U, rho0); };
}

template <class T>
struct AuditWitness {
    std::string key;
    T punish_prob{0}, gap{0}, p_hal{0};
    HHCondition<T> condition;
    std::vector<std::size_t> argmax;
    bool argmax_in_target = false;
    std::size_t chosen = 0;
    bool chosen_in_target = false;
};

template <class T>
struct AuditReport {
    long phase = 0;
    std::size_t realizations = 0, condition_held = 0, violations = 0, degenerate = 0, left_target = 0;
    std::vector<AuditWitness<T>> witnesses;
    bool vacuous() const { return condition_held == 0; }
    bool passed() const { return violations == 0; }
};

struct AuditOptions {
    bool skip_degenerate = false;
};

// for every realizable hallucinated ledger: condition => every argmax of the
// mechanism posterior lies in the target set
template <class T>
AuditReport<T> one_step_audit(const JointTable<T>& table, long phase, const TargetSet<T>& target,
                              AuditOptions opt = {}) {
    const auto& tab = table.table(phase);
    const auto& br = table.start(phase);
    const auto& P = *table.prior();
    const int H = P.dims.H;
    AuditReport<T> rep;
    rep.phase = phase;
    for (const auto& g : tab.groups) {
        PolicySubset Pi = target(g.U, P.atoms[br[g.branches.front()].truth]);
        for (std::size_t b : g.branches)
            if (target(g.U, P.atoms[br[b].truth]) != Pi)
                throw PreconditionViolated("target set depends on the hidden truth within a censored ledger");
        std::size_t inside = static_cast<std::size_t>(std::count(Pi.begin(), Pi.end(), 1));
        if (inside == 0 || inside == Pi.size()) {
            if (!opt.skip_degenerate)
                throw DegenerateSplit("target set is " + std::string(inside == 0 ? "empty" : "the full policy space") +
                                      " at phase " + std::to_string(phase));
            rep.degenerate += g.hal_law.size();
            continue;
        }
        for (const auto& [k, q] : g.hal_law) {
            AuditWitness<T> w;
            w.key = k;
            w.punish_prob = g.punish_prob;
            w.gap = canonical_gap(canonical_posterior(table.prior(), tab.ledgers.at(k)), Pi);
            w.condition = hh_condition(table.config().n_phase, g.punish_prob, w.gap, H);
            auto vals = policy_values(table.mechanism_posterior(phase, k, tab.p0));
            w.argmax = argmax_policies(vals);
            w.argmax_in_target = std::all_of(w.argmax.begin(), w.argmax.end(), [&](std::size_t j) { return Pi[j] != 0; });
            w.chosen = tab.choice.at(k);
            w.chosen_in_target = Pi[w.chosen] != 0;
            w.p_hal = table.p_hal(phase, k, tab.p0);
            ++rep.realizations;
            if (w.condition.holds) ++rep.condition_held;
            if (!w.argmax_in_target) ++rep.left_target;
            if (w.condition.holds && !w.argmax_in_target) ++rep.violations;
            rep.witnesses.push_back(std::move(w));
        }
    }
    return rep;
}

// ------------------------------------------------------------ p_hal audit

template <class T>
struct PHalReport {
    std::size_t ledgers = 0, bound_violations = 0, method_mismatches = 0;
    T min_slack{0};
};

// p_hal <= 1/(1 + q(1-p0)/p0) with q = Pr_can[punish | cens], at every
// realizable hallucinated ledger of a non-initial phase
template <class T>
PHalReport<T> p_hal_audit(const JointTable<T>& table, long phase) {
    const auto& tab = table.table(phase);
    PHalReport<T> rep;
    if (tab.initial) return rep;
    for (const auto& g : tab.groups)
        for (const auto& [k, q] : g.hal_law) {
            T a = table.p_hal(phase, k, tab.p0), b = table.p_hal_direct(phase, k, tab.p0);
            bool same = is_exact_v<T> ? a == b : !(abs_value(T(a - b)) > tie_tolerance(a));
            if (!same) ++rep.method_mismatches;
            T slack = p_hal_bound(tab.p0, g.punish_prob) - a;
            if (rep.ledgers == 0 || slack < rep.min_slack) rep.min_slack = slack;
            if (slack < -tie_tolerance(T(1))) ++rep.bound_violations;
            ++rep.ledgers;
        }
    return rep;
}

}  // namespace ielab
