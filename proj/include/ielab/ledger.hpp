#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "mdp.hpp"

namespace ielab {

enum class LedgerKind { raw, totally_censored, honest, hallucinated };

inline const char* to_string(LedgerKind k) {
    switch (k) {
        case LedgerKind::raw: return "raw";
        case LedgerKind::totally_censored: return "totally_censored";
        case LedgerKind::honest: return "honest";
        case LedgerKind::hallucinated: return "hallucinated";
    }
    return "?";
}

struct LedgerEntry {
    Policy policy;
    Trajectory steps;  // rewards of triples in the ledger's U are censored (r = -1)
    bool operator==(const LedgerEntry&) const = default;
};

// One censor set, an ordered sequence of (policy, censored trajectory).
// Equality and keys are order-sensitive and ignore the kind tag.
struct Ledger {
    Dims dims;
    TripleSet U;
    std::vector<LedgerEntry> entries;
    LedgerKind kind = LedgerKind::raw;

    Ledger() = default;
    explicit Ledger(Dims d, LedgerKind k = LedgerKind::raw) : dims(d), U(d), kind(k) {}
    Ledger(Dims d, TripleSet u, LedgerKind k) : dims(d), U(std::move(u)), kind(k) {}

    std::size_t size() const { return entries.size(); }
    bool operator==(const Ledger& o) const { return U == o.U && entries == o.entries; }

    // compact canonical key, usable in hash maps
    std::string key() const {
        std::string k = U.key();
        k.reserve(k.size() + entries.size() * static_cast<std::size_t>(dims.pairs() + 3 * dims.H + 1));
        for (const auto& e : entries) {
            k.push_back('|');
            for (int a : e.policy.act) k.push_back(static_cast<char>(64 + a));
            k.push_back(':');
            for (const auto& s : e.steps) {
                k.push_back(static_cast<char>(64 + s.x));
                k.push_back(static_cast<char>(64 + s.a));
                k.push_back(static_cast<char>(64 + s.r));
            }
        }
        return k;
    }
};

inline Trajectory censor_trajectory(const Trajectory& tau, const TripleSet& U) {
    Trajectory out = tau;
    const Dims& d = U.dims();
    for (int h = 0; h < static_cast<int>(out.size()); ++h)
        if (U.contains(d.triple(out[h].x, out[h].a, h))) out[h].r = -1;
    return out;
}

inline LedgerKind kind_for(const TripleSet& U, LedgerKind partial) {
    if (U.empty()) return LedgerKind::raw;
    if (U.size() == static_cast<std::size_t>(U.dims().triples())) return LedgerKind::totally_censored;
    return partial;
}

// censor further with U; the result's censor set is U together with the old one
inline Ledger censor(const Ledger& l, const TripleSet& U, LedgerKind partial = LedgerKind::honest) {
    TripleSet joint = l.U;
    for (int t : U.members()) joint.insert(t);
    Ledger out(l.dims, joint, kind_for(joint, partial));
    out.entries.reserve(l.entries.size());
    for (const auto& e : l.entries) out.entries.push_back({e.policy, censor_trajectory(e.steps, joint)});
    return out;
}

inline Ledger totally_censor(const Ledger& l) { return censor(l, TripleSet::all(l.dims)); }

// Entries are independent given the model; censored rewards contribute 1.
template <class T>
T ledger_probability(const Model<T>& m, const Ledger& l) {
    T prob(1);
    for (const auto& e : l.entries) {
        prob *= trajectory_probability(m, e.policy, e.steps);
        if (prob == 0) break;
    }
    return prob;
}

inline std::vector<int> visit_counts(const Ledger& l) {
    std::vector<int> n(static_cast<std::size_t>(l.dims.triples()), 0);
    for (const auto& e : l.entries) {
        // a trajectory visits each step once, so a triple at most once per entry
        for (int h = 0; h < static_cast<int>(e.steps.size()); ++h)
            ++n[static_cast<std::size_t>(l.dims.triple(e.steps[h].x, e.steps[h].a, h))];
    }
    return n;
}

inline TripleSet underexplored_set(const Ledger& l, int n_lrn) {
    auto n = visit_counts(l);
    TripleSet U(l.dims);
    for (int t = 0; t < l.dims.triples(); ++t)
        if (n[static_cast<std::size_t>(t)] < n_lrn) U.insert(t);
    return U;
}

// Counts of initial states, transitions and revealed rewards: the ledger
// likelihood under any model depends on the ledger only through these.
struct LedgerStats {
    bool consistent = true;  // every step's action matches its policy
    std::vector<std::pair<int, int>> init;   // (state, count)
    std::vector<std::pair<int, int>> trans;  // (triple*S + next, count)
    std::vector<std::pair<int, int>> rew;    // (triple*R + support index, count)
};

inline LedgerStats ledger_stats(const Ledger& l, int R) {
    const Dims& d = l.dims;
    std::vector<int> ci(static_cast<std::size_t>(d.S), 0);
    std::vector<int> ct(static_cast<std::size_t>(d.triples()) * d.S, 0);
    std::vector<int> cr(static_cast<std::size_t>(d.triples()) * R, 0);
    LedgerStats st;
    for (const auto& e : l.entries) {
        if (static_cast<int>(e.steps.size()) != d.H) {
            st.consistent = false;
            continue;
        }
        ++ci[static_cast<std::size_t>(e.steps[0].x)];
        for (int h = 0; h < d.H; ++h) {
            const Step& s = e.steps[static_cast<std::size_t>(h)];
            if (s.a != e.policy(s.x, h)) st.consistent = false;
            int t = d.triple(s.x, s.a, h);
            if (s.r >= 0) ++cr[static_cast<std::size_t>(t) * R + s.r];
            if (h + 1 < d.H) ++ct[static_cast<std::size_t>(t) * d.S + e.steps[static_cast<std::size_t>(h) + 1].x];
        }
    }
    auto sparse = [](const std::vector<int>& c) {
        std::vector<std::pair<int, int>> out;
        for (std::size_t i = 0; i < c.size(); ++i)
            if (c[i]) out.emplace_back(static_cast<int>(i), c[i]);
        return out;
    };
    st.init = sparse(ci);
    st.trans = sparse(ct);
    st.rew = sparse(cr);
    return st;
}

template <class T>
T stats_likelihood(const Model<T>& m, const LedgerStats& st) {
    if (!st.consistent) return T(0);
    T out(1);
    auto mul = [&](const std::vector<T>& table, const std::vector<std::pair<int, int>>& counts) {
        for (const auto& [i, c] : counts) {
            const T& p = table[static_cast<std::size_t>(i)];
            if (p == 0) {
                out = 0;
                return;
            }
            out *= ipow(p, static_cast<unsigned long>(c));
        }
    };
    mul(m.init, st.init);
    if (out != 0) mul(m.trans, st.trans);
    if (out != 0) mul(m.rew, st.rew);
    return out;
}

template <class T>
double stats_log_likelihood(const Model<T>& m, const LedgerStats& st) {
    constexpr double ninf = -std::numeric_limits<double>::infinity();
    if (!st.consistent) return ninf;
    double out = 0;
    auto add = [&](const std::vector<double>& table, const std::vector<std::pair<int, int>>& counts) {
        for (const auto& [i, c] : counts) {
            double lp = table[static_cast<std::size_t>(i)];
            if (lp == ninf) return false;
            out += c * lp;
        }
        return true;
    };
    if (!add(m.log_init, st.init) || !add(m.log_trans, st.trans) || !add(m.log_rew, st.rew)) return ninf;
    return out;
}

}  // namespace ielab
