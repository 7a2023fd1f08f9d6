#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "ledger.hpp"
#include "mdp.hpp"

namespace ielab {

inline constexpr std::size_t kExpansionCap = 100'000;

template <class T>
struct PolicyTable {
    std::vector<Policy> policies;  // canonical-encoding order
    std::vector<T> value;          // [atom * |policies| + policy]
};

template <class T>
class Prior {
public:
    Dims dims;
    SupportPtr support;
    std::vector<Model<T>> atoms;
    std::vector<T> weights;

    Prior() : cache_(std::make_shared<Cache>()) {}
    Prior(std::vector<Model<T>> a, std::vector<T> w) : atoms(std::move(a)), weights(std::move(w)), cache_(std::make_shared<Cache>()) {
        validate();
    }

    std::size_t size() const { return atoms.size(); }

    void validate() {
        if (atoms.empty()) throw InvalidInput("prior has no atoms");
        if (atoms.size() != weights.size()) throw InvalidInput("prior: atoms and weights differ in length");
        dims = atoms[0].dims;
        support = atoms[0].support;
        T sum(0);
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            if (!(atoms[i].dims == dims)) throw InvalidInput("prior atoms disagree on (S,A,H)");
            if (atoms[i].support != support && atoms[i].support->values != support->values)
                throw InvalidInput("prior atoms disagree on the reward support");
            if (!(weights[i] > 0)) throw InvalidInput("prior weights must be positive");
            sum += weights[i];
        }
        if (std::abs(to_double(T(sum - T(1)))) > kProbTolerance) throw InvalidInput("prior weights do not sum to 1");
        if constexpr (is_exact_v<T>) {
            if (sum != 1)
                for (auto& w : weights) w /= sum;
        }
    }

    // value of every enumerated policy under every atom, computed once
    const PolicyTable<T>& values() const {
        std::call_once(cache_->once, [&] {
            PolicyTable<T> tab;
            tab.policies = enumerate_policies(dims);
            tab.value.reserve(atoms.size() * tab.policies.size());
            for (const auto& m : atoms)
                for (const auto& pi : tab.policies) tab.value.push_back(policy_value(m, pi));
            cache_->table = std::move(tab);
        });
        return cache_->table;
    }

private:
    struct Cache {
        std::once_flag once;
        PolicyTable<T> table;
    };
    std::shared_ptr<Cache> cache_;
};

template <class T>
using PriorPtr = std::shared_ptr<const Prior<T>>;

template <class U, class T>
Prior<U> convert_prior(const Prior<T>& p) {
    std::vector<Model<U>> atoms;
    std::vector<U> w;
    for (std::size_t i = 0; i < p.size(); ++i) {
        atoms.push_back(convert_model<U>(p.atoms[i]));
        if constexpr (std::is_same_v<U, T>)
            w.push_back(p.weights[i]);
        else if constexpr (is_exact_v<U>)
            w.push_back(rational_from_double(to_double(p.weights[i])));
        else
            w.push_back(to_double(p.weights[i]));
    }
    if constexpr (!is_exact_v<U>) {
        double s = 0;
        for (double x : w) s += x;
        for (double& x : w) x /= s;
    }
    return Prior<U>(std::move(atoms), std::move(w));
}

// ------------------------------------------------------------ events

// explicit subset of prior atom indices
struct ModelEvent {
    std::vector<char> in;
    std::string id = "all";

    static ModelEvent full(std::size_t n) { return {std::vector<char>(n, 1), "all"}; }
    std::size_t universe() const { return in.size(); }
    bool contains(std::size_t i) const { return in[i] != 0; }
    std::size_t count() const { return static_cast<std::size_t>(std::count(in.begin(), in.end(), 1)); }
    std::vector<std::size_t> members() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < in.size(); ++i)
            if (in[i]) out.push_back(i);
        return out;
    }
};

// ------------------------------------------------------------ posteriors

template <class T>
struct Posterior {
    PriorPtr<T> prior;
    std::vector<T> w;  // over prior atoms, sums to 1
    std::string ledger_key;
    std::string event_id = "all";

    std::size_t size() const { return w.size(); }
    std::size_t support_size() const {
        return static_cast<std::size_t>(std::count_if(w.begin(), w.end(), [](const T& x) { return x != 0; }));
    }
    T mass(const ModelEvent& e) const {
        T s(0);
        for (std::size_t i = 0; i < w.size(); ++i)
            if (e.contains(i)) s += w[i];
        return s;
    }
};

template <class T>
Posterior<T> prior_posterior(const PriorPtr<T>& prior) {
    return {prior, prior->weights, "", "all"};
}

namespace detail {

inline std::string digest(const std::string& s) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(s)));
    return buf;
}

template <class T>
void normalize_or_throw(std::vector<T>& w, const std::string& what) {
    T sum(0);
    for (const auto& x : w) sum += x;
    if (!(sum > 0)) throw ZeroEvidence(what);
    for (auto& x : w)
        if (x != 0) x /= sum;
}

}  // namespace detail

// Reweight by the likelihood of the ledger's entries and restrict to the event.
template <class T>
Posterior<T> condition(const Posterior<T>& base, const Ledger& l, const ModelEvent& ev) {
    const Prior<T>& P = *base.prior;
    if (ev.universe() != P.size()) throw InvalidInput("event does not match the prior's atoms");
    auto st = ledger_stats(l, static_cast<int>(P.support->size()));
    Posterior<T> out{base.prior, std::vector<T>(P.size(), T(0)), base.ledger_key + l.key(),
                     base.event_id == "all" ? ev.id : base.event_id + "&" + ev.id};
    if constexpr (is_exact_v<T>) {
        for (std::size_t i = 0; i < P.size(); ++i)
            if (ev.contains(i) && base.w[i] != 0) out.w[i] = base.w[i] * stats_likelihood(P.atoms[i], st);
    } else {
        std::vector<double> ll(P.size(), -std::numeric_limits<double>::infinity());
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < P.size(); ++i) {
            if (!ev.contains(i) || base.w[i] == 0) continue;
            ll[i] = stats_log_likelihood(P.atoms[i], st);
            best = std::max(best, ll[i]);
        }
        if (best > -std::numeric_limits<double>::infinity())
            for (std::size_t i = 0; i < P.size(); ++i)
                if (ll[i] > -std::numeric_limits<double>::infinity()) out.w[i] = base.w[i] * std::exp(ll[i] - best);
    }
    detail::normalize_or_throw(out.w, "conditioning on a ledger/event of zero probability (event " + ev.id + ")");
    return out;
}

// Pr_can[mu* in . | ledger, event]: the ledger's policies treated as fixed
template <class T>
Posterior<T> canonical_posterior(const PriorPtr<T>& prior, const Ledger& l, const ModelEvent& ev) {
    return condition(prior_posterior(prior), l, ev);
}

template <class T>
Posterior<T> canonical_posterior(const PriorPtr<T>& prior, const Ledger& l) {
    return canonical_posterior(prior, l, ModelEvent::full(prior->size()));
}

// atoms under which the ledger has positive probability
template <class T>
ModelEvent consistent_models(const Prior<T>& prior, const Ledger& l) {
    auto st = ledger_stats(l, static_cast<int>(prior.support->size()));
    ModelEvent e{std::vector<char>(prior.size(), 0), "consistent:" + detail::digest(l.key())};
    for (std::size_t i = 0; i < prior.size(); ++i) e.in[i] = stats_likelihood(prior.atoms[i], st) != 0 ? 1 : 0;
    return e;
}

// ------------------------------------------------------------ values

template <class T>
T conditional_value(const Posterior<T>& post, const Policy& pi) {
    T v(0);
    for (std::size_t i = 0; i < post.w.size(); ++i)
        if (post.w[i] != 0) v += post.w[i] * policy_value(post.prior->atoms[i], pi);
    return v;
}

// conditional value of every enumerated policy
template <class T>
std::vector<T> policy_values(const Posterior<T>& post) {
    const auto& tab = post.prior->values();
    const std::size_t n = tab.policies.size();
    std::vector<T> v(n, T(0));
    for (std::size_t i = 0; i < post.w.size(); ++i) {
        if (post.w[i] == 0) continue;
        const T* row = tab.value.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) v[j] += post.w[i] * row[j];
    }
    return v;
}

// indices (= encodings) of all maximizers, ascending
template <class T>
std::vector<std::size_t> argmax_policies(const std::vector<T>& values) {
    T best = values[0];
    for (const auto& v : values)
        if (v > best) best = v;
    T tol = tie_tolerance(best);
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < values.size(); ++j)
        if (!(values[j] < best - tol)) out.push_back(j);
    return out;
}

template <class T>
Policy bayes_greedy(const Posterior<T>& post) {
    auto v = policy_values(post);
    return post.prior->values().policies[argmax_policies(v).front()];
}

// membership mask over enumerated policies
using PolicySubset = std::vector<char>;

template <class T>
T canonical_gap(const std::vector<T>& values, const PolicySubset& Pi) {
    if (Pi.size() != values.size()) throw InvalidInput("policy subset does not match the policy space");
    bool has_in = false, has_out = false;
    T in_best(0), out_best(0);
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (Pi[j]) {
            if (!has_in || values[j] > in_best) in_best = values[j];
            has_in = true;
        } else {
            if (!has_out || values[j] > out_best) out_best = values[j];
            has_out = true;
        }
    }
    if (!has_in) throw DegenerateSplit("canonical gap of an empty policy subset");
    if (!has_out) throw DegenerateSplit("canonical gap of the full policy space");
    return in_best - out_best;
}

template <class T>
T canonical_gap(const Posterior<T>& post, const PolicySubset& Pi) {
    return canonical_gap(policy_values(post), Pi);
}

inline PolicySubset complement(const PolicySubset& Pi) {
    PolicySubset c(Pi.size());
    for (std::size_t j = 0; j < Pi.size(); ++j) c[j] = Pi[j] ? 0 : 1;
    return c;
}

// ------------------------------------------------------------ reward summaries

// min over triples of Pr[mean reward <= eps]
template <class T>
T f_min(const Prior<T>& prior, const T& eps) {
    if (eps < 0) throw PreconditionViolated("f_min: eps must be nonnegative");
    T best(1);
    for (int t = 0; t < prior.dims.triples(); ++t) {
        T m(0);
        for (std::size_t i = 0; i < prior.size(); ++i)
            if (!(prior.atoms[i].mean[static_cast<std::size_t>(t)] > eps)) m += prior.weights[i];
        if (m < best) best = m;
    }
    return best;
}

// min over triples of the prior-mean reward
template <class T>
T r_min(const Prior<T>& prior) {
    T best(0);
    for (int t = 0; t < prior.dims.triples(); ++t) {
        T m(0);
        for (std::size_t i = 0; i < prior.size(); ++i) m += prior.weights[i] * prior.atoms[i].mean[static_cast<std::size_t>(t)];
        if (t == 0 || m < best) best = m;
    }
    return best;
}

// ------------------------------------------------------------ factored priors

enum class RewardFamily { point, bernoulli };

struct RewardMarginal {
    std::vector<Rational> means;
    std::vector<Rational> probs;
};

// transition structures times independent per-triple mean rewards
struct FactoredPrior {
    std::vector<Model<Rational>> transition_atoms;  // rewards ignored
    std::vector<Rational> transition_weights;
    std::vector<RewardMarginal> marginals;  // [triple]
    RewardFamily family = RewardFamily::point;

    Dims dims() const { return transition_atoms.at(0).dims; }

    SupportPtr reward_support() const {
        if (family == RewardFamily::bernoulli) return make_support({Rational(0), Rational(1)});
        std::vector<Rational> v;
        for (const auto& m : marginals) v.insert(v.end(), m.means.begin(), m.means.end());
        return make_support(std::move(v));
    }

    void validate() const {
        if (transition_atoms.empty() || transition_atoms.size() != transition_weights.size())
            throw InvalidInput("factored prior: transition atoms and weights mismatch");
        if (marginals.size() != static_cast<std::size_t>(dims().triples()))
            throw InvalidInput("factored prior: need one reward marginal per triple");
        for (const auto& m : marginals) {
            if (m.means.empty() || m.means.size() != m.probs.size())
                throw InvalidInput("factored prior: malformed reward marginal");
            Rational s = 0;
            for (std::size_t i = 0; i < m.means.size(); ++i) {
                if (m.means[i] < 0 || m.means[i] > 1) throw InvalidInput("factored prior: mean outside [0,1]");
                if (!(m.probs[i] > 0)) throw InvalidInput("factored prior: marginal probabilities must be positive");
                s += m.probs[i];
            }
            if (std::abs(to_double(Rational(s - 1))) > kProbTolerance)
                throw InvalidInput("factored prior: marginal does not sum to 1");
        }
    }

    std::size_t expanded_size() const {
        double n = static_cast<double>(transition_atoms.size());
        for (const auto& m : marginals) n *= static_cast<double>(m.means.size());
        return n > 1e18 ? static_cast<std::size_t>(-1) : static_cast<std::size_t>(n);
    }
};

// cartesian product; the first triple varies slowest
template <class T>
Prior<T> expand(const FactoredPrior& fp, std::size_t cap = kExpansionCap) {
    fp.validate();
    if (fp.expanded_size() > cap)
        throw CapExceeded("factored prior expands to more than " + std::to_string(cap) + " atoms");
    auto sup = fp.reward_support();
    const Dims d = fp.dims();
    const int N = d.triples();
    const std::size_t R = sup->size();
    std::vector<Model<T>> atoms;
    std::vector<Rational> weights;
    std::vector<std::size_t> pick(static_cast<std::size_t>(N), 0);
    for (std::size_t ti = 0; ti < fp.transition_atoms.size(); ++ti) {
        const auto& base = fp.transition_atoms[ti];
        if (!(base.dims == d)) throw InvalidInput("factored prior: transition atoms disagree on (S,A,H)");
        std::fill(pick.begin(), pick.end(), 0);
        while (true) {
            Model<Rational> m = Model<Rational>::blank(d, sup);
            m.init = base.init;
            m.trans = base.trans;
            Rational w = fp.transition_weights[ti];
            for (int t = 0; t < N; ++t) {
                const auto& mg = fp.marginals[static_cast<std::size_t>(t)];
                const Rational& mu = mg.means[pick[static_cast<std::size_t>(t)]];
                w *= mg.probs[pick[static_cast<std::size_t>(t)]];
                Rational* row = m.rew.data() + static_cast<std::size_t>(t) * R;
                if (fp.family == RewardFamily::bernoulli) {
                    row[0] = 1 - mu;
                    row[1] = mu;
                } else {
                    row[static_cast<std::size_t>(sup->index_of(mu))] = 1;
                }
            }
            m.finalize();
            atoms.push_back(convert_model<T>(m));
            weights.push_back(w);
            int t = N - 1;
            while (t >= 0) {
                auto& k = pick[static_cast<std::size_t>(t)];
                if (++k < fp.marginals[static_cast<std::size_t>(t)].means.size()) break;
                k = 0;
                --t;
            }
            if (t < 0) break;
        }
    }
    std::vector<T> w;
    for (auto& x : weights) w.push_back(from_rational<T>(x));
    if constexpr (!is_exact_v<T>) {
        double s = 0;
        for (double x : w) s += x;
        for (double& x : w) x /= s;
    }
    return Prior<T>(std::move(atoms), std::move(w));
}

// f_min and r_min read directly off the marginals
inline Rational f_min(const FactoredPrior& fp, const Rational& eps) {
    Rational best = 1;
    for (const auto& m : fp.marginals) {
        Rational s = 0;
        for (std::size_t i = 0; i < m.means.size(); ++i)
            if (m.means[i] <= eps) s += m.probs[i];
        best = std::min(best, s);
    }
    return best;
}

inline Rational r_min(const FactoredPrior& fp) {
    Rational best = 2;
    for (const auto& m : fp.marginals) {
        Rational s = 0;
        for (std::size_t i = 0; i < m.means.size(); ++i) s += m.means[i] * m.probs[i];
        best = std::min(best, s);
    }
    return best;
}

}  // namespace ielab
