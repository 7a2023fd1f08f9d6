#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "prior.hpp"

namespace ielab {

template <class T>
bool is_punished(const Model<T>& m, const TripleSet& explored, const T& eps) {
    for (int t : explored.members())
        if (m.mean[static_cast<std::size_t>(t)] > eps) return false;
    return true;
}

template <class T>
struct SimilarityReport {
    T init_l1{0};
    std::map<int, T> trans_l1;  // over the explored triples
    T max_l1{0};                // max of the above, init included
    bool similar = false;       // at the eps passed in
};

template <class T>
T l1_distance(const T* p, const T* q, int n) {
    T s(0);
    for (int i = 0; i < n; ++i) s += abs_value(T(p[i] - q[i]));
    return s;
}

template <class T>
SimilarityReport<T> similarity(const Model<T>& m1, const Model<T>& m2, const TripleSet& explored, const T& eps) {
    if (!(m1.dims == m2.dims)) throw InvalidInput("similarity: models disagree on (S,A,H)");
    SimilarityReport<T> rep;
    rep.init_l1 = l1_distance(m1.init.data(), m2.init.data(), m1.S());
    rep.max_l1 = rep.init_l1;
    for (int t : explored.members()) {
        T d = l1_distance(m1.next(t), m2.next(t), m1.S());
        if (d > rep.max_l1) rep.max_l1 = d;
        rep.trans_l1.emplace(t, d);
    }
    rep.similar = !(rep.max_l1 > eps);
    return rep;
}

// E[sum_h rt(x_h,a_h,h) 1{no U-triple before h}] under the policy
template <class T>
T truncated_reward(const Model<T>& m, const Policy& pi, const TripleSet& U, const std::vector<T>& rt) {
    const int S = m.S();
    std::vector<T> f = m.init, g(static_cast<std::size_t>(S));
    T total(0);
    for (int h = 0; h < m.H(); ++h) {
        std::fill(g.begin(), g.end(), T(0));
        for (int x = 0; x < S; ++x) {
            const T& fx = f[static_cast<std::size_t>(x)];
            if (fx == 0) continue;
            int t = m.dims.triple(x, pi(x, h), h);
            total += fx * rt[static_cast<std::size_t>(t)];
            if (U.contains(t) || h + 1 == m.H()) continue;
            const T* p = m.next(t);
            for (int y = 0; y < S; ++y) g[static_cast<std::size_t>(y)] += fx * p[y];
        }
        std::swap(f, g);
    }
    return total;
}

template <class T>
struct SimulationGap {
    T lhs{0}, bound{0};
    bool holds = false;
};

template <class T>
SimulationGap<T> simulation_gap(const Model<T>& m, const Model<T>& mstar, const TripleSet& U, const std::vector<T>& rt,
                                const Policy& pi, const T& eps) {
    if (!similarity(m, mstar, U.complement(), eps).similar)
        throw PreconditionViolated("simulation_gap: models are not eps-similar off the censor set");
    SimulationGap<T> g;
    g.lhs = abs_value(T(truncated_reward(m, pi, U, rt) - truncated_reward(mstar, pi, U, rt)));
    g.bound = T(m.H() * (m.H() - 1) / 2) * eps;
    g.holds = !(g.lhs > g.bound);
    return g;
}

// Markov reward process: p[h][x][y] for h < H-1, rewards r[h][x]
template <class T>
struct MRP {
    int S = 0, H = 0;
    std::vector<T> init;
    std::vector<T> trans;   // [(h*S + x)*S + y], h in [0,H-1)
    std::vector<T> reward;  // [h*S + x]

    const T* next(int x, int h) const { return trans.data() + (static_cast<std::size_t>(h) * S + x) * S; }
    T r(int x, int h) const { return reward[static_cast<std::size_t>(h) * S + x]; }
};

template <class T>
MRP<T> policy_mrp(const Model<T>& m, const Policy& pi, const std::vector<T>& rt) {
    MRP<T> out;
    out.S = m.S();
    out.H = m.H();
    out.init = m.init;
    out.trans.assign(static_cast<std::size_t>(std::max(0, m.H() - 1)) * m.S() * m.S(), T(0));
    out.reward.assign(static_cast<std::size_t>(m.H()) * m.S(), T(0));
    for (int h = 0; h < m.H(); ++h)
        for (int x = 0; x < m.S(); ++x) {
            int t = m.dims.triple(x, pi(x, h), h);
            out.reward[static_cast<std::size_t>(h) * m.S() + x] = rt[static_cast<std::size_t>(t)];
            if (h + 1 < m.H())
                std::copy(m.next(t), m.next(t) + m.S(), out.trans.begin() + (static_cast<long>(h) * m.S() + x) * m.S());
        }
    return out;
}

// V[h][x] for h = 0..H, V[H] = 0
template <class T>
std::vector<std::vector<T>> mrp_values(const MRP<T>& mrp) {
    std::vector<std::vector<T>> V(static_cast<std::size_t>(mrp.H) + 1, std::vector<T>(static_cast<std::size_t>(mrp.S), T(0)));
    for (int h = mrp.H - 1; h >= 0; --h)
        for (int x = 0; x < mrp.S; ++x) {
            T v = mrp.r(x, h);
            if (h + 1 < mrp.H) {
                const T* p = mrp.next(x, h);
                for (int y = 0; y < mrp.S; ++y) v += p[y] * V[static_cast<std::size_t>(h) + 1][static_cast<std::size_t>(y)];
            }
            V[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)] = v;
        }
    return V;
}

template <class T>
struct PerformanceDifference {
    T lhs{0};
    T init_term{0};
    T transition_term{0};
    T rhs() const { return init_term + transition_term; }
};

// V1 - V2 = (p1 - p2)(.|0) V2_1 + E_1[sum_h (p1 - p2)(.|x_h,h) V2_{h+1}]
template <class T>
PerformanceDifference<T> performance_difference(const MRP<T>& m1, const MRP<T>& m2) {
    if (m1.S != m2.S || m1.H != m2.H) throw InvalidInput("performance_difference: MRP shapes differ");
    if (m1.reward != m2.reward) throw InvalidInput("performance_difference: MRPs must share the reward");
    const int S = m1.S;
    auto V1 = mrp_values(m1), V2 = mrp_values(m2);
    PerformanceDifference<T> out;
    for (int x = 0; x < S; ++x) {
        const auto xs = static_cast<std::size_t>(x);
        out.lhs += m1.init[xs] * V1[0][xs] - m2.init[xs] * V2[0][xs];
        out.init_term += (m1.init[xs] - m2.init[xs]) * V2[0][xs];
    }
    std::vector<T> f = m1.init, g(static_cast<std::size_t>(S));
    for (int h = 0; h + 1 < m1.H; ++h) {
        std::fill(g.begin(), g.end(), T(0));
        for (int x = 0; x < S; ++x) {
            const T& fx = f[static_cast<std::size_t>(x)];
            if (fx == 0) continue;
            const T *p = m1.next(x, h), *q = m2.next(x, h);
            T d(0);
            for (int y = 0; y < S; ++y) {
                d += (p[y] - q[y]) * V2[static_cast<std::size_t>(h) + 1][static_cast<std::size_t>(y)];
                g[static_cast<std::size_t>(y)] += fx * p[y];
            }
            out.transition_term += fx * d;
        }
        std::swap(f, g);
    }
    return out;
}

struct GoodModelTolerances {
    double eps_pun = 0, eps_r = 0, eps_p = 0;
};

// punished at eps_pun + 2 eps_r and 2 eps_p-similar to the truth, both off U
template <class T>
bool good_model_predicate(const Model<T>& m, const Model<T>& mstar, const TripleSet& U, const GoodModelTolerances& tol) {
    auto explored = U.complement();
    if (!is_punished(m, explored, scalar_from<T>(tol.eps_pun + 2 * tol.eps_r))) return false;
    return similarity(m, mstar, explored, scalar_from<T>(2 * tol.eps_p)).similar;
}

template <class T>
T good_mass(const Posterior<T>& post, const Model<T>& mstar, const TripleSet& U, const GoodModelTolerances& tol) {
    T s(0);
    for (std::size_t i = 0; i < post.w.size(); ++i)
        if (post.w[i] != 0 && good_model_predicate(post.prior->atoms[i], mstar, U, tol)) s += post.w[i];
    return s;
}

// H P*[E_U] + H(2 eps_r + eps_pun) + H(H-1) eps_p
template <class T>
double value_upper_bound(const Model<T>& mstar, const Policy& pi, const TripleSet& U, const GoodModelTolerances& tol) {
    const int H = mstar.H();
    return H * to_double(event_visit_probability(mstar, pi, U)) + H * (2 * tol.eps_r + tol.eps_pun) +
           H * (H - 1) * tol.eps_p;
}

// sum_U r_mu omega* - H(H-1) eps_p
template <class T>
double value_lower_bound(const Model<T>& m, const Model<T>& mstar, const Policy& pi, const TripleSet& U,
                         const GoodModelTolerances& tol) {
    double s = 0;
    for (const auto& [t, w] : occupancy_omega(mstar, pi, U)) s += to_double(m.mean[static_cast<std::size_t>(t)]) * to_double(w);
    return s - mstar.H() * (mstar.H() - 1) * tol.eps_p;
}

struct Estimators {
    std::vector<double> reward;     // [triple]
    std::vector<double> trans;      // [triple * S + y], meaningful for h < H-1
    std::vector<double> init;       // [S]
    std::vector<char> defined;      // [triple]: at least n_lrn visits
    std::vector<char> reward_seen;  // [triple]: n_lrn revealed rewards
    bool init_defined = false;
};

// empirical means over the first n_lrn visits of each triple in the raw
// hallucination-episode ledger, and initial-state frequencies over its first
// n_lrn entries
inline Estimators empirical_estimators(const Ledger& raw, int n_lrn, const RewardSupport& sup) {
    const Dims& d = raw.dims;
    const auto N = static_cast<std::size_t>(d.triples());
    Estimators e;
    e.reward.assign(N, 0.0);
    e.trans.assign(N * static_cast<std::size_t>(d.S), 0.0);
    e.init.assign(static_cast<std::size_t>(d.S), 0.0);
    e.defined.assign(N, 0);
    e.reward_seen.assign(N, 0);
    std::vector<int> visits(N, 0), rewards(N, 0);
    int entries = 0;
    for (const auto& en : raw.entries) {
        if (entries < n_lrn) {
            e.init[static_cast<std::size_t>(en.steps[0].x)] += 1;
            ++entries;
        }
        for (int h = 0; h < d.H; ++h) {
            const Step& s = en.steps[static_cast<std::size_t>(h)];
            auto t = static_cast<std::size_t>(d.triple(s.x, s.a, h));
            if (visits[t] >= n_lrn) continue;
            ++visits[t];
            if (s.r >= 0) {
                e.reward[t] += sup.approx[static_cast<std::size_t>(s.r)];
                ++rewards[t];
            }
            if (h + 1 < d.H) e.trans[t * static_cast<std::size_t>(d.S) + static_cast<std::size_t>(en.steps[static_cast<std::size_t>(h) + 1].x)] += 1;
        }
    }
    for (std::size_t t = 0; t < N; ++t) {
        e.defined[t] = visits[t] >= n_lrn;
        e.reward_seen[t] = rewards[t] >= n_lrn;
        if (rewards[t]) e.reward[t] /= rewards[t];
        if (visits[t])
            for (int y = 0; y < d.S; ++y) e.trans[t * static_cast<std::size_t>(d.S) + static_cast<std::size_t>(y)] /= visits[t];
    }
    e.init_defined = entries >= n_lrn;
    if (entries)
        for (auto& v : e.init) v /= entries;
    return e;
}

struct EstimatorErrors {
    double reward = 0;      // max |theta_r - r| over defined triples
    double transition = 0;  // max l1 over defined triples with h < H
    double init = 0;        // l1, when defined
    int defined = 0;
};

template <class T>
EstimatorErrors estimator_errors(const Estimators& e, const Model<T>& truth) {
    EstimatorErrors out;
    const Dims& d = truth.dims;
    for (int t = 0; t < d.triples(); ++t) {
        if (!e.defined[static_cast<std::size_t>(t)]) continue;
        ++out.defined;
        if (e.reward_seen[static_cast<std::size_t>(t)])
            out.reward = std::max(out.reward, std::abs(e.reward[static_cast<std::size_t>(t)] - to_double(truth.mean[static_cast<std::size_t>(t)])));
        if (d.unpack(t)[2] + 1 < d.H) {
            double l1 = 0;
            for (int y = 0; y < d.S; ++y)
                l1 += std::abs(e.trans[static_cast<std::size_t>(t) * d.S + y] - to_double(truth.next(t)[y]));
            out.transition = std::max(out.transition, l1);
        }
    }
    if (e.init_defined)
        for (int y = 0; y < d.S; ++y) out.init += std::abs(e.init[static_cast<std::size_t>(y)] - to_double(truth.init[static_cast<std::size_t>(y)]));
    return out;
}

// 1-based stage at which the deterministic run first enters U; H+1 if never
template <class T>
int first_unexplored_stage(const Model<T>& m, const Policy& pi, const TripleSet& U) {
    if (!m.deterministic) throw PreconditionViolated("first_unexplored_stage needs a deterministic model");
    int x = 0;
    while (m.init[static_cast<std::size_t>(x)] == 0) ++x;
    for (int h = 0; h < m.H(); ++h) {
        int t = m.dims.triple(x, pi(x, h), h);
        if (U.contains(t)) return h + 1;
        if (h + 1 < m.H()) {
            const T* p = m.next(t);
            int y = 0;
            while (p[y] == 0) ++y;
            x = y;
        }
    }
    return m.H() + 1;
}

// policies reaching U with probability at least rho0 under the model
template <class T>
PolicySubset sufficiently_visiting_policies(const Model<T>& m, const TripleSet& U, const T& rho0,
                                            const std::vector<Policy>& policies) {
    PolicySubset out(policies.size(), 0);
    for (std::size_t j = 0; j < policies.size(); ++j) out[j] = event_visit_probability(m, policies[j], U) >= rho0 - tie_tolerance(rho0) ? 1 : 0;
    return out;
}

template <class T>
PolicySubset sufficiently_visiting_policies(const Model<T>& m, const TripleSet& U, const T& rho0) {
    return sufficiently_visiting_policies(m, U, rho0, enumerate_policies(m.dims));
}

}  // namespace ielab
