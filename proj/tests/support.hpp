#pragma once

// Shared fixtures and brute-force oracles for the unit suites. The oracles
// here deliberately avoid the library's DP and enumeration code paths.

#include <ielab/instances.hpp>
#include <ielab/ledger.hpp>
#include <ielab/mdp.hpp>
#include <ielab/prior.hpp>

#include <map>
#include <memory>
#include <random>
#include <vector>

namespace testing_support {

using namespace ielab;

template <class T>
PriorPtr<T> det_prior() {
    static auto p = std::make_shared<const Prior<T>>(expand<T>(instances::micro_det_1()));
    return p;
}

template <class T>
PriorPtr<T> stoch_prior() {
    static auto p = std::make_shared<const Prior<T>>(expand<T>(instances::micro_stoch_1()));
    return p;
}

// every state sequence and reward sequence by odometer, mass multiplied out
template <class T>
std::vector<std::pair<Trajectory, T>> brute_paths(const Model<T>& m, const Policy& pi) {
    const int S = m.S(), H = m.H(), R = m.R();
    std::vector<std::pair<Trajectory, T>> out;
    std::vector<int> xs(static_cast<std::size_t>(H), 0), rs(static_cast<std::size_t>(H), 0);
    auto bump = [](std::vector<int>& v, int base) {
        for (int i = static_cast<int>(v.size()) - 1; i >= 0; --i) {
            if (++v[static_cast<std::size_t>(i)] < base) return true;
            v[static_cast<std::size_t>(i)] = 0;
        }
        return false;
    };
    do {
        std::fill(rs.begin(), rs.end(), 0);
        do {
            T mass = m.init[static_cast<std::size_t>(xs[0])];
            Trajectory tau;
            for (int h = 0; h < H; ++h) {
                int x = xs[static_cast<std::size_t>(h)], a = pi(x, h), r = rs[static_cast<std::size_t>(h)];
                tau.push_back({x, a, r});
                mass *= m.rew[static_cast<std::size_t>(m.dims.triple(x, a, h)) * R + r];
                if (h + 1 < H) mass *= m.trans[static_cast<std::size_t>(m.dims.triple(x, a, h)) * S + xs[static_cast<std::size_t>(h) + 1]];
            }
            if (mass != 0) out.emplace_back(tau, mass);
        } while (bump(rs, R));
    } while (bump(xs, S));
    return out;
}

template <class T>
T brute_value(const Model<T>& m, const Policy& pi) {
    T v(0);
    for (auto& [tau, p] : brute_paths(m, pi)) {
        T sum(0);
        for (const auto& s : tau) sum += m.support->template value<T>(s.r);
        v += p * sum;
    }
    return v;
}

// P[x_h = x] under pi, forward
template <class T>
T forward_state_prob(const Model<T>& m, const Policy& pi, int x, int h) {
    std::vector<T> f = m.init;
    for (int tau = 0; tau < h; ++tau) {
        std::vector<T> g(f.size(), T(0));
        for (int s = 0; s < m.S(); ++s)
            for (int y = 0; y < m.S(); ++y) g[static_cast<std::size_t>(y)] += f[static_cast<std::size_t>(s)] * m.p(s, pi(s, tau), tau, y);
        f = g;
    }
    return f[static_cast<std::size_t>(x)];
}

inline std::vector<double> random_simplex(std::mt19937_64& g, int n, bool point = false) {
    std::vector<double> v(static_cast<std::size_t>(n), 0.0);
    if (point) {
        v[std::uniform_int_distribution<int>(0, n - 1)(g)] = 1.0;
        return v;
    }
    std::exponential_distribution<double> e(1.0);
    double s = 0;
    for (auto& x : v) s += (x = e(g));
    for (auto& x : v) x /= s;
    return v;
}

// random model with rewards on {0, 1/2, 1}
inline Model<double> random_model(std::mt19937_64& g, Dims d, bool deterministic = false) {
    static auto sup = make_support({Rational(0), Rational(1, 2), Rational(1)});
    auto m = Model<double>::blank(d, sup);
    m.init = random_simplex(g, d.S, deterministic);
    for (int t = 0; t < d.triples(); ++t) {
        auto p = random_simplex(g, d.S, deterministic);
        std::copy(p.begin(), p.end(), m.trans.begin() + static_cast<long>(t) * d.S);
        auto r = random_simplex(g, 3, deterministic);
        std::copy(r.begin(), r.end(), m.rew.begin() + static_cast<long>(t) * 3);
    }
    m.finalize();
    return m;
}

inline Policy random_policy(std::mt19937_64& g, Dims d) {
    Policy p(d);
    for (auto& a : p.act) a = std::uniform_int_distribution<int>(0, d.A - 1)(g);
    return p;
}

inline TripleSet random_triples(std::mt19937_64& g, Dims d, double density = 0.3) {
    TripleSet U(d);
    std::bernoulli_distribution b(density);
    for (int t = 0; t < d.triples(); ++t)
        if (b(g)) U.insert(t);
    return U;
}

// likelihood of a (possibly censored) ledger: per entry, the mass of all
// brute-force paths agreeing with every revealed coordinate
template <class T>
T brute_ledger_likelihood(const Model<T>& m, const Ledger& l) {
    T lik(1);
    for (const auto& e : l.entries) {
        T s(0);
        for (auto& [tau, p] : brute_paths(m, e.policy)) {
            bool match = true;
            for (std::size_t h = 0; h < tau.size() && match; ++h) {
                const Step &a = tau[h], &b = e.steps[h];
                match = a.x == b.x && a.a == b.a && (b.r < 0 || a.r == b.r);
            }
            if (match) s += p;
        }
        lik *= s;
    }
    return lik;
}

template <class T>
std::vector<T> brute_posterior(const Prior<T>& P, const Ledger& l) {
    std::vector<T> w(P.size());
    T z(0);
    for (std::size_t i = 0; i < P.size(); ++i) z += (w[i] = P.weights[i] * brute_ledger_likelihood(P.atoms[i], l));
    for (auto& x : w) x /= z;
    return w;
}

// raw ledger of n entries drawn from one atom with random policies
template <class T>
Ledger random_raw_ledger(std::mt19937_64& g, const Model<T>& m, int n) {
    Ledger l(m.dims);
    for (int i = 0; i < n; ++i) {
        auto pi = random_policy(g, m.dims);
        RngStream rng(g(), "test");
        l.entries.push_back({pi, sample_trajectory(m, pi, rng)});
    }
    return l;
}

}  // namespace testing_support
