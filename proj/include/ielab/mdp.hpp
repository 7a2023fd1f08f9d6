#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"
#include "scalar.hpp"

namespace ielab {

inline constexpr std::uint64_t kPolicyCap = 1'000'000;
inline constexpr std::uint64_t kTrajectoryCap = 10'000'000;
inline constexpr double kProbTolerance = 1e-12;

// Indices are 0-based internally; JSON and printed forms are 1-based.
struct Dims {
    int S = 0, A = 0, H = 0;

    int triples() const { return S * A * H; }
    int pairs() const { return S * H; }
    // lexicographic (x,a,h) order
    int triple(int x, int a, int h) const { return (x * A + a) * H + h; }
    int pair(int x, int h) const { return x * H + h; }
    std::array<int, 3> unpack(int t) const { return {t / (A * H), (t / H) % A, t % H}; }
    bool operator==(const Dims&) const = default;
};

class TripleSet {
public:
    TripleSet() = default;
    explicit TripleSet(Dims d) : dims_(d), bits_(static_cast<std::size_t>(d.triples()), 0) {}

    static TripleSet all(Dims d) {
        TripleSet s(d);
        std::fill(s.bits_.begin(), s.bits_.end(), 1);
        return s;
    }
    static TripleSet none(Dims d) { return TripleSet(d); }

    const Dims& dims() const { return dims_; }
    bool contains(int t) const { return bits_[static_cast<std::size_t>(t)] != 0; }
    bool contains(int x, int a, int h) const { return contains(dims_.triple(x, a, h)); }
    void insert(int t) { bits_[static_cast<std::size_t>(t)] = 1; }
    void erase(int t) { bits_[static_cast<std::size_t>(t)] = 0; }

    std::size_t size() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1)); }
    bool empty() const { return size() == 0; }

    TripleSet complement() const {
        TripleSet c(dims_);
        for (std::size_t i = 0; i < bits_.size(); ++i) c.bits_[i] = bits_[i] ? 0 : 1;
        return c;
    }
    TripleSet intersect(const TripleSet& o) const {
        TripleSet c(dims_);
        for (std::size_t i = 0; i < bits_.size(); ++i) c.bits_[i] = (bits_[i] && o.bits_[i]) ? 1 : 0;
        return c;
    }
    bool subset_of(const TripleSet& o) const {
        for (std::size_t i = 0; i < bits_.size(); ++i)
            if (bits_[i] && !o.bits_[i]) return false;
        return true;
    }
    std::vector<int> members() const {
        std::vector<int> out;
        for (std::size_t i = 0; i < bits_.size(); ++i)
            if (bits_[i]) out.push_back(static_cast<int>(i));
        return out;
    }
    std::string key() const {
        std::string k(bits_.size(), '0');
        for (std::size_t i = 0; i < bits_.size(); ++i)
            if (bits_[i]) k[i] = '1';
        return k;
    }
    bool operator==(const TripleSet& o) const { return dims_ == o.dims_ && bits_ == o.bits_; }

private:
    Dims dims_;
    std::vector<char> bits_;
};

struct RewardSupport {
    std::vector<Rational> values;  // ascending, distinct, within [0,1]
    std::vector<double> approx;

    std::size_t size() const { return values.size(); }
    int index_of(const Rational& v) const {
        auto it = std::lower_bound(values.begin(), values.end(), v);
        if (it == values.end() || *it != v) return -1;
        return static_cast<int>(it - values.begin());
    }
    template <class T>
    T value(int i) const {
        if constexpr (is_exact_v<T>)
            return values[static_cast<std::size_t>(i)];
        else
            return approx[static_cast<std::size_t>(i)];
    }
};
using SupportPtr = std::shared_ptr<const RewardSupport>;

inline SupportPtr make_support(std::vector<Rational> vals) {
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    if (vals.empty()) throw InvalidInput("reward support is empty");
    auto s = std::make_shared<RewardSupport>();
    for (auto& v : vals) {
        if (v < 0 || v > 1) throw InvalidInput("reward support value outside [0,1]: " + to_string(v));
        s->approx.push_back(to_double(v));
    }
    s->values = std::move(vals);
    return s;
}

template <class T>
struct Model {
    Dims dims;
    SupportPtr support;
    std::vector<T> init;   // [S]
    std::vector<T> trans;  // [triple][S]
    std::vector<T> rew;    // [triple][support]

    // derived by finalize()
    std::vector<T> mean;  // [triple]
    std::vector<double> log_init, log_trans, log_rew;
    bool deterministic = false;

    int S() const { return dims.S; }
    int A() const { return dims.A; }
    int H() const { return dims.H; }
    int R() const { return static_cast<int>(support->size()); }

    const T* next(int t) const { return trans.data() + static_cast<std::size_t>(t) * dims.S; }
    const T* reward(int t) const { return rew.data() + static_cast<std::size_t>(t) * support->size(); }
    const T& p(int x, int a, int h, int y) const { return next(dims.triple(x, a, h))[y]; }

    static Model blank(Dims d, SupportPtr sup) {
        Model m;
        m.dims = d;
        m.support = std::move(sup);
        m.init.assign(static_cast<std::size_t>(d.S), T(0));
        m.trans.assign(static_cast<std::size_t>(d.triples()) * d.S, T(0));
        m.rew.assign(static_cast<std::size_t>(d.triples()) * m.support->size(), T(0));
        return m;
    }

    void finalize();
};

namespace detail {

template <class T>
void check_distribution(T* v, std::size_t n, const std::string& what) {
    T sum(0);
    for (std::size_t i = 0; i < n; ++i) {
        if (v[i] < 0) throw InvalidInput(what + ": negative probability");
        sum += v[i];
    }
    if (std::abs(to_double(T(sum - T(1)))) > kProbTolerance)
        throw InvalidInput(what + ": probabilities sum to " + std::to_string(to_double(sum)));
    if constexpr (is_exact_v<T>) {
        if (sum != 1)
            for (std::size_t i = 0; i < n; ++i) v[i] /= sum;
    }
}

template <class T>
bool is_point_mass(const T* v, std::size_t n) {
    int nz = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (v[i] != 0) ++nz;
    return nz == 1;
}

inline double safe_log(double p) { return p > 0 ? std::log(p) : -std::numeric_limits<double>::infinity(); }

inline std::string triple_name(const Dims& d, int t) {
    auto [x, a, h] = d.unpack(t);
    return "(" + std::to_string(x + 1) + "," + std::to_string(a + 1) + "," + std::to_string(h + 1) + ")";
}

}  // namespace detail

template <class T>
void Model<T>::finalize() {
    if (dims.S <= 0 || dims.A <= 0 || dims.H <= 0) throw InvalidInput("S, A, H must be positive");
    if (!support) throw InvalidInput("model has no reward support");
    const std::size_t S = static_cast<std::size_t>(dims.S), R = support->size();
    const std::size_t N = static_cast<std::size_t>(dims.triples());
    if (init.size() != S || trans.size() != N * S || rew.size() != N * R)
        throw InvalidInput("model arrays have inconsistent sizes");
    detail::check_distribution(init.data(), S, "init");
    bool det = detail::is_point_mass(init.data(), S);
    mean.assign(N, T(0));
    for (std::size_t t = 0; t < N; ++t) {
        auto name = detail::triple_name(dims, static_cast<int>(t));
        detail::check_distribution(trans.data() + t * S, S, "transition " + name);
        detail::check_distribution(rew.data() + t * R, R, "reward " + name);
        det = det && detail::is_point_mass(trans.data() + t * S, S) && detail::is_point_mass(rew.data() + t * R, R);
        T m(0);
        for (std::size_t k = 0; k < R; ++k) m += rew[t * R + k] * support->template value<T>(static_cast<int>(k));
        mean[t] = m;
    }
    deterministic = det;
    auto logs = [](const std::vector<T>& v) {
        std::vector<double> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = detail::safe_log(to_double(v[i]));
        return out;
    };
    log_init = logs(init);
    log_trans = logs(trans);
    log_rew = logs(rew);
}

template <class U, class T>
Model<U> convert_model(const Model<T>& m) {
    auto cv = [](const std::vector<T>& v) {
        std::vector<U> out;
        out.reserve(v.size());
        for (const auto& e : v) {
            if constexpr (std::is_same_v<U, T>)
                out.push_back(e);
            else if constexpr (is_exact_v<U>)
                out.push_back(rational_from_double(to_double(e)));
            else
                out.push_back(to_double(e));
        }
        return out;
    };
    Model<U> o;
    o.dims = m.dims;
    o.support = m.support;
    o.init = cv(m.init);
    o.trans = cv(m.trans);
    o.rew = cv(m.rew);
    o.finalize();
    return o;
}

// ---------------------------------------------------------------- policies

struct Policy {
    int H = 0;
    std::vector<int> act;  // [x*H + h]

    Policy() = default;
    Policy(const Dims& d, int fill = 0) : H(d.H), act(static_cast<std::size_t>(d.pairs()), fill) {}

    int operator()(int x, int h) const { return act[static_cast<std::size_t>(x * H + h)]; }
    int& at(int x, int h) { return act[static_cast<std::size_t>(x * H + h)]; }
    auto operator<=>(const Policy&) const = default;
    bool operator==(const Policy&) const = default;
};

inline std::uint64_t policy_space_size(const Dims& d, std::uint64_t cap = kPolicyCap) {
    std::uint64_t n = 1;
    for (int i = 0; i < d.pairs(); ++i) {
        n *= static_cast<std::uint64_t>(d.A);
        if (n > cap)
            throw CapExceeded("policy space A^(SH) exceeds the enumeration cap " + std::to_string(cap));
    }
    return n;
}

// first (x,h) pair is the most significant digit
inline std::uint64_t encode(const Policy& p, const Dims& d) {
    std::uint64_t code = 0;
    for (int a : p.act) code = code * static_cast<std::uint64_t>(d.A) + static_cast<std::uint64_t>(a);
    return code;
}

inline Policy decode(std::uint64_t code, const Dims& d) {
    Policy p(d);
    for (int i = d.pairs() - 1; i >= 0; --i) {
        p.act[static_cast<std::size_t>(i)] = static_cast<int>(code % static_cast<std::uint64_t>(d.A));
        code /= static_cast<std::uint64_t>(d.A);
    }
    return p;
}

inline std::vector<Policy> enumerate_policies(const Dims& d, std::uint64_t cap = kPolicyCap) {
    std::uint64_t n = policy_space_size(d, cap);
    std::vector<Policy> out;
    out.reserve(n);
    for (std::uint64_t c = 0; c < n; ++c) out.push_back(decode(c, d));
    return out;
}

// ------------------------------------------------------------ trajectories

// r is an index into the reward support; -1 marks a censored reward
struct Step {
    int x = 0, a = 0, r = 0;
    auto operator<=>(const Step&) const = default;
    bool operator==(const Step&) const = default;
};
using Trajectory = std::vector<Step>;

inline bool visits(const Trajectory& tau, const TripleSet& U) {
    const Dims& d = U.dims();
    for (int h = 0; h < static_cast<int>(tau.size()); ++h)
        if (U.contains(d.triple(tau[h].x, tau[h].a, h))) return true;
    return false;
}

// ---------------------------------------------------------------- DP core

template <class T>
T policy_value(const Model<T>& m, const Policy& pi) {
    const int S = m.S(), H = m.H();
    std::vector<T> V(static_cast<std::size_t>(S), T(0)), W(static_cast<std::size_t>(S));
    for (int h = H - 1; h >= 0; --h) {
        for (int x = 0; x < S; ++x) {
            int t = m.dims.triple(x, pi(x, h), h);
            T v = m.mean[static_cast<std::size_t>(t)];
            if (h + 1 < H) {
                const T* p = m.next(t);
                for (int y = 0; y < S; ++y)
                    if (p[y] != 0) v += p[y] * V[static_cast<std::size_t>(y)];
            }
            W[static_cast<std::size_t>(x)] = v;
        }
        std::swap(V, W);
    }
    T out(0);
    for (int x = 0; x < S; ++x) out += m.init[static_cast<std::size_t>(x)] * V[static_cast<std::size_t>(x)];
    return out;
}

// max over all Markov policies
template <class T>
T optimal_value(const Model<T>& m) {
    const int S = m.S(), A = m.A(), H = m.H();
    std::vector<T> V(static_cast<std::size_t>(S), T(0)), W(static_cast<std::size_t>(S));
    for (int h = H - 1; h >= 0; --h) {
        for (int x = 0; x < S; ++x) {
            T best(0);
            for (int a = 0; a < A; ++a) {
                int t = m.dims.triple(x, a, h);
                T v = m.mean[static_cast<std::size_t>(t)];
                if (h + 1 < H) {
                    const T* p = m.next(t);
                    for (int y = 0; y < S; ++y) v += p[y] * V[static_cast<std::size_t>(y)];
                }
                if (a == 0 || v > best) best = v;
            }
            W[static_cast<std::size_t>(x)] = best;
        }
        std::swap(V, W);
    }
    T out(0);
    for (int x = 0; x < S; ++x) out += m.init[static_cast<std::size_t>(x)] * V[static_cast<std::size_t>(x)];
    return out;
}

template <class T>
T trajectory_probability(const Model<T>& m, const Policy& pi, const Trajectory& tau) {
    if (static_cast<int>(tau.size()) != m.H()) return T(0);
    T prob = m.init[static_cast<std::size_t>(tau[0].x)];
    for (int h = 0; h < m.H() && prob != 0; ++h) {
        const Step& s = tau[static_cast<std::size_t>(h)];
        if (s.a != pi(s.x, h)) return T(0);
        int t = m.dims.triple(s.x, s.a, h);
        if (s.r >= 0) prob *= m.reward(t)[s.r];
        if (h + 1 < m.H()) prob *= m.next(t)[tau[static_cast<std::size_t>(h) + 1].x];
    }
    return prob;
}

template <class T>
Trajectory sample_trajectory(const Model<T>& m, const Policy& pi, RngStream& rng) {
    Trajectory tau(static_cast<std::size_t>(m.H()));
    int x = static_cast<int>(rng.pick(m.init));
    for (int h = 0; h < m.H(); ++h) {
        int a = pi(x, h);
        int t = m.dims.triple(x, a, h);
        int r = static_cast<int>(rng.pick(m.reward(t), static_cast<std::size_t>(m.R())));
        tau[static_cast<std::size_t>(h)] = {x, a, r};
        if (h + 1 < m.H()) x = static_cast<int>(rng.pick(m.next(t), static_cast<std::size_t>(m.S())));
    }
    return tau;
}

// every trajectory with positive mass under (m, pi), with its mass
template <class T>
std::vector<std::pair<Trajectory, T>> enumerate_trajectories(const Model<T>& m, const Policy& pi,
                                                             bool with_rewards = true,
                                                             std::uint64_t cap = kTrajectoryCap) {
    std::vector<std::pair<Trajectory, T>> out;
    Trajectory cur(static_cast<std::size_t>(m.H()));
    auto rec = [&](auto&& self, int h, int x, const T& mass) -> void {
        int a = pi(x, h);
        int t = m.dims.triple(x, a, h);
        for (int r = with_rewards ? 0 : -1; r < (with_rewards ? m.R() : 0); ++r) {
            T mr = r >= 0 ? T(mass * m.reward(t)[r]) : mass;
            if (mr == 0) continue;
            cur[static_cast<std::size_t>(h)] = {x, a, r};
            if (h + 1 == m.H()) {
                if (out.size() >= cap) throw CapExceeded("trajectory enumeration exceeds cap");
                out.emplace_back(cur, mr);
                continue;
            }
            const T* p = m.next(t);
            for (int y = 0; y < m.S(); ++y)
                if (p[y] != 0) self(self, h + 1, y, T(mr * p[y]));
        }
    };
    for (int x = 0; x < m.S(); ++x)
        if (m.init[static_cast<std::size_t>(x)] != 0) rec(rec, 0, x, m.init[static_cast<std::size_t>(x)]);
    return out;
}

// max over policies of P[x_h = x], by backward max-DP
template <class T>
T reach_probability(const Model<T>& m, int x, int h) {
    const int S = m.S(), A = m.A();
    std::vector<T> g(static_cast<std::size_t>(S), T(0)), w(static_cast<std::size_t>(S));
    g[static_cast<std::size_t>(x)] = T(1);
    for (int tau = h - 1; tau >= 0; --tau) {
        for (int s = 0; s < S; ++s) {
            T best(0);
            for (int a = 0; a < A; ++a) {
                const T* p = m.next(m.dims.triple(s, a, tau));
                T v(0);
                for (int y = 0; y < S; ++y) v += p[y] * g[static_cast<std::size_t>(y)];
                if (v > best) best = v;
            }
            w[static_cast<std::size_t>(s)] = best;
        }
        std::swap(g, w);
    }
    T out(0);
    for (int s = 0; s < S; ++s) out += m.init[static_cast<std::size_t>(s)] * g[static_cast<std::size_t>(s)];
    return out;
}

template <class T>
TripleSet reach_set(const Model<T>& m, const T& rho) {
    if (!(rho > 0) || rho > 1) throw PreconditionViolated("reach_set: rho must lie in (0,1]");
    TripleSet out(m.dims);
    for (int h = 0; h < m.H(); ++h)
        for (int x = 0; x < m.S(); ++x)
            if (reach_probability(m, x, h) >= rho)
                for (int a = 0; a < m.A(); ++a) out.insert(m.dims.triple(x, a, h));
    return out;
}

// mass f_h(x) of being at x at step h without having touched U before h,
// and the resulting hit masses
template <class T>
struct VisitDP {
    std::vector<T> hit;  // [triple], nonzero only on U
    T total{0};
};

template <class T>
VisitDP<T> first_visit_dp(const Model<T>& m, const Policy& pi, const TripleSet& U) {
    const int S = m.S();
    VisitDP<T> out;
    out.hit.assign(static_cast<std::size_t>(m.dims.triples()), T(0));
    std::vector<T> f = m.init, g(static_cast<std::size_t>(S));
    for (int h = 0; h < m.H(); ++h) {
        std::fill(g.begin(), g.end(), T(0));
        for (int x = 0; x < S; ++x) {
            const T& fx = f[static_cast<std::size_t>(x)];
            if (fx == 0) continue;
            int t = m.dims.triple(x, pi(x, h), h);
            if (U.contains(t)) {
                out.hit[static_cast<std::size_t>(t)] += fx;
                out.total += fx;
            } else if (h + 1 < m.H()) {
                const T* p = m.next(t);
                for (int y = 0; y < S; ++y) g[static_cast<std::size_t>(y)] += fx * p[y];
            }
        }
        std::swap(f, g);
    }
    return out;
}

// P[exists h: (x_h, a_h, h) in U]
template <class T>
T event_visit_probability(const Model<T>& m, const Policy& pi, const TripleSet& U) {
    return first_visit_dp(m, pi, U).total;
}

// for each member of U: P[visit it at its step while staying in U^c before]
template <class T>
std::map<int, T> occupancy_omega(const Model<T>& m, const Policy& pi, const TripleSet& U) {
    auto dp = first_visit_dp(m, pi, U);
    std::map<int, T> out;
    for (int t : U.members()) out.emplace(t, dp.hit[static_cast<std::size_t>(t)]);
    return out;
}

}  // namespace ielab
