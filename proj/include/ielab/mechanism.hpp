#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "prior.hpp"

namespace ielab {

struct MechanismConfig {
    long n_phase = 1;
    int n_lrn = 1;
    Rational eps_pun = Rational(1, 10);
    Rational rho = 1;
    long total_phases = 0;

    void validate() const {
        if (n_phase < 1) throw InvalidInput("n_phase must be positive");
        if (n_lrn < 1) throw InvalidInput("n_lrn must be positive");
        if (!(eps_pun > 0) || !(eps_pun < 1)) throw InvalidInput("eps_pun must lie in (0,1)");
        if (!(rho > 0) || rho > 1) throw InvalidInput("rho must lie in (0,1]");
        if (total_phases < 0) throw InvalidInput("total_phases must be nonnegative");
    }

    long phase_of(long k) const { return (k - 1) / n_phase + 1; }
    long first_episode(long phase) const { return (phase - 1) * n_phase + 1; }
    // the hallucination episode is fixed (first of the phase) while every triple is under-explored
    bool initial_phase(long phase) const { return phase <= n_lrn; }
};

// Hallucination episode of a phase: uniform over the phase, except in initial phases.
inline long draw_kstar(const MechanismConfig& cfg, long phase, std::uint64_t seed) {
    if (cfg.initial_phase(phase)) return cfg.first_episode(phase);
    RngStream rng(seed, streams::kstar(phase));
    return cfg.first_episode(phase) + static_cast<long>(rng.below(static_cast<std::uint64_t>(cfg.n_phase)));
}

// prior probability that a given episode of the phase is its hallucination episode
template <class T>
T hallucination_prior(const MechanismConfig& cfg, long phase, long k) {
    if (cfg.initial_phase(phase)) return k == cfg.first_episode(phase) ? T(1) : T(0);
    return T(1) / T(cfg.n_phase);
}

template <class T>
bool mean_at_most(const T& mean, const Rational& eps) {
    if constexpr (is_exact_v<T>)
        return mean <= eps;
    else
        return mean <= to_double(eps);
}

// atoms whose mean reward is at most eps on every fully-explored triple
template <class T>
ModelEvent punish_event(const Prior<T>& prior, const TripleSet& explored, const Rational& eps) {
    auto mem = explored.members();
    ModelEvent e{std::vector<char>(prior.size(), 0), "punish:" + explored.key() + "@" + to_string(eps)};
    for (std::size_t i = 0; i < prior.size(); ++i) {
        bool ok = true;
        for (int t : mem)
            if (!mean_at_most(prior.atoms[i].mean[static_cast<std::size_t>(t)], eps)) {
                ok = false;
                break;
            }
        e.in[i] = ok ? 1 : 0;
    }
    return e;
}

// index of an atom drawn from Pr_can[. | cens, punish]
template <class T>
std::size_t sample_hallucinated_model(const PriorPtr<T>& prior, const Ledger& cens, const ModelEvent& punish,
                                      RngStream& rng) {
    Posterior<T> post;
    try {
        post = canonical_posterior(prior, cens, punish);
    } catch (const ZeroEvidence&) {
        throw ZeroEvidence("punish event " + punish.id +
                           " has zero posterior mass given the censored ledger; f_min(eps_pun) > 0 fails");
    }
    return rng.pick(post.w);
}

// fabricated rewards on every fully-explored occurrence, drawn from the
// hallucinated model; under-explored triples stay censored
template <class T>
Ledger hallucinate_ledger(const Ledger& cens, const Model<T>& hal, const TripleSet& U, RngStream& rng) {
    Ledger out(cens.dims, U, kind_for(U, LedgerKind::hallucinated));
    out.entries.reserve(cens.entries.size());
    for (const auto& e : cens.entries) {
        LedgerEntry ne{e.policy, e.steps};
        for (int h = 0; h < static_cast<int>(ne.steps.size()); ++h) {
            auto& s = ne.steps[static_cast<std::size_t>(h)];
            int t = cens.dims.triple(s.x, s.a, h);
            s.r = U.contains(t) ? -1 : static_cast<int>(rng.pick(hal.reward(t), static_cast<std::size_t>(hal.R())));
        }
        out.entries.push_back(std::move(ne));
    }
    return out;
}

// exact law of hallucinate_ledger's output
template <class T>
std::vector<std::pair<Ledger, T>> hallucinated_ledger_law(const Ledger& cens, const Model<T>& hal, const TripleSet& U,
                                                          std::size_t cap = 1'000'000) {
    std::vector<std::pair<Ledger, T>> out;
    Ledger cur(cens.dims, U, kind_for(U, LedgerKind::hallucinated));
    cur.entries.reserve(cens.entries.size());
    for (const auto& e : cens.entries) cur.entries.push_back(e);
    std::vector<std::pair<std::size_t, int>> slots;  // (entry, step) needing a reward
    for (std::size_t i = 0; i < cur.entries.size(); ++i)
        for (int h = 0; h < static_cast<int>(cur.entries[i].steps.size()); ++h) {
            auto& s = cur.entries[i].steps[static_cast<std::size_t>(h)];
            int t = cens.dims.triple(s.x, s.a, h);
            s.r = -1;
            if (!U.contains(t)) slots.emplace_back(i, h);
        }
    auto rec = [&](auto&& self, std::size_t j, const T& mass) -> void {
        if (j == slots.size()) {
            if (out.size() >= cap) throw CapExceeded("hallucinated ledger law exceeds cap");
            out.emplace_back(cur, mass);
            return;
        }
        auto [i, h] = slots[j];
        auto& s = cur.entries[i].steps[static_cast<std::size_t>(h)];
        const T* row = hal.reward(cens.dims.triple(s.x, s.a, h));
        for (int r = 0; r < hal.R(); ++r) {
            if (row[r] == 0) continue;
            s.r = r;
            self(self, j + 1, T(mass * row[r]));
        }
        s.r = -1;
    };
    rec(rec, 0, T(1));
    return out;
}

inline Ledger honest_ledger(const Ledger& raw, const TripleSet& U) { return censor(raw, U, LedgerKind::honest); }

// ------------------------------------------------------------ incentives

template <class T>
T p_hal_bound(const T& p0, const T& q) {
    return T(1) / (T(1) + q * (T(1) - p0) / p0);
}

template <class T>
struct HHCondition {
    bool holds = false;
    T lhs{0};  // 1/n_phase
    T rhs{0};  // punish_prob * gap / 3H
};

template <class T>
HHCondition<T> hh_condition(long n_phase, const T& punish_prob, const T& gap, int H) {
    HHCondition<T> c;
    c.lhs = T(1) / T(n_phase);
    c.rhs = punish_prob * gap / T(3 * H);
    c.holds = gap > 0 && !(c.lhs > c.rhs);
    return c;
}

// ------------------------------------------------------------ deterministic parameters

inline long ceil_rational(const Rational& r) {
    using boost::multiprecision::cpp_int;
    cpp_int n = boost::multiprecision::numerator(r), d = boost::multiprecision::denominator(r);
    cpp_int q = n / d;
    if (q * d < n) q += 1;
    return q.convert_to<long>();
}

// ceil(6H / (r_min * C^(SAH)))
inline long det_phase_length(int H, int SAH, const Rational& r_min, const Rational& C) {
    if (!(r_min > 0)) throw AssumptionViolated("r_min must be positive");
    if (!(C > 0)) throw AssumptionViolated("C = f_min(eps_pun) must be positive");
    return ceil_rational(Rational(6 * H) / (r_min * ipow(C, static_cast<unsigned long>(SAH))));
}

struct DetReport {
    MechanismConfig config;
    Rational r_min, C, eps_pun;
};

inline DetReport det_parameters_from(const Dims& d, const Rational& rmin, const std::function<Rational(const Rational&)>& fmin) {
    if (!(rmin > 0)) throw AssumptionViolated("r_min = 0: the prior mean reward vanishes on some triple");
    DetReport r;
    r.r_min = rmin;
    r.eps_pun = rmin / (2 * d.H);
    r.C = fmin(r.eps_pun);
    if (!(r.C > 0)) throw AssumptionViolated("C = f_min(eps_pun) = 0: no prior mass can be punished on some triple");
    r.config.eps_pun = r.eps_pun;
    r.config.n_lrn = 1;
    r.config.rho = 1;
    r.config.n_phase = det_phase_length(d.H, d.triples(), rmin, r.C);
    r.config.total_phases = d.triples();
    return r;
}

inline DetReport det_parameters(const FactoredPrior& fp) {
    fp.validate();
    for (const auto& m : fp.transition_atoms) {
        for (int t = 0; t < m.dims.triples(); ++t)
            if (!detail::is_point_mass(m.next(t), static_cast<std::size_t>(m.S())))
                throw AssumptionViolated("deterministic parameters need deterministic transitions");
        if (!detail::is_point_mass(m.init.data(), m.init.size()))
            throw AssumptionViolated("deterministic parameters need a deterministic initial state");
    }
    if (fp.family != RewardFamily::point) {
        for (const auto& mg : fp.marginals)
            for (const auto& mu : mg.means)
                if (mu != 0 && mu != 1) throw AssumptionViolated("deterministic parameters need point-mass rewards");
    }
    return det_parameters_from(fp.dims(), r_min(fp), [&](const Rational& e) { return f_min(fp, e); });
}

inline DetReport det_parameters(const Prior<Rational>& prior) {
    for (const auto& m : prior.atoms)
        if (!m.deterministic) throw AssumptionViolated("deterministic parameters need deterministic atoms");
    return det_parameters_from(prior.dims, r_min(prior), [&](const Rational& e) { return f_min(prior, e); });
}

// ------------------------------------------------------------ probabilistic parameters

// explicit constants from the appendix proofs
struct ProbConstants {
    double n_lrn_factor = 192;  // n_lrn >= 192 H^4 (S log 5 + log(1/delta) + iota) / Delta0^2
    double n0_factor = 96;      // n0 = 96 H^4 (S log 5 + log(1/delta0)) / Delta0^2
    double iota_factor = 4;     // iota = 4 log(20 S A H^2 / (rho q eps r_alt))
    double iota_inner = 20;
    double L0_factor = 4;  // L0 = 4 S A H n_lrn / rho_prog
};

inline double eps_r_bound(double delta, double n_lrn) { return std::sqrt(2 * std::log(1 / delta) / n_lrn); }
inline double eps_p_bound(double delta, double n_lrn, int S) {
    return 2 * std::sqrt(2 * (S * std::log(5.0) + std::log(1 / delta)) / n_lrn);
}
inline double effective_gap(double rho, double r_alt) { return rho * r_alt / 2; }
inline double progress_rate(double Delta0, int H) { return Delta0 * Delta0 / (6.0 * H * H); }
inline double visit_threshold(double Delta0, int H) { return Delta0 / (3.0 * H); }

struct ProbInputs {
    double rho = 1;
    double delta = 0.1;
    std::optional<double> q_pun_override;  // any valid lower bound L > 0
    std::optional<double> r_alt_override;
    ProbConstants c;
};

struct ProbReport {
    MechanismConfig config;
    double rho = 0, delta = 0;
    double r_alt = 0, q_pun = 0;
    bool q_pun_overridden = false, independence_reduction = true;
    double eps_pun = 0, Delta0 = 0, rho0 = 0, rho_prog = 0, iota = 0;
    double n_lrn = 0, L0 = 0, K = 0, delta_fail = 0, delta0 = 0, n0 = 0, eps_r = 0, eps_p = 0;
    double n_phase = 0;
    bool n_lrn_at_least_n0 = false;
};

// ceiling that ignores relative rounding noise below 1e-9
inline double ceil_tol(double v) {
    double f = std::floor(v);
    return v - f <= 1e-9 * std::max(1.0, std::abs(v)) ? f : f + 1;
}

inline long saturate(double v) {
    return v >= 9.0e18 ? std::numeric_limits<long>::max() : static_cast<long>(v);
}

// r_min(prior) and f_min(.)^(SAH) stand in for r_alt and q_pun under reward independence
inline ProbReport prob_parameters(const Dims& d, double r_min_value, const std::function<double(double)>& fmin,
                                  const ProbInputs& in) {
    if (!(in.rho > 0) || in.rho > 1) throw AssumptionViolated("rho must lie in (0,1]");
    if (!(in.delta > 0) || !(in.delta < 1)) throw AssumptionViolated("delta must lie in (0,1)");
    ProbReport r;
    r.rho = in.rho;
    r.delta = in.delta;
    r.r_alt = in.r_alt_override.value_or(r_min_value);
    r.independence_reduction = !in.r_alt_override.has_value();
    if (!(r.r_alt > 0)) throw AssumptionViolated("r_alt = 0");
    const int S = d.S, A = d.A, H = d.H, SAH = d.triples();
    r.eps_pun = r.r_alt * in.rho / (18.0 * H);
    if (in.q_pun_override) {
        if (!(*in.q_pun_override > 0)) throw AssumptionViolated("q_pun override must be positive");
        r.q_pun = *in.q_pun_override;
        r.q_pun_overridden = true;
    } else {
        r.q_pun = std::pow(fmin(r.eps_pun), SAH);
    }
    if (!(r.q_pun > 0)) throw AssumptionViolated("q_pun = 0: f_min(eps_pun) vanishes");
    r.Delta0 = effective_gap(in.rho, r.r_alt);
    r.rho0 = visit_threshold(r.Delta0, H);
    r.rho_prog = progress_rate(r.Delta0, H);
    const double H4 = std::pow(H, 4), logS = S * std::log(5.0);
    r.iota = in.c.iota_factor * std::log(in.c.iota_inner * S * A * H * H / (in.rho * r.q_pun * r.eps_pun * r.r_alt));
    r.n_lrn = ceil_tol(std::max(in.c.n_lrn_factor * H4 * (logS + std::log(1 / in.delta) + r.iota) / (r.Delta0 * r.Delta0),
                                 std::log(2 / in.delta)));
    r.L0 = ceil_tol(in.c.L0_factor * SAH * r.n_lrn / r.rho_prog);
    r.delta_fail = in.delta / (2 * r.L0);
    r.delta0 = r.delta_fail * r.q_pun * r.eps_pun / (4.0 * SAH);
    r.n0 = in.c.n0_factor * H4 * (logS + std::log(1 / r.delta0)) / (r.Delta0 * r.Delta0);
    r.n_lrn_at_least_n0 = r.n_lrn >= r.n0;
    r.eps_r = eps_r_bound(r.delta0, r.n_lrn);
    r.eps_p = eps_p_bound(r.delta0, r.n_lrn, S);
    r.n_phase = ceil_tol(6.0 * H / (r.Delta0 * r.q_pun));
    r.K = r.L0 * r.n_phase;

    r.config.eps_pun = rational_from_double(r.eps_pun);
    r.config.rho = rational_from_double(in.rho);
    r.config.n_lrn = static_cast<int>(std::min(r.n_lrn, 2.0e9));
    r.config.n_phase = saturate(r.n_phase);
    r.config.total_phases = saturate(r.L0);
    return r;
}

template <class T>
ProbReport prob_parameters(const Prior<T>& prior, const ProbInputs& in) {
    return prob_parameters(prior.dims, to_double(r_min(prior)),
                           [&](double e) { return to_double(f_min(prior, scalar_from<T>(e))); }, in);
}

inline ProbReport prob_parameters(const FactoredPrior& fp, const ProbInputs& in) {
    return prob_parameters(fp.dims(), to_double(r_min(fp)),
                           [&](double e) { return to_double(f_min(fp, rational_from_double(e))); }, in);
}

// ------------------------------------------------------------ exact q_pun and r_alt

template <class T>
struct QPunRAlt {
    T q_pun{1};            // min over totally-censored ledgers of Pr_can[all triples punished | ledger]
    T q_pun_realized{1};   // same, punishing only the fully-explored triples at n_lrn
    T r_alt{1};            // min over censored ledgers of min over U of E_can[mean | ledger]
    std::size_t totally_censored = 0, partially_censored = 0;
};

template <class T>
QPunRAlt<T> q_pun_r_alt_exact(const PriorPtr<T>& prior, int n_lrn, const Rational& eps_pun,
                              const std::vector<Ledger>& family, std::size_t cap = 100'000) {
    if (family.size() > cap) throw CapExceeded("ledger family exceeds cap");
    const Dims d = prior->dims;
    QPunRAlt<T> out;
    auto all_pun = punish_event(*prior, TripleSet::all(d), eps_pun);
    bool have_r = false;
    for (const auto& l : family) {
        auto post = canonical_posterior(prior, l);
        if (l.U.size() == static_cast<std::size_t>(d.triples())) {
            ++out.totally_censored;
            T q = post.mass(all_pun);
            if (q < out.q_pun) out.q_pun = q;
            auto explored = underexplored_set(l, n_lrn).complement();
            T qr = post.mass(punish_event(*prior, explored, eps_pun));
            if (qr < out.q_pun_realized) out.q_pun_realized = qr;
        }
        if (!l.U.empty()) {
            ++out.partially_censored;
            for (int t : l.U.members()) {
                T m(0);
                for (std::size_t i = 0; i < post.w.size(); ++i)
                    if (post.w[i] != 0) m += post.w[i] * prior->atoms[i].mean[static_cast<std::size_t>(t)];
                if (!have_r || m < out.r_alt) out.r_alt = m;
                have_r = true;
            }
        }
    }
    return out;
}

// All one-entry ledgers any atom can produce: each totally censored, and
// censored at the n_lrn under-explored set of that single entry.
template <class T>
std::vector<Ledger> one_entry_family(const Prior<T>& prior, int n_lrn, std::size_t cap = 100'000) {
    std::map<std::string, Ledger> seen;
    for (const auto& pi : enumerate_policies(prior.dims)) {
        for (const auto& m : prior.atoms) {
            for (auto& [tau, p] : enumerate_trajectories(m, pi)) {
                Ledger raw(prior.dims);
                raw.entries.push_back({pi, tau});
                for (const Ledger& l : {totally_censor(raw), censor(raw, underexplored_set(raw, n_lrn))}) {
                    seen.emplace(l.key(), l);
                    if (seen.size() > cap) throw CapExceeded("ledger family exceeds cap");
                }
            }
        }
    }
    std::vector<Ledger> out;
    for (auto& [k, l] : seen) out.push_back(l);
    return out;
}

}  // namespace ielab
