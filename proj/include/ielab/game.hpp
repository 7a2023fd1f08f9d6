#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "agent.hpp"

namespace ielab {

enum class LogLevel { full, hallucination };

struct EpisodeRecord {
    long k = 0, phase = 0;
    bool hallucination = false;
    LedgerKind kind = LedgerKind::raw;
    std::string ledger_id;
    Policy policy;
    Trajectory tau;
    std::string stream;
};

struct PhaseRecord {
    long phase = 0, kstar = 0;
    TripleSet U;
    double punish_prob = 0;
    std::size_t hal_model = 0;
    std::string cens_id, hal_id, hon_id;
    Policy hal_policy, exploit_policy;
    Trajectory hal_tau;
    int new_triples = 0;
    bool covered = false;  // after this phase
    std::optional<double> gap, hh_lhs, hh_rhs;
    std::optional<bool> hh_holds, chose_in_target;
};

struct GameSummary {
    std::size_t truth = 0;
    long phases_run = 0;
    long phases_to_coverage = -1;
    std::size_t reach_size = 0;
    std::vector<int> visits;
    bool new_triple_until_coverage = true;
};

struct GameLog {
    MechanismConfig config;
    AgentMode agent = AgentMode::canonical_truster;
    std::uint64_t seed = 0;
    std::vector<EpisodeRecord> episodes;
    std::vector<PhaseRecord> phases;
    GameSummary summary;
    Ledger raw;
};

struct GameOptions {
    LogLevel level = LogLevel::hallucination;
    bool stop_at_coverage = false;
    bool incentive_checks = false;
    std::optional<Rational> rho0;  // visit threshold of the target set; defaults to 1
    std::optional<std::size_t> truth;
    // return false to stop after this phase
    std::function<bool(const PhaseRecord&, const Ledger& hal)> on_phase;
};

inline std::string ledger_id(const Ledger& l) { return detail::digest(l.key()); }

template <class T>
GameLog run_game(const MechanismConfig& cfg, const PriorPtr<T>& prior, Agent& agent, std::uint64_t seed,
                 const GameOptions& opt = {}) {
    cfg.validate();
    const auto& P = *prior;
    const Dims d = P.dims;
    GameLog log;
    log.config = cfg;
    log.agent = agent.mode();
    log.seed = seed;
    if (opt.truth) {
        if (*opt.truth >= P.size()) throw InvalidInput("true atom index out of range");
        log.summary.truth = *opt.truth;
    } else {
        RngStream rng(seed, streams::truth());
        log.summary.truth = rng.pick(P.weights);
    }
    const Model<T>& truth = P.atoms[log.summary.truth];
    const TripleSet reach = reach_set(truth, from_rational<T>(cfg.rho));
    log.summary.reach_size = reach.size();
    const T rho0 = from_rational<T>(opt.rho0.value_or(Rational(1)));

    Ledger raw(d);
    std::vector<Policy> policies;
    if (opt.incentive_checks) policies = enumerate_policies(d);

    for (long l = 1; l <= cfg.total_phases; ++l) {
        const TripleSet U = underexplored_set(raw, cfg.n_lrn);
        const Ledger cens = totally_censor(raw);
        const Ledger hon = honest_ledger(raw, U);
        const auto punish = punish_event(P, U.complement(), cfg.eps_pun);
        const long kstar = draw_kstar(cfg, l, seed);

        PhaseRecord rec;
        rec.phase = l;
        rec.kstar = kstar;
        rec.U = U;
        const T punish_prob = canonical_posterior(prior, cens).mass(punish);
        rec.punish_prob = to_double(punish_prob);
        RngStream model_rng(seed, streams::hal_model(l)), reward_rng(seed, streams::hal_rewards(l));
        try {
            rec.hal_model = sample_hallucinated_model(prior, cens, punish, model_rng);
        } catch (const ZeroEvidence& e) {
            throw ZeroEvidence(std::string(e.what()) + " (phase " + std::to_string(l) + ", seed " + std::to_string(seed) + ")");
        }
        const Ledger hal = hallucinate_ledger(cens, P.atoms[rec.hal_model], U, reward_rng);
        rec.cens_id = ledger_id(cens);
        rec.hal_id = ledger_id(hal);
        rec.hon_id = ledger_id(hon);

        auto episode = [&](long k) {
            bool is_hal = k == kstar;
            const Ledger& shown = is_hal ? hal : hon;
            EpisodeRecord e;
            e.k = k;
            e.phase = l;
            e.hallucination = is_hal;
            e.kind = shown.kind;
            e.ledger_id = is_hal ? rec.hal_id : rec.hon_id;
            e.policy = agent.choose(k, l, shown);
            e.stream = streams::episode(k);
            RngStream rng(seed, e.stream);
            e.tau = sample_trajectory(truth, e.policy, rng);
            return e;
        };

        const long first = cfg.first_episode(l);
        EpisodeRecord hal_ep;
        if (opt.level == LogLevel::full) {
            for (long k = first; k < first + cfg.n_phase; ++k) {
                auto e = episode(k);
                if (e.hallucination) hal_ep = e;
                log.episodes.push_back(std::move(e));
            }
        } else {
            hal_ep = episode(kstar);
            log.episodes.push_back(hal_ep);
        }
        rec.hal_policy = hal_ep.policy;
        rec.hal_tau = hal_ep.tau;
        if (cfg.n_phase > 1) {
            long k = kstar == first ? first + 1 : first;
            rec.exploit_policy = agent.choose(k, l, hon);
        } else {
            rec.exploit_policy = hal_ep.policy;
        }

        if (opt.incentive_checks) {
            auto Pi = sufficiently_visiting_policies(truth, U, rho0, policies);
            std::size_t inside = static_cast<std::size_t>(std::count(Pi.begin(), Pi.end(), 1));
            rec.chose_in_target = Pi[encode(hal_ep.policy, d)] != 0;
            if (inside > 0 && inside < Pi.size()) {
                T gap = canonical_gap(canonical_posterior(prior, hal), Pi);
                auto hh = hh_condition(cfg.n_phase, punish_prob, gap, d.H);
                rec.gap = to_double(gap);
                rec.hh_lhs = to_double(hh.lhs);
                rec.hh_rhs = to_double(hh.rhs);
                rec.hh_holds = hh.holds;
            }
        }

        auto before = visit_counts(raw);
        for (int h = 0; h < d.H; ++h)
            if (before[static_cast<std::size_t>(d.triple(hal_ep.tau[static_cast<std::size_t>(h)].x, hal_ep.tau[static_cast<std::size_t>(h)].a, h))] == 0)
                ++rec.new_triples;
        raw.entries.push_back({hal_ep.policy, hal_ep.tau});

        const bool was_covered = log.summary.phases_to_coverage >= 0;
        const TripleSet next_U = underexplored_set(raw, cfg.n_lrn);
        rec.covered = next_U.intersect(reach).empty();
        if (!was_covered && rec.new_triples == 0) log.summary.new_triple_until_coverage = false;
        if (rec.covered && !was_covered) log.summary.phases_to_coverage = l;
        const bool go_on = !opt.on_phase || opt.on_phase(rec, hal);
        log.phases.push_back(std::move(rec));
        log.summary.phases_run = l;
        if (!go_on || (opt.stop_at_coverage && log.phases.back().covered)) break;
    }
    log.summary.visits = visit_counts(raw);
    log.raw = std::move(raw);
    return log;
}

}  // namespace ielab
