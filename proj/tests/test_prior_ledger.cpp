#include <gtest/gtest.h>

#include <set>

#include <ielab/io.hpp>

#include "support.hpp"

using namespace ielab;
using namespace testing_support;

namespace {

Ledger censored_copy(const Ledger& raw, const TripleSet& U) { return censor(raw, U); }

std::size_t policy_index(const Policy& pi, const Dims& d) { return static_cast<std::size_t>(encode(pi, d)); }

}  // namespace

// ------------------------------------------------------------ posteriors

TEST(CanonicalPosterior, EmptyLedgerIsPrior) {
    auto P = stoch_prior<Rational>();
    auto post = canonical_posterior(P, Ledger(P->dims));
    EXPECT_EQ(post.w, P->weights);
}

TEST(CanonicalPosterior, MatchesBruteForceBayesExactly) {
    auto P = stoch_prior<Rational>();
    std::mt19937_64 g(11);
    for (int rep = 0; rep < 12; ++rep) {
        const auto& truth = P->atoms[g() % P->size()];
        auto raw = random_raw_ledger(g, truth, 1 + rep % 3);
        auto U = random_triples(g, P->dims, 0.4);
        for (const Ledger& l : {raw, censored_copy(raw, U), totally_censor(raw)}) {
            auto post = canonical_posterior(P, l);
            EXPECT_EQ(post.w, brute_posterior(*P, l));
        }
    }
}

TEST(CanonicalPosterior, FloatTracksRational) {
    auto PR = stoch_prior<Rational>();
    auto PD = stoch_prior<double>();
    std::mt19937_64 g(12);
    for (int rep = 0; rep < 10; ++rep) {
        auto raw = random_raw_ledger(g, PR->atoms[g() % PR->size()], 6);
        auto a = canonical_posterior(PR, raw);
        auto b = canonical_posterior(PD, raw);
        for (std::size_t i = 0; i < a.w.size(); ++i) EXPECT_NEAR(b.w[i], to_double(a.w[i]), 1e-12);
    }
}

TEST(CanonicalPosterior, LongLedgerDoesNotUnderflow) {
    auto PD = stoch_prior<double>();
    std::mt19937_64 g(13);
    auto raw = random_raw_ledger(g, PD->atoms[5], 3000);
    auto post = canonical_posterior(PD, raw);
    double s = 0;
    for (double w : post.w) s += w;
    EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(CanonicalPosterior, ContradictoryLedgerIsZeroEvidence) {
    auto P = det_prior<Rational>();
    Ledger l(P->dims);
    Policy pi(P->dims, 0);
    // action 1 moves to state 1, the record claims state 2
    l.entries.push_back({pi, Trajectory{{0, 0, 0}, {1, 0, 0}}});
    EXPECT_THROW(canonical_posterior(P, l), ZeroEvidence);
    EXPECT_EQ(consistent_models(*P, l).count(), 0u);
}

TEST(ConsistentModels, DeterministicRawLedgerFixesVisitedRewards) {
    auto P = det_prior<Rational>();
    std::mt19937_64 g(14);
    for (int rep = 0; rep < 20; ++rep) {
        std::size_t i = g() % P->size();
        auto raw = random_raw_ledger(g, P->atoms[i], 1 + rep % 4);
        std::set<int> visited;
        for (const auto& e : raw.entries)
            for (int h = 0; h < 2; ++h) visited.insert(P->dims.triple(e.steps[static_cast<std::size_t>(h)].x, e.steps[static_cast<std::size_t>(h)].a, h));
        auto ev = consistent_models(*P, raw);
        EXPECT_TRUE(ev.contains(i));
        EXPECT_EQ(ev.count(), 256u >> visited.size());
        for (auto j : ev.members())
            for (int t : visited) EXPECT_EQ(P->atoms[j].mean[static_cast<std::size_t>(t)], P->atoms[i].mean[static_cast<std::size_t>(t)]);
    }
}

TEST(ConsistentModels, EmptyLedgerIsEverything) {
    auto P = stoch_prior<Rational>();
    EXPECT_EQ(consistent_models(*P, Ledger(P->dims)).count(), P->size());
}

// ------------------------------------------------------------ values, greedy choice, gap

TEST(BayesGreedy, TiesGoToSmallestEncoding) {
    auto P = det_prior<Rational>();
    auto v = policy_values(prior_posterior(P));
    // every policy collects two triples of prior mean 2/5
    for (const auto& x : v) EXPECT_EQ(x, Rational(4, 5));
    EXPECT_EQ(argmax_policies(v).size(), 16u);
    EXPECT_EQ(policy_index(bayes_greedy(prior_posterior(P)), P->dims), 0u);
}

TEST(BayesGreedy, PicksTheRevealedGoodArm) {
    auto P = det_prior<Rational>();
    Ledger l(P->dims);
    Policy pi = decode(0, P->dims);
    // (1,1,1) reward 4/5, then (1,1,2) reward 0
    l.entries.push_back({pi, Trajectory{{0, 0, 1}, {0, 0, 0}}});
    auto best = bayes_greedy(canonical_posterior(P, l));
    EXPECT_EQ(best(0, 0), 0);
    EXPECT_EQ(best(0, 1), 1);  // avoid the revealed zero
}

TEST(BayesGreedy, FloatTieToleranceKeepsCanonicalChoice) {
    auto P = det_prior<double>();
    EXPECT_EQ(policy_index(bayes_greedy(prior_posterior(P)), P->dims), 0u);
}

TEST(ConditionalValue, AgreesWithPolicyTable) {
    auto P = stoch_prior<Rational>();
    std::mt19937_64 g(15);
    auto raw = random_raw_ledger(g, P->atoms[7], 2);
    auto post = canonical_posterior(P, raw);
    auto v = policy_values(post);
    for (std::size_t j = 0; j < v.size(); j += 5) EXPECT_EQ(v[j], conditional_value(post, P->values().policies[j]));
}

TEST(CanonicalGap, DegenerateSplitsThrow) {
    std::vector<Rational> v{1, 2, 3};
    EXPECT_THROW(canonical_gap(v, PolicySubset{0, 0, 0}), DegenerateSplit);
    EXPECT_THROW(canonical_gap(v, PolicySubset{1, 1, 1}), DegenerateSplit);
    EXPECT_THROW(canonical_gap(v, PolicySubset{1, 0}), InvalidInput);
}

TEST(CanonicalGap, BestInsideMinusBestOutside) {
    std::vector<Rational> v{Rational(1, 2), Rational(1, 5), Rational(3, 10)};
    EXPECT_EQ(canonical_gap(v, PolicySubset{1, 0, 0}), Rational(1, 5));
    EXPECT_EQ(canonical_gap(v, PolicySubset{0, 1, 1}), Rational(-1, 5));
    EXPECT_EQ(canonical_gap(v, complement(PolicySubset{0, 1, 1})), Rational(1, 5));
}

// ------------------------------------------------------------ reward summaries and factoring

TEST(RewardSummaries, MicroDet) {
    auto fp = instances::micro_det_1();
    EXPECT_EQ(r_min(fp), Rational(2, 5));
    EXPECT_EQ(f_min(fp, Rational(1, 10)), Rational(1, 2));
    EXPECT_EQ(f_min(fp, Rational(0)), Rational(1, 2));
    EXPECT_EQ(f_min(fp, Rational(4, 5)), Rational(1));
    auto P = det_prior<Rational>();
    EXPECT_EQ(r_min(*P), r_min(fp));
    EXPECT_EQ(f_min(*P, Rational(1, 10)), f_min(fp, Rational(1, 10)));
}

TEST(RewardSummaries, NegativeEpsIsRejected) {
    EXPECT_THROW(f_min(*det_prior<Rational>(), Rational(-1, 10)), PreconditionViolated);
}

TEST(Expand, SizesAndOrder) {
    auto D = det_prior<Rational>();
    auto S = stoch_prior<Rational>();
    EXPECT_EQ(D->size(), 256u);
    EXPECT_EQ(S->size(), 512u);
    Rational sum = 0;
    for (const auto& w : S->weights) sum += w;
    EXPECT_EQ(sum, 1);
    // the first triple varies slowest
    EXPECT_EQ(D->atoms[127].mean[0], 0);
    EXPECT_EQ(D->atoms[128].mean[0], Rational(4, 5));
    EXPECT_EQ(D->atoms[0].mean[7], 0);
    EXPECT_EQ(D->atoms[1].mean[7], Rational(4, 5));
}

TEST(Expand, CapIsEnforced) {
    EXPECT_THROW(expand<double>(instances::micro_stoch_1(), 100), CapExceeded);
}

TEST(Expand, BernoulliMeansBecomeRewardLaws) {
    auto S = stoch_prior<Rational>();
    for (const auto& m : S->atoms)
        for (int t = 0; t < 8; ++t) EXPECT_EQ(m.reward(t)[1], m.mean[static_cast<std::size_t>(t)]);
}

// ------------------------------------------------------------ ledgers

TEST(Ledger, CensoredLedgersOfFixedPoliciesSumToOne) {
    auto P = stoch_prior<Rational>();
    std::mt19937_64 g(16);
    for (int rep = 0; rep < 4; ++rep) {
        const auto& m = P->atoms[g() % P->size()];
        auto pi1 = random_policy(g, m.dims), pi2 = random_policy(g, m.dims);
        auto U = random_triples(g, m.dims, 0.5);
        std::map<std::string, Ledger> seen;
        for (auto& [t1, p1] : enumerate_trajectories(m, pi1))
            for (auto& [t2, p2] : enumerate_trajectories(m, pi2)) {
                Ledger raw(m.dims);
                raw.entries = {{pi1, t1}, {pi2, t2}};
                auto c = censor(raw, U);
                seen.emplace(c.key(), c);
            }
        Rational total = 0;
        for (auto& [k, l] : seen) total += ledger_probability(m, l);
        EXPECT_EQ(total, 1);
    }
}

TEST(Ledger, CensoringIsAPushforward) {
    auto P = stoch_prior<Rational>();
    std::mt19937_64 g(17);
    const auto& m = P->atoms[300];
    auto pi = random_policy(g, m.dims);
    auto U = random_triples(g, m.dims, 0.5);
    std::map<std::string, std::pair<Ledger, Rational>> push;
    for (auto& [tau, p] : enumerate_trajectories(m, pi)) {
        Ledger raw(m.dims);
        raw.entries = {{pi, tau}};
        EXPECT_EQ(ledger_probability(m, raw), p);
        auto c = censor(raw, U);
        auto [it, fresh] = push.emplace(c.key(), std::pair{c, Rational(0)});
        it->second.second += ledger_probability(m, raw);
    }
    for (auto& [k, lp] : push) EXPECT_EQ(ledger_probability(m, lp.first), lp.second);
}

TEST(Ledger, VisitCountsIgnoreCensoring) {
    auto P = stoch_prior<double>();
    std::mt19937_64 g(18);
    auto raw = random_raw_ledger(g, P->atoms[3], 25);
    EXPECT_EQ(visit_counts(raw), visit_counts(totally_censor(raw)));
    EXPECT_EQ(visit_counts(raw), visit_counts(censor(raw, random_triples(g, raw.dims))));
    int total = 0;
    for (int c : visit_counts(raw)) total += c;
    EXPECT_EQ(total, 25 * 2);
}

TEST(Ledger, UnderexploredSetThresholds) {
    auto P = det_prior<double>();
    Ledger raw(P->dims);
    Policy pi(P->dims, 0);
    RngStream rng(0, "x");
    for (int i = 0; i < 3; ++i) raw.entries.push_back({pi, sample_trajectory(P->atoms[0], pi, rng)});
    EXPECT_EQ(underexplored_set(raw, 3).size(), 6u);
    EXPECT_EQ(underexplored_set(raw, 4).size(), 8u);
    EXPECT_TRUE(underexplored_set(Ledger(P->dims), 1) == TripleSet::all(P->dims));
}

TEST(Ledger, KeysAreOrderSensitive) {
    auto P = stoch_prior<double>();
    std::mt19937_64 g(19);
    auto raw = random_raw_ledger(g, P->atoms[0], 2);
    while (raw.entries[0] == raw.entries[1]) raw = random_raw_ledger(g, P->atoms[0], 2);
    Ledger swapped = raw;
    std::swap(swapped.entries[0], swapped.entries[1]);
    EXPECT_NE(raw.key(), swapped.key());
    EXPECT_FALSE(raw == swapped);
    EXPECT_NE(raw.key(), totally_censor(raw).key());
}

TEST(Ledger, JsonlRoundTrip) {
    auto P = stoch_prior<double>();
    std::mt19937_64 g(20);
    auto raw = random_raw_ledger(g, P->atoms[9], 5);
    for (const Ledger& l : {raw, censor(raw, random_triples(g, raw.dims, 0.5)), totally_censor(raw)}) {
        auto text = ledger_to_jsonl(l, *P->support);
        auto back = ledger_from_jsonl(text, *P->support);
        EXPECT_TRUE(back == l);
        EXPECT_EQ(back.kind, l.kind);
        EXPECT_EQ(ledger_to_jsonl(back, *P->support), text);
    }
}

TEST(Ledger, JsonlRejectsInconsistentCensoring) {
    auto P = det_prior<double>();
    std::string text =
        "{\"type\":\"ledger\",\"S\":2,\"A\":2,\"H\":2,\"kind\":\"honest\",\"U\":[[1,1,1]]}\n"
        "{\"policy\":[1,1,1,1],\"steps\":[[1,1,1,0],[1,1,2,0]]}\n";
    EXPECT_THROW(ledger_from_jsonl(text, *P->support), InvalidInput);
    std::string ok =
        "{\"type\":\"ledger\",\"S\":2,\"A\":2,\"H\":2,\"kind\":\"honest\",\"U\":[[1,1,1]]}\n"
        "{\"policy\":[1,1,1,1],\"steps\":[[1,1,1,null],[1,1,2,\"4/5\"]]}\n";
    auto l = ledger_from_jsonl(ok, *P->support);
    EXPECT_EQ(l.entries[0].steps[1].r, 1);
}
