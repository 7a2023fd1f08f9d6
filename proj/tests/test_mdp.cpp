#include <gtest/gtest.h>

#include "support.hpp"

using namespace ielab;
using namespace testing_support;

namespace {

Model<double> constant_model(int H, Rational r) {
    auto sup = make_support({r});
    auto m = Model<double>::blank({1, 1, H}, sup);
    m.init = {1.0};
    std::fill(m.trans.begin(), m.trans.end(), 1.0);
    std::fill(m.rew.begin(), m.rew.end(), 1.0);
    m.finalize();
    return m;
}

// 3-state chain: always move right; state 3 never reached before h=3
Model<Rational> chain() {
    auto sup = make_support({Rational(0)});
    Dims d{3, 1, 2};
    auto m = Model<Rational>::blank(d, sup);
    m.init = {1, 0, 0};
    for (int x = 0; x < 3; ++x)
        for (int h = 0; h < 2; ++h) m.trans[static_cast<std::size_t>(d.triple(x, 0, h)) * 3 + std::min(x + 1, 2)] = 1;
    std::fill(m.rew.begin(), m.rew.end(), Rational(1));
    m.finalize();
    return m;
}

}  // namespace

TEST(PolicyValue, ZeroRewardIsZero) {
    auto m = constant_model(1, 0);
    EXPECT_EQ(policy_value(m, Policy(m.dims)), 0.0);
}

TEST(PolicyValue, ConstantRewardsSum) {
    auto m = constant_model(3, Rational(1, 2));
    EXPECT_DOUBLE_EQ(policy_value(m, Policy(m.dims)), 1.5);
}

TEST(PolicyValue, MicroDetMatchesPathEnumeration) {
    auto P = det_prior<Rational>();
    Policy ones(P->dims, 0);
    for (const auto& m : P->atoms) EXPECT_EQ(policy_value(m, ones), brute_value(m, ones));
    // the all-4/5 atom is the last in expansion order
    EXPECT_EQ(policy_value(P->atoms.back(), ones), Rational(8, 5));
    EXPECT_EQ(policy_value(P->atoms.front(), ones), Rational(0));
}

TEST(PolicyValue, MatchesEnumerationOnRandomModels) {
    std::mt19937_64 g(7);
    for (int rep = 0; rep < 200; ++rep) {
        Dims d{1 + rep % 3, 1 + (rep / 3) % 2, 1 + (rep / 6) % 3};
        auto m = random_model(g, d, rep % 5 == 0);
        auto pi = random_policy(g, d);
        EXPECT_NEAR(policy_value(m, pi), brute_value(m, pi), 1e-10);
        EXPECT_LE(policy_value(m, pi), optimal_value(m) + 1e-12);
    }
}

TEST(TrajectoryProbability, DeterministicModelIsZeroOne) {
    auto P = det_prior<Rational>();
    const auto& m = P->atoms[37];
    ASSERT_TRUE(m.deterministic);
    Policy pi(m.dims, 0);
    pi.at(0, 0) = 1;
    auto paths = brute_paths(m, pi);
    ASSERT_EQ(paths.size(), 1u);
    EXPECT_EQ(trajectory_probability(m, pi, paths[0].first), Rational(1));
    auto other = paths[0].first;
    other[1].r = 1 - other[1].r;
    EXPECT_EQ(trajectory_probability(m, pi, other), Rational(0));
    other = paths[0].first;
    other[0].a = 0;  // inconsistent with the policy
    EXPECT_EQ(trajectory_probability(m, pi, other), Rational(0));
}

TEST(TrajectoryProbability, MicroStochSumsToOneExactly) {
    auto P = stoch_prior<Rational>();
    for (std::size_t i : {0ul, 100ul, 300ul, 511ul})
        for (const auto& pi : enumerate_policies(P->dims)) {
            Rational s = 0;
            for (auto& [tau, p] : brute_paths(P->atoms[i], pi)) {
                EXPECT_EQ(trajectory_probability(P->atoms[i], pi, tau), p);
                s += trajectory_probability(P->atoms[i], pi, tau);
            }
            EXPECT_EQ(s, 1);
            auto lib = enumerate_trajectories(P->atoms[i], pi);
            EXPECT_EQ(lib.size(), brute_paths(P->atoms[i], pi).size());
        }
}

TEST(SampleTrajectory, DeterministicIgnoresSeed) {
    auto P = det_prior<double>();
    const auto& m = P->atoms[200];
    Policy pi(m.dims, 1);
    auto ref = brute_paths(m, pi).at(0).first;
    for (std::uint64_t s = 0; s < 20; ++s) {
        RngStream rng(s, "episode:1:traj");
        EXPECT_EQ(sample_trajectory(m, pi, rng), ref);
    }
}

TEST(SampleTrajectory, EmpiricalFrequenciesMatchPmf) {
    auto P = stoch_prior<double>();
    const auto& m = P->atoms[300];
    Policy pi(m.dims, 0);
    pi.at(1, 0) = 1;
    auto paths = brute_paths(m, pi);
    std::map<Trajectory, int> count;
    const int n = 100000;
    RngStream rng(12345, "episode:7:traj");
    for (int i = 0; i < n; ++i) ++count[sample_trajectory(m, pi, rng)];
    for (auto& [tau, p] : paths) {
        double se = std::sqrt(p * (1 - p) / n);
        EXPECT_NEAR(count[tau] / double(n), p, 3 * se + 1e-12);
    }
}

TEST(SampleTrajectory, StreamsReplayAndSeparate) {
    RngStream a(99, "episode:3:traj"), b(99, "episode:3:traj"), c(99, "episode:4:traj"), d(98, "episode:3:traj");
    int same = 0, diff_name = 0, diff_seed = 0;
    for (int i = 0; i < 64; ++i) {
        auto va = a(), vb = b(), vc = c(), vd = d();
        same += va == vb;
        diff_name += va == vc;
        diff_seed += va == vd;
    }
    EXPECT_EQ(same, 64);
    EXPECT_EQ(diff_name, 0);
    EXPECT_EQ(diff_seed, 0);
}

TEST(EnumeratePolicies, Counts) {
    EXPECT_EQ(enumerate_policies({1, 2, 1}).size(), 2u);
    EXPECT_EQ(enumerate_policies({2, 2, 2}).size(), 16u);
    EXPECT_EQ(enumerate_policies({3, 2, 3}).size(), 512u);
    EXPECT_THROW(enumerate_policies({5, 4, 5}), CapExceeded);
}

TEST(EnumeratePolicies, CanonicalOrder) {
    Dims d{2, 3, 2};
    auto ps = enumerate_policies(d);
    for (std::size_t i = 0; i < ps.size(); ++i) {
        EXPECT_EQ(encode(ps[i], d), i);
        if (i) EXPECT_LT(ps[i - 1], ps[i]);
    }
    // (x=1,h=1) is the most significant digit
    EXPECT_EQ(ps[27].act, (std::vector<int>{1, 0, 0, 0}));
    EXPECT_EQ(ps[9].act, (std::vector<int>{0, 1, 0, 0}));
}

TEST(ReachProbability, TrivialCases) {
    auto P = det_prior<Rational>();
    EXPECT_EQ(reach_probability(P->atoms[0], 0, 0), Rational(1));
    EXPECT_EQ(reach_probability(P->atoms[0], 1, 0), Rational(0));
    auto c = chain();
    EXPECT_EQ(reach_probability(c, 2, 1), Rational(0));
    EXPECT_EQ(reach_probability(c, 1, 1), Rational(1));
}

TEST(ReachProbability, MicroStochMatchesBruteForce) {
    auto P = stoch_prior<Rational>();
    auto pols = enumerate_policies(P->dims);
    for (std::size_t i : {0ul, 511ul})
        for (int h = 0; h < 2; ++h)
            for (int x = 0; x < 2; ++x) {
                Rational best = 0;
                for (const auto& pi : pols) best = std::max(best, forward_state_prob(P->atoms[i], pi, x, h));
                EXPECT_EQ(reach_probability(P->atoms[i], x, h), best);
            }
    // the biased atoms reach state 1 at step 2 with probability 3/4
    EXPECT_EQ(reach_probability(P->atoms[511], 0, 1), Rational(3, 4));
}

TEST(ReachProbability, RandomModelsMatchBruteForce) {
    std::mt19937_64 g(11);
    for (int rep = 0; rep < 60; ++rep) {
        Dims d{1 + rep % 3, 1 + rep % 2, 1 + (rep / 2) % 3};
        auto m = convert_model<Rational>(random_model(g, d, rep % 4 == 0));
        auto pols = enumerate_policies(d);
        for (int h = 0; h < d.H; ++h)
            for (int x = 0; x < d.S; ++x) {
                Rational best = 0;
                for (const auto& pi : pols) best = std::max(best, forward_state_prob(m, pi, x, h));
                EXPECT_EQ(reach_probability(m, x, h), best);
            }
    }
}

TEST(ReachSet, DeterministicEqualsUnionOfTrajectories) {
    auto P = det_prior<Rational>();
    const auto& m = P->atoms[5];
    TripleSet expect(m.dims);
    for (const auto& pi : enumerate_policies(m.dims))
        for (auto& [tau, p] : brute_paths(m, pi))
            for (int h = 0; h < 2; ++h)
                for (int a = 0; a < 2; ++a) expect.insert(m.dims.triple(tau[h].x, a, h));
    EXPECT_EQ(reach_set(m, Rational(1)), expect);
    EXPECT_EQ(expect.size(), 6u);
}

TEST(ReachSet, RhoBoundsAndSingleState) {
    auto c = chain();
    EXPECT_THROW(reach_set(c, Rational(101, 100)), PreconditionViolated);
    EXPECT_THROW(reach_set(c, Rational(0)), PreconditionViolated);
    auto m = constant_model(3, Rational(1, 2));
    EXPECT_EQ(reach_set(m, 1.0).size(), 3u);
}

TEST(ReachSet, MicroStochQuarter) {
    auto P = stoch_prior<Rational>();
    auto pols = enumerate_policies(P->dims);
    for (std::size_t i : {0ul, 511ul}) {
        TripleSet expect(P->dims);
        for (int h = 0; h < 2; ++h)
            for (int x = 0; x < 2; ++x) {
                Rational best = 0;
                for (const auto& pi : pols) best = std::max(best, forward_state_prob(P->atoms[i], pi, x, h));
                if (best >= Rational(1, 4))
                    for (int a = 0; a < 2; ++a) expect.insert(P->dims.triple(x, a, h));
            }
        EXPECT_EQ(reach_set(P->atoms[i], Rational(1, 4)), expect);
    }
}

TEST(EventVisit, TrivialSets) {
    auto P = stoch_prior<Rational>();
    Policy pi(P->dims, 0);
    EXPECT_EQ(event_visit_probability(P->atoms[3], pi, TripleSet::all(P->dims)), Rational(1));
    EXPECT_EQ(event_visit_probability(P->atoms[3], pi, TripleSet::none(P->dims)), Rational(0));
    EXPECT_TRUE(occupancy_omega(P->atoms[3], pi, TripleSet::none(P->dims)).empty());
}

TEST(EventVisit, MicroStochSingleTriple) {
    auto P = stoch_prior<Rational>();
    TripleSet U(P->dims);
    U.insert(P->dims.triple(1, 0, 1));  // (2,1,2)
    for (std::size_t i : {0ul, 511ul})
        for (const auto& pi : enumerate_policies(P->dims)) {
            Rational hit = 0;
            for (auto& [tau, p] : brute_paths(P->atoms[i], pi))
                if (visits(tau, U)) hit += p;
            EXPECT_EQ(event_visit_probability(P->atoms[i], pi, U), hit);
        }
}

TEST(Occupancy, PerTripleMatchesEnumeration) {
    auto P = stoch_prior<Rational>();
    std::mt19937_64 g(3);
    for (int rep = 0; rep < 40; ++rep) {
        auto U = random_triples(g, P->dims, 0.4);
        const auto& m = P->atoms[static_cast<std::size_t>(rep * 13 % 512)];
        auto pi = random_policy(g, P->dims);
        auto omega = occupancy_omega(m, pi, U);
        std::map<int, Rational> expect;
        for (int t : U.members()) expect[t] = 0;
        for (auto& [tau, p] : brute_paths(m, pi))
            for (int h = 0; h < 2; ++h) {
                int t = P->dims.triple(tau[h].x, tau[h].a, h);
                if (U.contains(t)) {
                    expect[t] += p;
                    break;
                }
            }
        EXPECT_EQ(omega, expect);
        Rational sum = 0;
        for (auto& [t, w] : omega) sum += w;
        EXPECT_EQ(sum, event_visit_probability(m, pi, U));
    }
}

TEST(Occupancy, DecompositionOnRandomModels) {
    std::mt19937_64 g(5);
    for (int rep = 0; rep < 300; ++rep) {
        Dims d{1 + rep % 3, 1 + rep % 2, 1 + (rep / 3) % 3};
        auto m = random_model(g, d);
        auto pi = random_policy(g, d);
        auto U = random_triples(g, d, 0.35);
        double sum = 0;
        for (auto& [t, w] : occupancy_omega(m, pi, U)) sum += w;
        EXPECT_NEAR(sum, event_visit_probability(m, pi, U), 1e-12);
    }
}
