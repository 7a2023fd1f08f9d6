// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include <ielab/harness.hpp>

#include "support.hpp"

using namespace ielab;
using namespace testing_support;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, const std::function<Outcome()>& body) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s %d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

MechanismConfig det_config() { return det_parameters(instances::micro_det_1()).config; }

// ------------------------------------------------------------ 1

Outcome deterministic_exploration() {
    auto c = parse_config(json{{"kind", "det-theorem"},
                               {"prior", "builtin:micro-det-1"},
                               {"agent", {{"mode", "fully_rational"}}},
                               {"exact", true},
                               {"seeds", "0..99"}});
    auto b = run_batch(c, ExperimentKind::det_theorem);
    int within = 0, indicator = 0;
    long worst = 0;
    for (const auto& r : b.runs) {
        const auto& s = r.log.summary;
        bool ok = s.phases_to_coverage >= 1 && s.phases_to_coverage <= static_cast<long>(s.reach_size);
        within += ok;
        indicator += s.new_triple_until_coverage;
        worst = std::max(worst, s.phases_to_coverage);
    }
    const int n = static_cast<int>(b.runs.size());
    return {within == 100 && indicator == 100 && n == 100,
            "fully rational agent, n_phase " + std::to_string(b.params.config.n_phase) + ": " + std::to_string(within) + "/" +
                std::to_string(n) + " cover Reach within |Reach| = 6 phases (slowest " + std::to_string(worst) + "), new triple every phase in " +
                std::to_string(indicator) + "/" + std::to_string(n)};
}

// ------------------------------------------------------------ 2

Outcome hygiene() {
    auto t = enumerate_game(det_config(), det_prior<Rational>(), 2);
    Rational worst = 0;
    std::size_t ledgers = 0;
    for (long l = 1; l <= 2; ++l)
        for (auto kind : {HygieneLedger::censored, HygieneLedger::honest}) {
            auto h = hygiene_tv(*t, kind, l);
            worst = std::max(worst, h.max_tv);
            ledgers += h.ledgers;
        }
    auto [p1, l1] = counterexamples::fabricated_rewards<Rational>();
    auto [p2, l2] = counterexamples::policy_selection<Rational>();
    Rational tv1 = hygiene_tv(p1, l1).max_tv, tv2 = hygiene_tv(p2, l2).max_tv;
    bool ok = worst == 0 && tv1 >= Rational(1, 2) && tv2 >= Rational(1, 2);
    return {ok, "max TV " + to_string(worst) + " over " + std::to_string(ledgers) + " censored/honest ledgers (2 phases); fabricated rewards TV " +
                    to_string(tv1) + ", policy selection TV " + to_string(tv2)};
}

// ------------------------------------------------------------ 3

Outcome one_step() {
    auto t = enumerate_game(det_config(), det_prior<Rational>(), 3);
    auto target = sufficiently_visiting_target<Rational>(Rational(1));
    std::size_t realizations = 0, held = 0, violations = 0;
    std::string per;
    for (long l = 2; l <= 3; ++l) {
        auto a = one_step_audit(*t, l, target, AuditOptions{true});
        realizations += a.realizations;
        held += a.condition_held;
        violations += a.violations;
        per += (per.empty() ? "" : ", ") + std::string("phase ") + std::to_string(l) + ": " + std::to_string(a.condition_held) + "/" +
               std::to_string(a.realizations);
    }
    return {violations == 0 && held > 0,
            std::to_string(violations) + " violations; condition held at " + std::to_string(held) + "/" + std::to_string(realizations) +
                " hallucinated ledgers (" + per + ")"};
}

// ------------------------------------------------------------ 4

Outcome p_hal() {
    auto exact = enumerate_game(det_config(), det_prior<Rational>(), 3);
    auto approx = enumerate_game(det_config(), det_prior<double>(), 3);
    std::size_t ledgers = 0, bad = 0;
    Rational min_exact = 1;
    double min_float = 1;
    for (long l = 2; l <= 3; ++l) {
        auto e = p_hal_audit(*exact, l);
        auto f = p_hal_audit(*approx, l);
        ledgers += e.ledgers;
        bad += e.bound_violations + e.method_mismatches + f.method_mismatches;
        min_exact = std::min(min_exact, e.min_slack);
        min_float = std::min(min_float, f.min_slack);
    }
    bool ok = bad == 0 && min_exact >= 0 && min_float >= -1e-12 && ledgers > 0;
    return {ok, std::to_string(ledgers) + " hallucinated ledgers (phases 2-3); min slack exact " + to_string(min_exact) + ", float " +
                    fmt(min_float)};
}

// ------------------------------------------------------------ 5

Outcome distribution() {
    auto t = enumerate_game(det_config(), det_prior<Rational>(), 3);
    Rational worst = 0;
    std::size_t groups = 0;
    for (long l = 1; l <= 3; ++l) {
        auto d = hallucination_distribution_check(*t, l);
        worst = std::max(worst, d.max_tv);
        groups += d.groups;
    }
    OracleOptions bad;
    bad.source = HallucinationSource::unconditioned;
    auto control = hallucination_distribution_check(*enumerate_game(det_config(), det_prior<Rational>(), 2, bad), 2).max_tv;
    return {worst == 0 && control > 0, "max TV " + to_string(worst) + " over " + std::to_string(groups) +
                                           " censored ledgers (3 phases); unconditioned-source control TV " + to_string(control)};
}

// ------------------------------------------------------------ 6

Outcome simulation_lemma() {
    SimLemmaOptions o;
    auto r = simulation_lemma_experiment(0, o);
    std::string by_h;
    for (int h = 1; h <= o.max_H; ++h) by_h += " H=" + std::to_string(h) + ":" + std::to_string(r.violations_by_H[static_cast<std::size_t>(h)]);
    bool ok = r.violations == 0 && r.mrp_failures == 0;
    return {ok, std::to_string(r.pairs - r.violations) + "/" + std::to_string(r.pairs) + " pairs within binom(H,2)*eps (violations" + by_h +
                    "); perf-diff max error " + fmt(r.mrp_max_error) + " on " + std::to_string(r.mrp_pairs) +
                    " MRP pairs; the bound H(H+1)/4*eps that keeps the initial-distribution term is violated " +
                    std::to_string(r.corrected_violations) + " times"};
}

// ------------------------------------------------------------ 7

template <class T>
void occupancy_family(const Prior<T>& P, double& worst, std::size_t& checked) {
    const Dims d = P.dims;
    const int N = d.triples();
    auto policies = enumerate_policies(d);
    for (const auto& m : P.atoms)
        for (const auto& pi : policies) {
            auto paths = brute_paths(m, pi);
            for (int mask = 0; mask < (1 << N); ++mask) {
                TripleSet U(d);
                for (int t = 0; t < N; ++t)
                    if (mask >> t & 1) U.insert(t);
                double sum = 0, brute = 0;
                for (const auto& [t, w] : occupancy_omega(m, pi, U)) sum += to_double(w);
                for (const auto& [tau, p] : paths)
                    if (visits(tau, U)) brute += to_double(p);
                worst = std::max(worst, std::abs(sum - brute));
                ++checked;
            }
        }
}

Outcome occupancy() {
    double worst = 0;
    std::size_t checked = 0;
    occupancy_family(*det_prior<double>(), worst, checked);
    occupancy_family(*stoch_prior<double>(), worst, checked);
    return {worst <= 1e-12, "max |sum_U omega - P[E_U]| = " + fmt(worst) + " over " + std::to_string(checked) +
                                " (model, policy, U) in both micro families"};
}

// ------------------------------------------------------------ 8

Outcome oracle_equivalence() {
    double worst_value = 0;
    std::size_t values = 0;
    for (const auto& P : {det_prior<double>(), stoch_prior<double>()})
        for (const auto& m : P->atoms)
            for (const auto& pi : enumerate_policies(P->dims)) {
                worst_value = std::max(worst_value, std::abs(policy_value(m, pi) - brute_value(m, pi)));
                ++values;
            }
    auto P = stoch_prior<Rational>();
    std::size_t posteriors = 0, mismatches = 0;
    for (const auto& l : one_entry_family(*P, 1)) {
        mismatches += canonical_posterior(P, l).w != brute_posterior(*P, l);
        ++posteriors;
    }
    std::mt19937_64 g(8);
    for (int rep = 0; rep < 60; ++rep) {
        auto raw = random_raw_ledger(g, P->atoms[g() % P->size()], 1 + rep % 3);
        for (const Ledger& l : {raw, censor(raw, random_triples(g, P->dims, 0.5)), totally_censor(raw)}) {
            mismatches += canonical_posterior(P, l).w != brute_posterior(*P, l);
            ++posteriors;
        }
    }
    return {worst_value <= 1e-10 && mismatches == 0,
            "policy_value vs path enumeration max error " + fmt(worst_value) + " over " + std::to_string(values) +
                " (atom, policy); canonical posterior vs brute-force Bayes: " + std::to_string(mismatches) + " exact mismatches in " +
                std::to_string(posteriors) + " Micro-STOCH-1 ledgers"};
}

// ------------------------------------------------------------ 9

ProbInputs small_inputs() {
    ProbInputs in;
    in.rho = 0.5;
    in.q_pun_override = 1.0 / 256;
    return in;
}

MechanismConfig stoch_config(int n_lrn, long phases) {
    MechanismConfig c = prob_parameters(instances::micro_stoch_1(), small_inputs()).config;
    c.n_lrn = n_lrn;
    c.total_phases = phases;
    return c;
}

Outcome probabilistic() {
    auto P = stoch_prior<double>();
    const double delta = 0.1;
    // (a) estimator concentration
    auto ca = stoch_config(64, 200);
    int within = 0, defined_runs = 0;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        CanonicalTruster<double> agent(P);
        auto log = run_game(ca, P, agent, seed);
        auto chk = check_estimators(log, P->atoms[log.summary.truth], ca.n_lrn, delta);
        within += chk.within;
        defined_runs += chk.errors.defined > 0;
    }
    bool a = within >= 450 && defined_runs == 500;
    // (b) good-model mass trend
    const GoodModelTolerances tol{0.4 / 36, 0.1, 0.1};
    std::vector<double> avg;
    for (int n : {1, 4, 16, 64}) {
        auto cb = stoch_config(n, 200);
        double s = 0;
        int got = 0;
        for (std::uint64_t seed = 0; seed < 200; ++seed)
            if (auto m = first_good_mass(cb, P, seed, tol)) {
                s += *m;
                ++got;
            }
        avg.push_back(got ? s / got : 0);
    }
    bool b = true;
    for (std::size_t i = 1; i < avg.size(); ++i) b = b && avg[i] >= avg[i - 1];
    // (c) exploration with overridden small parameters
    auto pr = prob_parameters(instances::micro_stoch_1(), small_inputs());
    MechanismConfig cc = pr.config;
    cc.n_lrn = 4;
    const double L0_small = std::ceil(4.0 * P->dims.triples() * cc.n_lrn / pr.rho_prog);
    cc.total_phases = static_cast<long>(std::min(3 * L0_small, 400.0));
    int explored = 0;
    long slowest = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        CanonicalTruster<double> agent(P);
        GameOptions opt;
        opt.stop_at_coverage = true;
        auto log = run_game(cc, P, agent, seed, opt);
        if (log.summary.phases_to_coverage >= 0) {
            ++explored;
            slowest = std::max(slowest, log.summary.phases_to_coverage);
        }
    }
    bool c = explored >= 95;
    auto theorem = prob_parameters(instances::micro_stoch_1(), ProbInputs{});
    std::string detail = std::string("(a) ") + (a ? "ok " : "no ") + std::to_string(within) + "/500 within eps_r " +
                         fmt(eps_r_bound(delta, 64)) + ", eps_p " + fmt(eps_p_bound(delta, 64, 2)) + "; (b) " + (b ? "ok" : "no") +
                         " mean good mass at n_lrn 1/4/16/64 = " + fmt(avg[0]) + "/" + fmt(avg[1]) + "/" + fmt(avg[2]) + "/" + fmt(avg[3]) +
                         "; (c) " + (c ? "ok " : "no ") + std::to_string(explored) + "/100 explored (rho 1/2, n_lrn 4, n_phase " +
                         std::to_string(cc.n_phase) + ", cap " + std::to_string(cc.total_phases) + " phases, slowest " +
                         std::to_string(slowest) + "); theorem constants n_lrn " + fmt(theorem.n_lrn) + ", L0 " + fmt(theorem.L0) +
                         ", K " + fmt(theorem.K) + " episodes: infeasible";
    return {a && b && c, detail};
}

// ------------------------------------------------------------ 10

Outcome parameters() {
    std::vector<std::string> bad;
    auto det = det_parameters(instances::micro_det_1());
    if (det.eps_pun != Rational(1, 10)) bad.push_back("eps_pun");
    if (det.C != Rational(1, 2)) bad.push_back("C");
    if (det.config.n_phase != 7680) bad.push_back("n_phase");
    for (auto r : {Rational(2, 5), Rational(1, 3), Rational(3, 7)})
        if (det_phase_length(1, 1, r, Rational(1)) != ceil_rational(Rational(6) / r)) bad.push_back("single-triple n_phase");
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); };
    if (!close(eps_r_bound(std::exp(-2.0), 4), 1.0)) bad.push_back("eps_r");
    if (!close(effective_gap(1, 0.4), 0.2)) bad.push_back("Delta0");
    if (!close(progress_rate(0.2, 2), 0.04 / 24)) bad.push_back("rho_prog");
    if (p_hal_bound(Rational(1, 10), Rational(1, 2)) != Rational(2, 11)) bad.push_back("p_hal_bound");
    auto prob = prob_parameters(instances::micro_det_1(), ProbInputs{});
    if (!close(prob.Delta0, 0.2) || !close(prob.rho_prog, 0.04 / 24) || prob.config.n_phase != 15360)
        bad.push_back("prob_parameters Delta0/rho_prog/n_phase");
    std::string detail = "Micro-DET-1 eps_pun " + to_string(det.eps_pun) + ", C " + to_string(det.C) + ", n_phase " +
                         std::to_string(det.config.n_phase) + "; H=1 n_phase = ceil(6/r_min); eps_r(e^-2, 4) = " +
                         fmt(eps_r_bound(std::exp(-2.0), 4)) + "; prob Delta0 " + fmt(prob.Delta0) + ", rho_prog " + fmt(prob.rho_prog) +
                         ", n_phase " + std::to_string(prob.config.n_phase) + "; p_hal_bound(1/10, 1/2) = 2/11";
    for (const auto& b : bad) detail += "; mismatch: " + b;
    return {bad.empty(), detail};
}

}  // namespace

int main() {
    criterion(1, "deterministic exploration", deterministic_exploration);
    criterion(2, "hygiene", hygiene);
    criterion(3, "one-step guarantee", one_step);
    criterion(4, "p_hal bound", p_hal);
    criterion(5, "distribution equality", distribution);
    criterion(6, "simulation lemma", simulation_lemma);
    criterion(7, "occupancy identity", occupancy);
    criterion(8, "oracle equivalence", oracle_equivalence);
    criterion(9, "probabilistic exploration (substitute)", probabilistic);
    criterion(10, "parameter calculators", parameters);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
