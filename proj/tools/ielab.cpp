#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include <ielab/harness.hpp>

using namespace ielab;

namespace {

enum Exit { ok = 0, infra = 1, assumption = 2, assertion = 3 };

struct CommonFlags {
    std::string config, prior, seed, seeds, out, agent;
    std::vector<std::string> overrides;
    bool exact = false, full_log = false, check = false, as_json = false;
    std::string suite = "all";
};

void add_common(CLI::App* sub, CommonFlags& f) {
    sub->add_option("--config", f.config, "experiment config (JSON) or a run manifest to replay");
    sub->add_option("--prior", f.prior, "builtin:<name> or a prior JSON file; replaces the config prior");
    sub->add_option("--seed", f.seed, "master seed (falls back to IE_SEED)");
    sub->add_option("--seeds", f.seeds, "inclusive seed range a..b");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--override", f.overrides, "config override key=value (dotted keys), repeatable");
    sub->add_option("--agent", f.agent, "canonical_truster or fully_rational");
    sub->add_flag("--exact", f.exact, "exact rational arithmetic");
    sub->add_flag("--full-log", f.full_log, "log every episode, not only hallucination episodes");
}

ExperimentConfig build_config(const CommonFlags& f, ExperimentKind kind, const json& defaults) {
    json src = defaults;
    std::optional<std::uint64_t> manifest_seed;
    std::filesystem::path base;
    if (!f.config.empty()) {
        src = read_json_file(f.config);
        base = std::filesystem::path(f.config).parent_path();
        if (src.contains("tool") && src.contains("config")) {
            if (src.contains("seed")) manifest_seed = src.at("seed").get<std::uint64_t>();
            src = src.at("config");
        }
    }
    src["kind"] = to_string(kind);
    if (!f.prior.empty()) src["prior"] = f.prior;
    if (!f.agent.empty()) src["agent"] = json{{"mode", f.agent}};
    if (f.exact) src["exact"] = true;
    if (f.full_log) src["log"] = "full";
    if (!f.out.empty()) src["out"] = f.out;
    for (const auto& o : f.overrides) apply_override(src, o);
    if (!f.seeds.empty())
        src["seeds"] = f.seeds;
    else if (!f.seed.empty())
        src["seeds"] = f.seed;
    else if (manifest_seed)
        src["seeds"] = *manifest_seed;
    else if (const char* env = std::getenv("IE_SEED"); env && !src.contains("seeds"))
        src["seeds"] = std::string(env);
    return parse_config(src, base);
}

int report_runs(const BatchResult& b, const ExperimentConfig& c, bool check) {
    std::cout << b.csv;
    std::size_t covered = 0, within = 0, indicator = 0;
    for (const auto& r : b.runs) {
        const auto& s = r.log.summary;
        covered += s.phases_to_coverage >= 0;
        within += s.phases_to_coverage >= 0 && s.phases_to_coverage <= static_cast<long>(s.reach_size);
        indicator += s.new_triple_until_coverage;
    }
    const auto n = b.runs.size();
    std::cerr << "runs " << n << ": covered " << covered << ", within |Reach| phases " << within
              << ", new triple every phase until coverage " << indicator << "\n";
    if (!c.out.empty()) std::cerr << "artifacts in " << c.out << "\n";
    if (check && (within != n || indicator != n)) return assertion;
    return ok;
}

int cmd_run(const CommonFlags& f, ExperimentKind kind) {
    json defaults = kind == ExperimentKind::det_theorem
                        ? json{{"prior", "builtin:micro-det-1"}}
                        : json{{"prior", "builtin:micro-stoch-1"}, {"mechanism", {{"n_lrn", 4}, {"total_phases", 200}}}};
    auto c = build_config(f, kind, defaults);
    auto b = run_batch(c, kind);
    return report_runs(b, c, f.check);
}

int cmd_verify(const CommonFlags& f) {
    auto c = build_config(f, ExperimentKind::hygiene, json{{"prior", "builtin:micro-det-1"}, {"exact", true}});
    std::vector<ExperimentKind> suites;
    if (f.suite == "all")
        suites = {ExperimentKind::hygiene, ExperimentKind::one_step, ExperimentKind::distribution, ExperimentKind::p_hal,
                  ExperimentKind::sim_lemma};
    else
        suites = {kind_from_string(f.suite)};
    json all = json::array();
    bool passed = true;
    for (auto k : suites) {
        auto rep = run_verify(c, k);
        passed = passed && rep.passed();
        all.push_back(rep.to_json());
        for (const auto& r : rep.rows)
            std::cerr << (r.pass ? "ok   " : "FAIL ") << rep.suite << " " << r.check << (r.phase ? " phase " + std::to_string(r.phase) : "")
                      << " = " << r.value << " (" << r.threshold << ") " << r.note << "\n";
    }
    json out{{"passed", passed}, {"prior_digest", c.prior.digest()}, {"suites", all}};
    std::cout << out.dump(2) << "\n";
    if (!c.out.empty()) write_text(std::filesystem::path(c.out) / "verify.json", out.dump(2) + "\n");
    return passed ? ok : assertion;
}

int cmd_params(const CommonFlags& f) {
    auto c = build_config(f, ExperimentKind::params, json{{"prior", "builtin:micro-det-1"}});
    auto rep = params_report(c);
    std::string text = f.as_json ? rep.dump(2) + "\n" : params_csv(rep);
    std::cout << text;
    if (!c.out.empty()) write_text(std::filesystem::path(c.out) / (f.as_json ? "params.json" : "params.csv"), text);
    return ok;
}

int cmd_sweep(const CommonFlags& f) {
    auto c = build_config(f, ExperimentKind::sweep, json{{"prior", "builtin:micro-det-1"}});
    const auto& sw = *c.sweep;
    if (is_verify_kind(sw.base) || sw.base == ExperimentKind::params)
        throw InvalidInput("sweep.base must be det-theorem or prob-run");
    std::string csv = "sweep_key,sweep_value," + summary_csv_header();
    for (const auto& v : sw.values) {
        json src = c.snapshot;
        src["kind"] = to_string(sw.base);
        src.erase("sweep");
        apply_override(src, sw.key + "=" + v.dump());
        if (!c.out.empty()) src["out"] = (std::filesystem::path(c.out) / (sw.key + "=" + v.dump())).string();
        auto b = run_batch(parse_config(src), sw.base);
        for (const auto& r : b.runs) csv += sw.key + "," + v.dump() + "," + r.csv_row;
    }
    std::cout << csv;
    if (!c.out.empty()) write_text(std::filesystem::path(c.out) / "sweep.csv", csv);
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ielab: incentivized exploration with hidden hallucination, simulator and verifiers"};
    app.require_subcommand(1);
    CommonFlags f;
    auto* det = app.add_subcommand("run-det", "deterministic-theorem runs with the computed parameters");
    auto* prob = app.add_subcommand("run-prob", "probabilistic runs (override n_lrn/n_phase/total_phases to desk scale)");
    auto* verify = app.add_subcommand("verify", "oracle and lemma verification suites");
    auto* params = app.add_subcommand("params", "parameter calculators");
    auto* sweep = app.add_subcommand("sweep", "repeat a run over the values of one config key");
    for (auto* s : {det, prob, verify, params, sweep}) add_common(s, f);
    for (auto* s : {det, prob}) s->add_flag("--check", f.check, "exit 3 unless every run covers Reach within |Reach| phases");
    verify->add_option("--suite", f.suite, "hygiene|one-step|distribution|p-hal|sim-lemma|all");
    params->add_flag("--json", f.as_json, "JSON instead of CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? ok : infra;
    }
    try {
        if (*det) return cmd_run(f, ExperimentKind::det_theorem);
        if (*prob) return cmd_run(f, ExperimentKind::prob_run);
        if (*verify) return cmd_verify(f);
        if (*params) return cmd_params(f);
        if (*sweep) return cmd_sweep(f);
    } catch (const AssumptionViolated& e) {
        std::cerr << "assumption violated: " << e.what() << "\n";
        return assumption;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return infra;
    }
    return infra;
}
