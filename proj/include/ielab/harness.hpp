#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "io.hpp"

namespace ielab {

enum class ExperimentKind { det_theorem, prob_run, hygiene, one_step, distribution, p_hal, sim_lemma, params, sweep };

inline const std::vector<std::pair<std::string, ExperimentKind>>& experiment_kinds() {
    static const std::vector<std::pair<std::string, ExperimentKind>> k = {
        {"det-theorem", ExperimentKind::det_theorem}, {"prob-run", ExperimentKind::prob_run},
        {"hygiene", ExperimentKind::hygiene},         {"one-step", ExperimentKind::one_step},
        {"distribution", ExperimentKind::distribution}, {"p-hal", ExperimentKind::p_hal},
        {"sim-lemma", ExperimentKind::sim_lemma},     {"params", ExperimentKind::params},
        {"sweep", ExperimentKind::sweep}};
    return k;
}

inline ExperimentKind kind_from_string(const std::string& s) {
    for (const auto& [n, k] : experiment_kinds())
        if (n == s) return k;
    throw InvalidInput("unknown experiment kind '" + s + "'");
}

inline std::string to_string(ExperimentKind k) {
    for (const auto& [n, kk] : experiment_kinds())
        if (kk == k) return n;
    return "?";
}

inline bool is_verify_kind(ExperimentKind k) {
    return k == ExperimentKind::hygiene || k == ExperimentKind::one_step || k == ExperimentKind::distribution ||
           k == ExperimentKind::p_hal || k == ExperimentKind::sim_lemma;
}

// "a..b" inclusive, a single integer, or a JSON list
inline std::vector<std::uint64_t> parse_seeds(const json& j) {
    std::vector<std::uint64_t> out;
    if (j.is_number_unsigned() || j.is_number_integer()) {
        out.push_back(j.get<std::uint64_t>());
    } else if (j.is_array()) {
        for (const auto& v : j) out.push_back(v.get<std::uint64_t>());
    } else if (j.is_string()) {
        auto s = j.get<std::string>();
        auto dots = s.find("..");
        try {
            if (dots == std::string::npos) {
                out.push_back(std::stoull(s));
            } else {
                auto a = std::stoull(s.substr(0, dots)), b = std::stoull(s.substr(dots + 2));
                if (b < a) throw InvalidInput("seed range '" + s + "' is empty");
                if (b - a >= 10'000'000) throw InvalidInput("seed range '" + s + "' is too long");
                for (auto v = a; v <= b; ++v) out.push_back(v);
            }
        } catch (const std::logic_error&) {
            throw InvalidInput("bad seed specification '" + s + "'");
        }
    } else {
        throw InvalidInput("seeds: expected an integer, a list or \"a..b\"");
    }
    if (out.empty()) throw InvalidInput("seeds: empty");
    return out;
}

struct SimLemmaOptions {
    int pairs = 200, mrp_pairs = 100;
    int max_S = 3, max_A = 2, max_H = 3;
};

struct SweepSpec {
    std::string key;  // dotted path into the config, e.g. "mechanism.n_lrn"
    std::vector<json> values;
    ExperimentKind base = ExperimentKind::prob_run;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::det_theorem;
    json prior_json = "builtin:micro-det-1";
    PriorSpec prior = builtin_prior("micro-det-1");
    AgentMode agent = AgentMode::canonical_truster;
    json mechanism = json::object();  // overrides on top of the computed parameters
    ProbInputs prob;
    std::vector<std::uint64_t> seeds{0};
    long oracle_phases = 0;  // 0: kind default
    bool stop_at_coverage = false, incentive_checks = false;
    LogLevel level = LogLevel::hallucination;
    bool exact = false;
    std::string out;
    SimLemmaOptions sim;
    std::optional<SweepSpec> sweep;
    json snapshot;  // the validated source, for manifests
};

// k=v with a dotted key; v is read as JSON when it parses, else as a string
inline void apply_override(json& cfg, const std::string& kv) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw InvalidInput("override '" + kv + "': expected key=value");
    std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
    json v;
    try {
        v = json::parse(val);
    } catch (const json::parse_error&) {
        v = val;
    }
    std::vector<std::string> parts;
    for (std::size_t start = 0;;) {
        auto dot = key.find('.', start);
        parts.push_back(key.substr(start, dot == std::string::npos ? std::string::npos : dot - start));
        if (parts.back().empty()) throw InvalidInput("override '" + kv + "': empty key segment");
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    json* node = &cfg;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!node->contains(parts[i]) || !(*node)[parts[i]].is_object()) (*node)[parts[i]] = json::object();
        node = &(*node)[parts[i]];
    }
    (*node)[parts.back()] = v;
}

inline ExperimentConfig parse_config(const json& src, const std::filesystem::path& base_dir = {}) {
    detail::reject_unknown(src, {"kind", "prior", "agent", "mechanism", "prob", "seeds", "oracle_phases", "stop_at_coverage",
                                 "incentive_checks", "log", "exact", "out", "sim_lemma", "sweep"},
                           "config");
    ExperimentConfig c;
    c.snapshot = src;
    if (src.contains("kind")) c.kind = kind_from_string(src.at("kind").get<std::string>());
    if (src.contains("prior")) {
        json p = src.at("prior");
        if (p.is_string() && p.get<std::string>().rfind("builtin:", 0) != 0) {
            std::filesystem::path path = p.get<std::string>();
            if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
            p = read_json_file(path.string());
        }
        c.prior_json = p;
    }
    c.prior = prior_from_json(c.prior_json);
    if (src.contains("agent")) {
        const json& a = src.at("agent");
        detail::reject_unknown(a, {"mode"}, "config.agent");
        std::string m = a.value("mode", std::string("canonical_truster"));
        if (m == "fully_rational")
            c.agent = AgentMode::fully_rational;
        else if (m != "canonical_truster")
            throw InvalidInput("config.agent.mode: expected canonical_truster or fully_rational");
    }
    if (src.contains("mechanism")) {
        c.mechanism = src.at("mechanism");
        detail::reject_unknown(c.mechanism, {"n_phase", "n_lrn", "eps_pun", "rho", "total_phases"}, "config.mechanism");
    }
    if (src.contains("prob")) {
        const json& p = src.at("prob");
        detail::reject_unknown(p, {"rho", "delta", "q_pun", "r_alt"}, "config.prob");
        c.prob.rho = p.value("rho", 1.0);
        c.prob.delta = p.value("delta", 0.1);
        if (p.contains("q_pun")) c.prob.q_pun_override = p.at("q_pun").get<double>();
        if (p.contains("r_alt")) c.prob.r_alt_override = p.at("r_alt").get<double>();
    }
    if (src.contains("seeds")) c.seeds = parse_seeds(src.at("seeds"));
    c.oracle_phases = src.value("oracle_phases", 0L);
    c.stop_at_coverage = src.value("stop_at_coverage", false);
    c.incentive_checks = src.value("incentive_checks", false);
    if (src.contains("log")) {
        auto l = src.at("log").get<std::string>();
        if (l == "full")
            c.level = LogLevel::full;
        else if (l != "hallucination")
            throw InvalidInput("config.log: expected full or hallucination");
    }
    c.exact = src.value("exact", false);
    c.out = src.value("out", std::string());
    if (src.contains("sim_lemma")) {
        const json& s = src.at("sim_lemma");
        detail::reject_unknown(s, {"pairs", "mrp_pairs", "max_S", "max_A", "max_H"}, "config.sim_lemma");
        c.sim.pairs = s.value("pairs", c.sim.pairs);
        c.sim.mrp_pairs = s.value("mrp_pairs", c.sim.mrp_pairs);
        c.sim.max_S = s.value("max_S", c.sim.max_S);
        c.sim.max_A = s.value("max_A", c.sim.max_A);
        c.sim.max_H = s.value("max_H", c.sim.max_H);
    }
    if (src.contains("sweep")) {
        const json& s = src.at("sweep");
        detail::reject_unknown(s, {"key", "values", "base"}, "config.sweep");
        SweepSpec sw;
        sw.key = detail::need(s, "key", "config.sweep").get<std::string>();
        for (const auto& v : detail::need(s, "values", "config.sweep")) sw.values.push_back(v);
        if (s.contains("base")) sw.base = kind_from_string(s.at("base").get<std::string>());
        if (sw.base == ExperimentKind::sweep) throw InvalidInput("config.sweep.base cannot be sweep");
        c.sweep = sw;
    }
    if (c.kind == ExperimentKind::sweep && !c.sweep) throw InvalidInput("sweep experiments need a 'sweep' block");
    return c;
}

// A manifest is accepted wherever a config is: its snapshot and seed are replayed.
inline ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
    json src = read_json_file(path);
    std::optional<std::uint64_t> manifest_seed;
    if (src.contains("tool") && src.contains("config")) {
        if (src.contains("seed")) manifest_seed = src.at("seed").get<std::uint64_t>();
        src = src.at("config");
    }
    for (const auto& o : overrides) apply_override(src, o);
    auto c = parse_config(src, std::filesystem::path(path).parent_path());
    if (manifest_seed) c.seeds = {*manifest_seed};
    return c;
}

// ------------------------------------------------------------ mechanism parameters

struct ResolvedParameters {
    MechanismConfig config;
    std::optional<DetReport> det;
    std::optional<ProbReport> prob;
};

inline void apply_mechanism_overrides(MechanismConfig& m, const json& o) {
    if (o.contains("n_phase")) m.n_phase = o.at("n_phase").get<long>();
    if (o.contains("n_lrn")) m.n_lrn = o.at("n_lrn").get<int>();
    if (o.contains("eps_pun")) m.eps_pun = rational_from_json(o.at("eps_pun"), "mechanism.eps_pun");
    if (o.contains("rho")) m.rho = rational_from_json(o.at("rho"), "mechanism.rho");
    if (o.contains("total_phases")) m.total_phases = o.at("total_phases").get<long>();
}

inline ResolvedParameters resolve_parameters(const ExperimentConfig& c, ExperimentKind kind) {
    ResolvedParameters r;
    if (kind == ExperimentKind::prob_run) {
        r.prob = c.prior.prob(c.prob);
        r.config = r.prob->config;
    } else {
        bool complete = c.mechanism.contains("n_phase") && c.mechanism.contains("n_lrn") && c.mechanism.contains("eps_pun");
        try {
            r.det = c.prior.det();
            r.config = r.det->config;
        } catch (const AssumptionViolated&) {
            if (!complete) throw;
            r.config.total_phases = c.prior.dims().triples();
        }
    }
    apply_mechanism_overrides(r.config, c.mechanism);
    r.config.validate();
    return r;
}

// ------------------------------------------------------------ runs

struct RunOutput {
    GameLog log;
    std::string jsonl, ledger_jsonl, csv_row;
    json manifest;
};

inline json make_manifest(const ExperimentConfig& c, const MechanismConfig& m, std::uint64_t seed) {
    return json{{"tool", "ielab"},          {"version", kToolVersion},
                {"config", c.snapshot},     {"seed", seed},
                {"prior_digest", c.prior.digest()}, {"mechanism", config_to_json(m)},
                {"exact", c.exact}};
}

template <class T>
RunOutput run_one(const ExperimentConfig& c, const MechanismConfig& m, const PriorPtr<T>& prior, Agent& agent,
                  std::uint64_t seed, const GameOptions& extra = {}) {
    GameOptions opt = extra;
    opt.level = c.level;
    opt.stop_at_coverage = c.stop_at_coverage;
    opt.incentive_checks = opt.incentive_checks || c.incentive_checks;
    RunOutput o;
    o.log = run_game(m, prior, agent, seed, opt);
    o.jsonl = game_log_jsonl(o.log, *prior->support);
    o.ledger_jsonl = ledger_to_jsonl(o.log.raw, *prior->support);
    o.csv_row = summary_csv_row(o.log, prior->atoms[o.log.summary.truth]);
    o.manifest = make_manifest(c, m, seed);
    return o;
}

inline void write_text(const std::filesystem::path& p, const std::string& s) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw InvalidInput("cannot write '" + p.string() + "'");
    f << s;
    if (!f) throw InvalidInput("write failed for '" + p.string() + "'");
}

// <out>/seed-<s>/{manifest.json, game.jsonl, ledger.jsonl}
inline void write_run(const std::filesystem::path& out, const RunOutput& r) {
    auto dir = out / ("seed-" + std::to_string(r.log.seed));
    write_text(dir / "manifest.json", r.manifest.dump(2) + "\n");
    write_text(dir / "game.jsonl", r.jsonl);
    write_text(dir / "ledger.jsonl", r.ledger_jsonl);
}

struct BatchResult {
    ResolvedParameters params;
    std::vector<RunOutput> runs;
    std::string csv;
};

template <class T>
BatchResult run_batch_as(const ExperimentConfig& c, ExperimentKind kind) {
    BatchResult b;
    b.params = resolve_parameters(c, kind);
    const auto& m = b.params.config;
    if (m.total_phases > 1'000'000)
        throw CapExceeded("total_phases = " + std::to_string(m.total_phases) + " is beyond desk scale; override mechanism.total_phases");
    auto prior = c.prior.build<T>();
    std::shared_ptr<const JointTable<Rational>> table;
    if (c.agent == AgentMode::fully_rational)
        table = enumerate_game(m, c.prior.build<Rational>(), m.total_phases, OracleOptions{AgentMode::fully_rational});
    b.csv = summary_csv_header();
    for (auto seed : c.seeds) {
        std::unique_ptr<Agent> agent;
        if (table)
            agent = std::make_unique<FullyRational<Rational>>(table);
        else
            agent = std::make_unique<CanonicalTruster<T>>(prior);
        try {
            b.runs.push_back(run_one(c, m, prior, *agent, seed));
        } catch (const AssumptionViolated& e) {
            throw AssumptionViolated(std::string(e.what()) + " [" + to_string(kind) + ", seed " + std::to_string(seed) + "]");
        } catch (const ZeroEvidence& e) {
            throw ZeroEvidence(std::string(e.what()) + " [" + to_string(kind) + ", seed " + std::to_string(seed) + "]");
        }
        b.csv += b.runs.back().csv_row;
    }
    if (!c.out.empty()) {
        for (const auto& r : b.runs) write_run(c.out, r);
        write_text(std::filesystem::path(c.out) / "summary.csv", b.csv);
    }
    return b;
}

inline BatchResult run_batch(const ExperimentConfig& c, ExperimentKind kind) {
    return c.exact ? run_batch_as<Rational>(c, kind) : run_batch_as<double>(c, kind);
}

// ------------------------------------------------------------ parameter table

inline json params_report(const ExperimentConfig& c) {
    json j;
    j["prior_digest"] = c.prior.digest();
    auto d = c.prior.dims();
    j["dims"] = json{{"S", d.S}, {"A", d.A}, {"H", d.H}};
    try {
        auto r = c.prior.det();
        j["det"] = json{{"eps_pun", rational_to_json(r.eps_pun)}, {"r_min", rational_to_json(r.r_min)}, {"C", rational_to_json(r.C)},
                        {"n_phase", r.config.n_phase}, {"n_lrn", r.config.n_lrn}, {"total_phases", r.config.total_phases}};
    } catch (const AssumptionViolated& e) {
        j["det"] = json{{"unavailable", e.what()}};
    }
    ProbReport p;
    try {
        p = c.prior.prob(c.prob);
    } catch (const AssumptionViolated& e) {
        j["prob"] = json{{"unavailable", e.what()}};
        return j;
    }
    j["prob"] = json{{"rho", p.rho},
                     {"delta", p.delta},
                     {"eps_pun", p.eps_pun},
                     {"n_phase", p.n_phase},
                     {"n_lrn", p.n_lrn},
                     {"K", p.K},
                     {"L0", p.L0},
                     {"Delta0", p.Delta0},
                     {"rho0", p.rho0},
                     {"rho_prog", p.rho_prog},
                     {"eps_r", p.eps_r},
                     {"eps_p", p.eps_p},
                     {"delta0", p.delta0},
                     {"delta_fail", p.delta_fail},
                     {"n0", p.n0},
                     {"iota", p.iota},
                     {"q_pun", p.q_pun},
                     {"r_alt", p.r_alt},
                     {"q_pun_source", p.q_pun_overridden ? "override" : "independence-reduced"},
                     {"r_alt_source", p.independence_reduction ? "independence-reduced" : "override"}};
    return j;
}

inline std::string params_csv(const json& rep) {
    std::string s = "mode,parameter,value\n";
    for (const char* mode : {"det", "prob"})
        for (auto it = rep.at(mode).begin(); it != rep.at(mode).end(); ++it)
            s += std::string(mode) + "," + it.key() + "," + (it.value().is_string() ? it.value().get<std::string>() : it.value().dump()) + "\n";
    return s;
}

// ------------------------------------------------------------ verification suites

struct VerifyRow {
    std::string check;
    long phase = 0;
    double value = 0;
    std::string threshold;
    bool pass = false;
    std::string note;
};

struct VerifyReport {
    std::string suite;
    std::vector<VerifyRow> rows;
    bool passed() const {
        for (const auto& r : rows)
            if (!r.pass) return false;
        return !rows.empty();
    }
    json to_json() const {
        json rs = json::array();
        for (const auto& r : rows)
            rs.push_back(json{{"check", r.check}, {"phase", r.phase}, {"value", r.value}, {"threshold", r.threshold},
                              {"pass", r.pass}, {"note", r.note}});
        return json{{"suite", suite}, {"passed", passed()}, {"rows", rs}};
    }
};

template <class T>
std::shared_ptr<const JointTable<T>> suite_table(const ExperimentConfig& c, long phases) {
    auto params = resolve_parameters(c, ExperimentKind::hygiene);
    OracleOptions opt;
    opt.agent = c.agent;
    return enumerate_game(params.config, c.prior.build<T>(), phases, opt);
}

template <class T>
VerifyReport verify_hygiene(const ExperimentConfig& c) {
    VerifyReport rep{"hygiene", {}};
    const long L = c.oracle_phases > 0 ? c.oracle_phases : 2;
    auto table = suite_table<T>(c, L);
    for (long l = 1; l <= L; ++l)
        for (auto [kind, name] : {std::pair{HygieneLedger::censored, "censored"}, std::pair{HygieneLedger::honest, "honest"}}) {
            auto h = hygiene_tv(*table, kind, l);
            rep.rows.push_back({std::string("tv_") + name, l, to_double(h.max_tv), "== 0", h.max_tv == 0,
                                std::to_string(h.ledgers) + " ledgers"});
        }
    auto [p1, l1] = counterexamples::fabricated_rewards<T>();
    auto [p2, l2] = counterexamples::policy_selection<T>();
    T tv1 = hygiene_tv(p1, l1).max_tv, tv2 = hygiene_tv(p2, l2).max_tv;
    rep.rows.push_back({"tv_fabricated_rewards", 0, to_double(tv1), ">= 1/2", !(tv1 < T(1) / 2), "negative control"});
    rep.rows.push_back({"tv_policy_selection", 0, to_double(tv2), ">= 1/2", !(tv2 < T(1) / 2), "negative control"});
    return rep;
}

template <class T>
VerifyReport verify_one_step(const ExperimentConfig& c) {
    VerifyReport rep{"one-step", {}};
    const long L = c.oracle_phases > 0 ? c.oracle_phases : 4;
    auto table = suite_table<T>(c, L);
    const T rho0 = from_rational<T>(Rational(1));
    for (long l = 1; l <= L; ++l) {
        auto a = one_step_audit(*table, l, sufficiently_visiting_target<T>(rho0), AuditOptions{true});
        rep.rows.push_back({"violations", l, static_cast<double>(a.violations), "== 0", a.passed(),
                            std::to_string(a.realizations) + " realizations, " + std::to_string(a.condition_held) +
                                " with the condition, " + std::to_string(a.degenerate) + " degenerate"});
    }
    return rep;
}

template <class T>
VerifyReport verify_distribution(const ExperimentConfig& c) {
    VerifyReport rep{"distribution", {}};
    const long L = c.oracle_phases > 0 ? c.oracle_phases : 3;
    auto table = suite_table<T>(c, L);
    for (long l = 1; l <= L; ++l) {
        auto d = hallucination_distribution_check(*table, l);
        rep.rows.push_back({"tv_honest_vs_hallucinated", l, to_double(d.max_tv), "== 0", d.max_tv == 0,
                            std::to_string(d.groups) + " censored ledgers"});
    }
    return rep;
}

template <class T>
VerifyReport verify_p_hal(const ExperimentConfig& c) {
    VerifyReport rep{"p-hal", {}};
    const long L = c.oracle_phases > 0 ? c.oracle_phases : 3;
    auto table = suite_table<T>(c, L);
    for (long l = 1; l <= L; ++l) {
        if (table->config().initial_phase(l)) continue;
        auto p = p_hal_audit(*table, l);
        bool ok = p.bound_violations == 0 && p.method_mismatches == 0;
        rep.rows.push_back({"p_hal_bound_slack", l, to_double(p.min_slack), ">= 0", ok,
                            std::to_string(p.ledgers) + " ledgers, " + std::to_string(p.method_mismatches) + " method mismatches"});
    }
    return rep;
}

// ------------------------------------------------------------ random similar pairs

struct SimilarPair {
    Model<double> model, star;
    TripleSet U;
    std::vector<double> rt;
    Policy pi;
    double eps = 0;
};

namespace detail {

inline std::vector<double> random_distribution(RngStream& rng, int n) {
    std::vector<double> p(static_cast<std::size_t>(n));
    double s = 0;
    for (auto& v : p) s += (v = -std::log(1.0 - rng.uniform()));
    for (auto& v : p) v /= s;
    return p;
}

// move p toward a random q by at most eps in l1
inline void perturb(RngStream& rng, double* p, int n, double eps) {
    auto q = random_distribution(rng, n);
    double d = 0;
    for (int i = 0; i < n; ++i) d += std::abs(q[static_cast<std::size_t>(i)] - p[i]);
    if (d <= 0) return;
    double lam = std::min(1.0, eps * (1 - 1e-9) / d) * rng.uniform();
    for (int i = 0; i < n; ++i) p[i] = (1 - lam) * p[i] + lam * q[static_cast<std::size_t>(i)];
}

}  // namespace detail

// eps-similar off U: init and every transition outside U within eps in l1;
// transitions on U are unrelated
inline SimilarPair random_similar_pair(RngStream& rng, const SimLemmaOptions& o) {
    Dims d{1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(o.max_S))),
           1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(o.max_A))),
           1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(o.max_H)))};
    auto sup = make_support({Rational(0)});
    auto star = Model<double>::blank(d, sup);
    star.init = detail::random_distribution(rng, d.S);
    for (int t = 0; t < d.triples(); ++t) {
        auto p = detail::random_distribution(rng, d.S);
        std::copy(p.begin(), p.end(), star.trans.begin() + static_cast<std::ptrdiff_t>(t) * d.S);
        star.rew[static_cast<std::size_t>(t)] = 1;
    }
    SimilarPair sp{star, star, TripleSet(d), {}, Policy(d), 0.05 + 0.45 * rng.uniform()};
    for (int t = 0; t < d.triples(); ++t)
        if (rng.uniform() < 1.0 / 3) sp.U.insert(t);
    detail::perturb(rng, sp.model.init.data(), d.S, sp.eps);
    for (int t = 0; t < d.triples(); ++t) {
        double* p = sp.model.trans.data() + static_cast<std::size_t>(t) * d.S;
        if (sp.U.contains(t)) {
            auto q = detail::random_distribution(rng, d.S);
            std::copy(q.begin(), q.end(), p);
        } else {
            detail::perturb(rng, p, d.S, sp.eps);
        }
    }
    sp.model.finalize();
    sp.star.finalize();
    sp.rt.resize(static_cast<std::size_t>(d.triples()));
    for (auto& r : sp.rt) r = rng.uniform();
    for (auto& a : sp.pi.act) a = static_cast<int>(rng.below(static_cast<std::uint64_t>(d.A)));
    return sp;
}

inline std::pair<MRP<double>, MRP<double>> random_mrp_pair(RngStream& rng, int max_S, int max_H) {
    MRP<double> a;
    a.S = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_S)));
    a.H = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_H)));
    a.reward.resize(static_cast<std::size_t>(a.S * a.H));
    for (auto& r : a.reward) r = rng.uniform();
    MRP<double> b = a;
    for (MRP<double>* m : {&a, &b}) {
        m->init = detail::random_distribution(rng, a.S);
        m->trans.clear();
        for (int i = 0; i < (a.H - 1) * a.S; ++i) {
            auto p = detail::random_distribution(rng, a.S);
            m->trans.insert(m->trans.end(), p.begin(), p.end());
        }
    }
    return {a, b};
}

struct SimLemmaResult {
    int pairs = 0, violations = 0, corrected_violations = 0;
    double worst_ratio = 0;  // max lhs / (C(H,2) eps), over pairs with H >= 2
    int mrp_pairs = 0, mrp_failures = 0;
    double mrp_max_error = 0;
    std::vector<int> violations_by_H;  // index H
};

// C(H+1,2) eps / 2 includes the initial-distribution term of the
// performance-difference decomposition
inline double corrected_simulation_bound(int H, double eps) { return H * (H + 1) / 4.0 * eps; }

inline SimLemmaResult simulation_lemma_experiment(std::uint64_t seed, const SimLemmaOptions& o) {
    SimLemmaResult r;
    r.violations_by_H.assign(static_cast<std::size_t>(o.max_H) + 1, 0);
    RngStream rng(seed, "sim-lemma:pairs");
    for (int i = 0; i < o.pairs; ++i) {
        auto sp = random_similar_pair(rng, o);
        auto g = simulation_gap(sp.model, sp.star, sp.U, sp.rt, sp.pi, sp.eps);
        ++r.pairs;
        const int H = sp.star.H();
        if (g.lhs > g.bound + 1e-12) {
            ++r.violations;
            ++r.violations_by_H[static_cast<std::size_t>(H)];
        }
        if (g.lhs > corrected_simulation_bound(H, sp.eps) + 1e-12) ++r.corrected_violations;
        if (g.bound > 0) r.worst_ratio = std::max(r.worst_ratio, g.lhs / g.bound);
    }
    RngStream mrng(seed, "sim-lemma:mrp");
    for (int i = 0; i < o.mrp_pairs; ++i) {
        auto [a, b] = random_mrp_pair(mrng, o.max_S, o.max_H + 1);
        auto pd = performance_difference(a, b);
        double err = std::abs(pd.lhs - pd.rhs());
        ++r.mrp_pairs;
        r.mrp_max_error = std::max(r.mrp_max_error, err);
        if (!(err <= 1e-10)) ++r.mrp_failures;
    }
    return r;
}

inline VerifyReport verify_sim_lemma(const ExperimentConfig& c) {
    VerifyReport rep{"sim-lemma", {}};
    auto r = simulation_lemma_experiment(c.seeds.front(), c.sim);
    rep.rows.push_back({"binom(H,2)*eps violations", 0, static_cast<double>(r.violations), "== 0", r.violations == 0,
                        std::to_string(r.pairs) + " pairs"});
    rep.rows.push_back({"perf-diff identity max error", 0, r.mrp_max_error, "<= 1e-10", r.mrp_failures == 0,
                        std::to_string(r.mrp_pairs) + " MRP pairs"});
    VerifyRow info{"(H+1)H/4*eps violations", 0, static_cast<double>(r.corrected_violations), "informational", true,
                   "bound with the initial-distribution term"};
    rep.rows.push_back(info);
    return rep;
}

inline VerifyReport run_verify(const ExperimentConfig& c, ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::hygiene: return c.exact ? verify_hygiene<Rational>(c) : verify_hygiene<double>(c);
        case ExperimentKind::one_step: return c.exact ? verify_one_step<Rational>(c) : verify_one_step<double>(c);
        case ExperimentKind::distribution: return c.exact ? verify_distribution<Rational>(c) : verify_distribution<double>(c);
        case ExperimentKind::p_hal: return c.exact ? verify_p_hal<Rational>(c) : verify_p_hal<double>(c);
        case ExperimentKind::sim_lemma: return verify_sim_lemma(c);
        default: throw InvalidInput("'" + to_string(kind) + "' is not a verification suite");
    }
}

// ------------------------------------------------------------ probabilistic-run metrics

struct EstimatorCheck {
    EstimatorErrors errors;
    double eps_r = 0, eps_p = 0;
    bool within = false;
};

inline EstimatorCheck check_estimators(const GameLog& log, const Model<double>& truth, int n_lrn, double delta) {
    EstimatorCheck c;
    auto est = empirical_estimators(log.raw, n_lrn, *truth.support);
    c.errors = estimator_errors(est, truth);
    c.eps_r = eps_r_bound(delta, n_lrn);
    c.eps_p = eps_p_bound(delta, n_lrn, truth.S());
    c.within = c.errors.reward <= c.eps_r && c.errors.transition <= c.eps_p;
    return c;
}

// canonical good-model mass at the first hallucinated ledger with a fully
// explored triple; nullopt if no phase got there
template <class T>
std::optional<double> first_good_mass(const MechanismConfig& cfg, const PriorPtr<T>& prior, std::uint64_t seed,
                                      const GoodModelTolerances& tol) {
    std::optional<double> out;
    RngStream truth_rng(seed, streams::truth());
    const std::size_t truth = truth_rng.pick(prior->weights);
    CanonicalTruster<T> agent(prior);
    GameOptions opt;
    opt.truth = truth;
    opt.on_phase = [&](const PhaseRecord& rec, const Ledger& hal) {
        if (rec.U.size() == static_cast<std::size_t>(prior->dims.triples())) return true;
        out = to_double(good_mass(canonical_posterior(prior, hal), prior->atoms[truth], rec.U, tol));
        return false;
    };
    run_game(cfg, prior, agent, seed, opt);
    return out;
}

}  // namespace ielab
