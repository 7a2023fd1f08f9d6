#pragma once

#include "prior.hpp"

namespace ielab::instances {

// S=A=H=2, start in state 1, action a moves to state a, rewards point masses
// with each triple's value uniform on {0, 4/5} independently.
inline FactoredPrior micro_det_1() {
    const Dims d{2, 2, 2};
    auto sup = make_support({Rational(0), Rational(4, 5)});
    auto m = Model<Rational>::blank(d, sup);
    m.init = {1, 0};
    for (int x = 0; x < 2; ++x)
        for (int a = 0; a < 2; ++a) {
            Rational* p = m.trans.data() + static_cast<std::size_t>(d.triple(x, a, 0)) * 2;
            p[a] = 1;
            // last step: sink
            m.trans[static_cast<std::size_t>(d.triple(x, a, 1)) * 2] = 1;
        }
    for (int t = 0; t < d.triples(); ++t) m.rew[static_cast<std::size_t>(t) * 2] = 1;
    m.finalize();
    FactoredPrior fp;
    fp.transition_atoms = {m};
    fp.transition_weights = {Rational(1)};
    fp.marginals.assign(static_cast<std::size_t>(d.triples()),
                        RewardMarginal{{Rational(0), Rational(4, 5)}, {Rational(1, 2), Rational(1, 2)}});
    fp.family = RewardFamily::point;
    return fp;
}

// S=A=H=2, uniform start, two transition atoms (all-uniform, and
// action-biased at step 1), Bernoulli rewards with mean uniform on {0, 4/5}.
inline FactoredPrior micro_stoch_1() {
    const Dims d{2, 2, 2};
    auto sup = make_support({Rational(0), Rational(1)});
    auto uniform = Model<Rational>::blank(d, sup);
    uniform.init = {Rational(1, 2), Rational(1, 2)};
    for (auto& p : uniform.trans) p = Rational(1, 2);
    for (int t = 0; t < d.triples(); ++t) uniform.rew[static_cast<std::size_t>(t) * 2] = 1;
    uniform.finalize();
    auto biased = uniform;
    for (int x = 0; x < 2; ++x) {
        Rational* p1 = biased.trans.data() + static_cast<std::size_t>(d.triple(x, 0, 0)) * 2;
        p1[0] = Rational(3, 4);
        p1[1] = Rational(1, 4);
        Rational* p2 = biased.trans.data() + static_cast<std::size_t>(d.triple(x, 1, 0)) * 2;
        p2[0] = Rational(1, 4);
        p2[1] = Rational(3, 4);
    }
    biased.finalize();
    FactoredPrior fp;
    fp.transition_atoms = {uniform, biased};
    fp.transition_weights = {Rational(1, 2), Rational(1, 2)};
    fp.marginals.assign(static_cast<std::size_t>(d.triples()),
                        RewardMarginal{{Rational(0), Rational(4, 5)}, {Rational(1, 2), Rational(1, 2)}});
    fp.family = RewardFamily::bernoulli;
    return fp;
}

inline FactoredPrior by_name(const std::string& name) {
    if (name == "micro-det-1") return micro_det_1();
    if (name == "micro-stoch-1") return micro_stoch_1();
    throw InvalidInput("unknown built-in instance '" + name + "'");
}

}  // namespace ielab::instances
