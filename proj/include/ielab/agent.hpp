#pragma once

#include <memory>
#include <string>
#include <unordered_map>

#include "oracle.hpp"

namespace ielab {

// Sees only the episode index and the revealed ledger; knows the prior and
// the mechanism.
class Agent {
public:
    virtual ~Agent() = default;
    virtual Policy choose(long k, long phase, const Ledger& revealed) = 0;
    virtual AgentMode mode() const = 0;
};

// Bayes-greedy on the canonical posterior of whatever it is shown
template <class T>
class CanonicalTruster final : public Agent {
public:
    explicit CanonicalTruster(PriorPtr<T> prior) : prior_(std::move(prior)) {}

    Policy choose(long, long, const Ledger& revealed) override {
        auto key = revealed.key();
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        Policy pi = bayes_greedy(canonical_posterior(prior_, revealed));
        cache_.emplace(std::move(key), pi);
        return pi;
    }
    AgentMode mode() const override { return AgentMode::canonical_truster; }

private:
    PriorPtr<T> prior_;
    std::unordered_map<std::string, Policy> cache_;
};

// Bayes-greedy on the exact posterior under the whole game, read off the
// oracle's joint table
template <class T>
class FullyRational final : public Agent {
public:
    explicit FullyRational(std::shared_ptr<const JointTable<T>> table) : table_(std::move(table)) {
        if (table_->options().agent != AgentMode::fully_rational)
            throw InvalidInput("fully rational agent needs a table enumerated with fully rational choices");
    }

    Policy choose(long k, long phase, const Ledger& revealed) override {
        if (phase > table_->phases())
            throw OracleUnavailable("oracle enumerated " + std::to_string(table_->phases()) + " phases, phase " +
                                    std::to_string(phase) + " requested");
        T p0 = table_->p0_for(phase, k);
        auto key = revealed.key();
        std::string memo = std::to_string(phase) + (p0 == 1 ? "h" : p0 == 0 ? "o" : "u") + key;
        if (auto it = cache_.find(memo); it != cache_.end()) return table_->policy(it->second);
        std::size_t idx = table_->choose(phase, key, p0);
        cache_.emplace(std::move(memo), idx);
        return table_->policy(idx);
    }
    AgentMode mode() const override { return AgentMode::fully_rational; }
    const JointTable<T>& table() const { return *table_; }

private:
    std::shared_ptr<const JointTable<T>> table_;
    std::unordered_map<std::string, std::size_t> cache_;
};

template <class T>
Posterior<T> mechanism_posterior(const JointTable<T>& table, long k, const Ledger& revealed) {
    return table.mechanism_posterior(k, revealed);
}

}  // namespace ielab
