#pragma once

// Brute-force reference implementations used only by tests. These stay
// deliberately naive and independent of the library's consensus code paths:
// plain hand-count loops over explicit data, exact rational arithmetic.

#include "delib/core/fraction.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using delib::core::Fraction;

// agent id -> policy set, already canonical
using PolicyInstance = std::map<std::string, std::vector<std::string>>;

inline Fraction agreement(const std::string& policy, const PolicyInstance& instance) {
    std::int64_t holders = 0;
    for (const auto& [agent, policies] : instance) {
        bool found = false;
        for (const auto& p : policies) {
            if (p == policy) found = true;
        }
        if (found) ++holders;
    }
    return Fraction(holders, static_cast<std::int64_t>(instance.size()));
}

inline std::vector<std::pair<std::string, Fraction>> accepted(const PolicyInstance& instance,
                                                              const Fraction& theta) {
    std::set<std::string> uniq;
    for (const auto& [agent, policies] : instance) {
        for (const auto& p : policies) uniq.insert(p);
    }
    std::vector<std::pair<std::string, Fraction>> out;
    for (const auto& p : uniq) {
        Fraction level = agreement(p, instance);
        if (level >= theta) out.emplace_back(p, level);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

inline Fraction confidence(const PolicyInstance& instance, const Fraction& theta) {
    auto acc = accepted(instance, theta);
    if (acc.empty()) return Fraction(0);
    Fraction sum(0);
    for (const auto& [policy, level] : acc) sum += level;
    return sum / Fraction(static_cast<std::int64_t>(acc.size()));
}

// agent id -> canonical value ("" = abstention); unanimity by exhaustive
// pairwise comparison
inline bool unanimous(const std::map<std::string, std::string>& values) {
    if (values.empty()) return false;
    for (const auto& [a, va] : values) {
        if (va.empty()) return false;
        for (const auto& [b, vb] : values) {
            if (va != vb) return false;
        }
    }
    return true;
}

}  // namespace oracle
