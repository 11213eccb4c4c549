#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "encoding.hpp"

namespace causalspace {

// Element of the event-input permutation group on events A..: event i goes
// to event_perm[i] and its value is XOR-ed with flips[i].
struct PermGroupEl {
    std::vector<Event> event_perm;
    std::vector<InputValue> flips;
    friend bool operator==(const PermGroupEl&, const PermGroupEl&) = default;
};

// All n!*2^n elements: event permutations in lexicographic order, with the
// flip vectors (last event fastest) nested inside.
inline std::vector<PermGroupEl> iter_perm_group(int n) {
    if (n < 0 || n > 8) throw std::invalid_argument("permutation group too large");
    std::vector<PermGroupEl> out;
    std::vector<Event> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    do {
        for (std::uint32_t c = 0; c < (1u << n); ++c) {
            PermGroupEl g{perm, std::vector<InputValue>(static_cast<std::size_t>(n))};
            for (int i = 0; i < n; ++i) g.flips[static_cast<std::size_t>(i)] = static_cast<int>((c >> (n - 1 - i)) & 1u);
            out.push_back(std::move(g));
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

inline History permute_history(History h, const PermGroupEl& g) {
    History out = 0;
    for (auto [e, v] : history_items(h)) {
        if (e >= static_cast<int>(g.event_perm.size())) throw std::invalid_argument("history outside the group's events");
        auto i = static_cast<std::size_t>(e);
        out |= History{1} << (2 * g.event_perm[i] + (v ^ g.flips[i]));
    }
    return out;
}

// Cached group elements together with the action on every history value
// below 4^n.
class PermGroup {
public:
    explicit PermGroup(int n) : n_(n), els_(iter_perm_group(n)) {
        if (n > 5) throw std::invalid_argument("history permutation table limited to 5 events");
        std::size_t nh = std::size_t{1} << (2 * n);
        table_.resize(els_.size() * nh);
        for (std::size_t gi = 0; gi < els_.size(); ++gi)
            for (std::size_t h = 0; h < nh; ++h)
                table_[gi * nh + h] = is_valid_history(h) ? permute_history(h, els_[gi]) : 0;
    }

    int num_events() const { return n_; }
    std::size_t size() const { return els_.size(); }
    const PermGroupEl& operator[](std::size_t i) const { return els_[i]; }
    const std::vector<PermGroupEl>& elements() const { return els_; }

    History apply(std::size_t gi, History h) const { return table_[gi * (std::size_t{1} << (2 * n_)) + h]; }

    HistorySet apply(std::size_t gi, const HistorySet& s) const {
        HistorySet out;
        s.for_each([&](std::size_t h) { out.set(apply(gi, static_cast<History>(h))); });
        return out;
    }

private:
    int n_;
    std::vector<PermGroupEl> els_;
    std::vector<History> table_;
};

// Distinct images of a history set, in ascending numeric order.
inline std::vector<HistorySet> orbit(const HistorySet& s, const PermGroup& g) {
    std::set<HistorySet> seen;
    for (std::size_t i = 0; i < g.size(); ++i) seen.insert(g.apply(i, s));
    return {seen.begin(), seen.end()};
}

// Indices of the group elements fixing s, in encounter order.
inline std::vector<std::size_t> stabiliser(const HistorySet& s, const PermGroup& g) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g.apply(i, s) == s) out.push_back(i);
    return out;
}
inline std::vector<std::size_t> stabiliser(History h, const PermGroup& g) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g.apply(i, h) == h) out.push_back(i);
    return out;
}

// Numerically smallest member of the orbit.
inline HistorySet canonical_rep(const HistorySet& s, const PermGroup& g) {
    HistorySet best = s;
    for (std::size_t i = 0; i < g.size(); ++i) {
        HistorySet t = g.apply(i, s);
        if (t < best) best = std::move(t);
    }
    return best;
}

}  // namespace causalspace
