#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <deque>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "bitvec.hpp"

namespace causalspace {

// Events are indices 0..25, rendered as letters A..Z.
using Event = int;
using InputValue = int;
using HistoryItem = std::pair<Event, InputValue>;

// A history is a bitvector over item indices 2*event+value. With at most 26
// events there are 52 items, so a history always fits in 64 bits.
using History = std::uint64_t;

// A set of histories, indexed by history value.
using HistorySet = BitVec;

constexpr int kMaxEvents = 26;

inline char event_letter(Event e) {
    if (e < 0 || e >= kMaxEvents) throw std::invalid_argument("event index out of range");
    return static_cast<char>('A' + e);
}
inline Event letter_event(char c) {
    if (c < 'A' || c > 'Z') throw std::invalid_argument(std::string("not an event letter: ") + c);
    return c - 'A';
}

inline int item_index(HistoryItem item) {
    auto [e, v] = item;
    if (e < 0 || e >= kMaxEvents || (v != 0 && v != 1))
        throw std::invalid_argument("invalid history item");
    return 2 * e + v;
}
inline HistoryItem index_item(int idx) {
    if (idx < 0 || idx > 51) throw std::invalid_argument("item index out of range");
    return {idx / 2, idx % 2};
}

// Creates a history from (event, value) pairs; each event may appear once.
inline History history(const std::vector<HistoryItem>& items) {
    History h = 0;
    std::uint32_t seen = 0;
    for (auto it : items) {
        int idx = item_index(it);
        if (seen & (1u << it.first)) throw std::invalid_argument("duplicate event in history");
        seen |= 1u << it.first;
        h |= History{1} << idx;
    }
    return h;
}
inline History history(const std::map<Event, InputValue>& assignment) {
    return history(std::vector<HistoryItem>(assignment.begin(), assignment.end()));
}

// True iff no event carries both values.
inline bool is_valid_history(History h) {
    return ((h & (h >> 1)) & 0x5555555555555555ull) == 0;
}

inline std::vector<HistoryItem> history_items(History h) {
    std::vector<HistoryItem> out;
    while (h) {
        int idx = std::countr_zero(h);
        out.push_back(index_item(idx));
        h &= h - 1;
    }
    return out;
}

// Domain as a bitmask of events.
inline std::uint32_t dom(History h) {
    std::uint64_t m = (h | (h >> 1)) & 0x5555555555555555ull;
    std::uint32_t d = 0;
    while (m) {
        int idx = std::countr_zero(m);
        d |= 1u << (idx / 2);
        m &= m - 1;
    }
    return d;
}
inline int domsize(History h) { return std::popcount(dom(h)); }

inline std::vector<Event> mask_events(std::uint32_t mask) {
    std::vector<Event> out;
    while (mask) {
        out.push_back(std::countr_zero(mask));
        mask &= mask - 1;
    }
    return out;
}

inline std::uint32_t full_mask(int n) { return n >= 32 ? ~0u : ((1u << n) - 1); }

// Value of event e in h; requires e in dom(h).
inline InputValue value_at(History h, Event e) { return static_cast<InputValue>((h >> (2 * e + 1)) & 1u); }

// Restriction of h to the events in mask.
inline History restrict_history(History h, std::uint32_t mask) {
    History m = 0;
    for (Event e : mask_events(mask)) m |= History{3} << (2 * e);
    return h & m;
}

// Histories are sorted first by domain size, then by their item sequence.
// Items are compared as (event, value) pairs, which coincides with the item
// index order.
inline bool history_less(History a, History b) {
    int la = std::popcount(a), lb = std::popcount(b);
    if (la != lb) return la < lb;
    while (a && b) {
        int ia = std::countr_zero(a), ib = std::countr_zero(b);
        if (ia != ib) return ia < ib;
        a &= a - 1;
        b &= b - 1;
    }
    return false;
}

struct HistoryKeyLess {
    bool operator()(History a, History b) const { return history_less(a, b); }
};

inline void sort_histories(std::vector<History>& hs) { std::sort(hs.begin(), hs.end(), history_less); }

// The 2^n total assignments on events A.., with A as most significant input.
inline std::vector<History> max_histories(int n) {
    if (n < 0 || n > kMaxEvents) throw std::invalid_argument("event count out of range");
    if (n > 20) throw std::length_error("too many maximal histories");
    std::vector<History> out;
    out.reserve(std::size_t{1} << n);
    for (std::uint64_t c = 0; c < (std::uint64_t{1} << n); ++c) {
        History h = 0;
        for (int e = 0; e < n; ++e) {
            int v = static_cast<int>((c >> (n - 1 - e)) & 1u);
            h |= History{1} << (2 * e + v);
        }
        out.push_back(h);
    }
    return out;
}

// Total assignments on an arbitrary event mask, in the same order.
inline std::vector<History> max_histories_on(std::uint32_t mask) {
    auto evs = mask_events(mask);
    int n = static_cast<int>(evs.size());
    std::vector<History> out;
    out.reserve(std::size_t{1} << n);
    for (std::uint64_t c = 0; c < (std::uint64_t{1} << n); ++c) {
        History h = 0;
        for (int j = 0; j < n; ++j) {
            int v = static_cast<int>((c >> (n - 1 - j)) & 1u);
            h |= History{1} << (2 * evs[j] + v);
        }
        out.push_back(h);
    }
    return out;
}

// Children remove one event each, last event first.
inline std::vector<History> child_histories(History h) {
    auto items = history_items(h);
    if (items.size() <= 1) return {};
    std::vector<History> out;
    for (std::size_t r = items.size(); r-- > 0;)
        out.push_back(h & ~(History{1} << item_index(items[r])));
    return out;
}

// All sub-histories reachable by removing events, in breadth-first order,
// originals included.
inline std::vector<History> sub_histories(const std::vector<History>& hs) {
    std::unordered_set<History> visited;
    std::deque<History> q(hs.begin(), hs.end());
    std::vector<History> out;
    while (!q.empty()) {
        History h = q.front();
        q.pop_front();
        if (!visited.count(h)) {
            out.push_back(h);
            visited.insert(h);
        }
        for (History k : child_histories(h))
            if (!visited.count(k)) q.push_back(k);
    }
    return out;
}

// Maps each history in hs (and each of their children) to its parents in hs.
inline std::unordered_map<History, std::vector<History>> parents(const std::vector<History>& hs) {
    std::unordered_map<History, std::vector<History>> ps;
    for (History h : hs) ps.try_emplace(h);
    for (History h : hs)
        for (History k : child_histories(h)) {
            auto& v = ps[k];
            if (std::find(v.begin(), v.end(), h) == v.end()) v.push_back(h);
        }
    for (auto& [k, v] : ps) std::sort(v.begin(), v.end());
    return ps;
}

inline std::string history_to_string(History h) {
    std::string s = "<";
    bool first = true;
    for (auto [e, v] : history_items(h)) {
        if (!first) s += ',';
        first = false;
        s += event_letter(e);
        s += '/';
        s += static_cast<char>('0' + v);
    }
    return s + ">";
}

inline HistorySet hset(const std::vector<History>& hs) {
    BitVec b;
    for (History h : hs) b.set(static_cast<std::size_t>(h));
    return b;
}

// Members in numeric order.
inline std::vector<History> hset_members(const HistorySet& s) {
    std::vector<History> out;
    s.for_each([&](std::size_t i) { out.push_back(static_cast<History>(i)); });
    return out;
}

// Members in history_less order.
inline std::vector<History> hset_sorted(const HistorySet& s) {
    auto v = hset_members(s);
    sort_histories(v);
    return v;
}

}  // namespace causalspace
