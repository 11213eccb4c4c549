#pragma once

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "encoding.hpp"
#include "histories.hpp"
#include "orders.hpp"

namespace causalspace {

// Spaces and their extensions are plain HistorySets. The event set of a
// space is the union of its members' domains unless given explicitly.

inline EventMask space_events(const HistorySet& s) {
    EventMask m = 0;
    s.for_each([&](std::size_t h) { m |= dom(static_cast<History>(h)); });
    return m;
}

// Closure under compatible joins.
inline HistorySet ext(const HistorySet& theta) {
    std::vector<History> members = hset_members(theta);
    std::unordered_set<History> seen(members.begin(), members.end());
    std::vector<History> queue = members;
    for (std::size_t i = 0; i < queue.size(); ++i) {
        History x = queue[i];
        for (History m : members) {
            History j = x | m;
            if (j != x && is_valid_history(j) && seen.insert(j).second) queue.push_back(j);
        }
    }
    return hset(queue);
}

// Members of w that are not the join of the members strictly below them.
inline HistorySet prime(const HistorySet& w) {
    std::vector<History> members = hset_members(w);
    HistorySet out;
    for (History h : members) {
        History below = 0;
        for (History k : members)
            if (k != h && restriction_leq(k, h)) below |= k;
        if (below != h) out.set(h);
    }
    return out;
}

inline bool is_prime_set(const HistorySet& w) { return prime(w) == w; }

// Maximal members under restriction.
inline std::vector<History> max_elements(const HistorySet& w) {
    std::vector<History> members = hset_members(w), out;
    for (History h : members) {
        bool top = true;
        for (History k : members)
            if (k != h && restriction_leq(h, k)) {
                top = false;
                break;
            }
        if (top) out.push_back(h);
    }
    sort_histories(out);
    return out;
}

inline bool is_free_choice(const HistorySet& theta, EventMask events) {
    auto tops = max_elements(ext(theta));
    auto want = max_histories_on(events);
    sort_histories(want);
    return tops == want;
}
inline bool is_free_choice(const HistorySet& theta) { return is_free_choice(theta, space_events(theta)); }

// Events of h not in the domain of any member of theta strictly below h.
inline EventMask tips(const HistorySet& theta, History h, const HistorySet& ext_theta) {
    if (!ext_theta.test(h)) throw std::invalid_argument("tips: history not in Ext of the space");
    EventMask covered = 0;
    theta.for_each([&](std::size_t k) {
        if (k != h && restriction_leq(static_cast<History>(k), h)) covered |= dom(static_cast<History>(k));
    });
    return dom(h) & ~covered;
}
inline EventMask tips(const HistorySet& theta, History h) { return tips(theta, h, ext(theta)); }

inline bool is_causally_complete(const HistorySet& theta) {
    if (!is_free_choice(theta)) throw PreconditionError("causal completeness needs a free-choice space");
    HistorySet e = ext(theta);
    bool ok = true;
    theta.for_each([&](std::size_t h) {
        if (std::popcount(tips(theta, static_cast<History>(h), e)) != 1) ok = false;
    });
    return ok;
}

// Non-throwing variant for filters.
inline bool is_free_choice_and_complete(const HistorySet& theta) {
    return is_free_choice(theta) && is_causally_complete(theta);
}

struct Identification {
    Event event = 0;
    std::vector<History> histories;  // key order
    friend bool operator==(const Identification&, const Identification&) = default;
};

struct TightnessReport {
    bool tight = true;
    std::vector<Identification> identifications;  // by event, then first member
};

namespace detail {
struct UnionFind {
    std::vector<std::size_t> p;
    explicit UnionFind(std::size_t n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    std::size_t find(std::size_t x) {
        while (p[x] != x) x = p[x] = p[p[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) p[std::max(a, b)] = std::min(a, b);
    }
};

// The determining sets D(k, w) for every maximal extended history k and event
// w in dom(k): the members of theta below k that have w as a tip.
template <class F>
void for_each_determining_set(const HistorySet& theta, F&& f) {
    HistorySet e = ext(theta);
    std::vector<History> members = hset_members(theta);
    std::vector<EventMask> tip(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) tip[i] = tips(theta, members[i], e);
    for (History k : max_elements(e))
        for (Event w : mask_events(dom(k))) {
            std::vector<std::size_t> d;
            for (std::size_t i = 0; i < members.size(); ++i)
                if (restriction_leq(members[i], k) && ((tip[i] >> w) & 1u)) d.push_back(i);
            f(k, w, members, d);
        }
}
}  // namespace detail

// Partition of theta into classes of histories on which every causal
// function must agree; each class shares one tip event.
inline std::vector<std::vector<History>> causal_function_classes(const HistorySet& theta) {
    std::vector<History> members = hset_members(theta);
    detail::UnionFind uf(members.size());
    detail::for_each_determining_set(theta, [&](History, Event, const std::vector<History>&,
                                                const std::vector<std::size_t>& d) {
        for (std::size_t i = 1; i < d.size(); ++i) uf.unite(d[0], d[i]);
    });
    std::map<std::size_t, std::vector<History>> groups;
    for (std::size_t i = 0; i < members.size(); ++i) groups[uf.find(i)].push_back(members[i]);
    std::vector<std::vector<History>> out;
    for (auto& [root, g] : groups) {
        sort_histories(g);
        out.push_back(std::move(g));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return history_less(a[0], b[0]); });
    return out;
}

inline TightnessReport tightness(const HistorySet& theta) {
    TightnessReport r;
    detail::for_each_determining_set(theta, [&](History, Event, const std::vector<History>&,
                                                const std::vector<std::size_t>& d) {
        if (d.size() != 1) r.tight = false;
    });
    HistorySet e = ext(theta);
    for (auto& g : causal_function_classes(theta)) {
        if (g.size() < 2) continue;
        EventMask t = tips(theta, g[0], e);
        r.identifications.push_back({std::countr_zero(t), std::move(g)});
    }
    std::stable_sort(r.identifications.begin(), r.identifications.end(),
                     [](const Identification& a, const Identification& b) { return a.event < b.event; });
    return r;
}

// ---------------------------------------------------------------------------
// The refinement lattice. A space refines another when its Ext is larger.

inline bool space_leq(const HistorySet& finer, const HistorySet& coarser) {
    return ext(coarser).is_subset_of(ext(finer));
}

inline HistorySet space_join(const HistorySet& a, const HistorySet& b) { return prime(ext(a) & ext(b)); }
inline HistorySet space_meet(const HistorySet& a, const HistorySet& b) { return prime(ext(a) | ext(b)); }

// ---------------------------------------------------------------------------
// Composition.

inline HistorySet parallel_compose(const HistorySet& a, const HistorySet& b) {
    if (space_events(a) & space_events(b)) throw std::invalid_argument("parallel composition needs disjoint events");
    return a | b;
}

// theta followed by family(k) after each maximal extended history k.
inline HistorySet cond_seq_compose(const HistorySet& theta, const std::function<HistorySet(History)>& family) {
    HistorySet out = theta;
    EventMask ev = space_events(theta);
    for (History k : max_elements(ext(theta))) {
        HistorySet next = family(k);
        if (space_events(next) & ev) throw std::invalid_argument("sequential composition needs disjoint events");
        next.for_each([&](std::size_t h) { out.set(k | static_cast<History>(h)); });
    }
    return out;
}

inline HistorySet cond_seq_compose(const HistorySet& theta, const std::map<History, HistorySet>& family) {
    for (History k : max_elements(ext(theta)))
        if (!family.count(k)) throw std::invalid_argument("conditional composition is missing a maximal history");
    return cond_seq_compose(theta, [&](History k) { return family.at(k); });
}

inline HistorySet seq_compose(const HistorySet& theta, const HistorySet& next) {
    return cond_seq_compose(theta, [&](History) { return next; });
}

// Inductive construction: pick a first event, then a causal switch space on
// the remaining events for each of its inputs.
inline std::vector<HistorySet> causal_switch_spaces(EventMask events) {
    if (!events) return {HistorySet{}};
    std::set<HistorySet> out;
    for (Event w : mask_events(events)) {
        auto rest = causal_switch_spaces(events & ~(1u << w));
        History h0 = History{1} << (2 * w), h1 = History{1} << (2 * w + 1);
        HistorySet first = hset({h0, h1});
        for (const auto& r0 : rest)
            for (const auto& r1 : rest)
                out.insert(cond_seq_compose(first, [&](History k) { return k == h0 ? r0 : r1; }));
    }
    return {out.begin(), out.end()};
}
inline std::vector<HistorySet> causal_switch_spaces(int n) { return causal_switch_spaces(full_mask(n)); }

// Relabels a space through an event map (e goes to perm[e]).
inline HistorySet relabel_space(const HistorySet& s, const std::vector<Event>& perm) {
    HistorySet out;
    s.for_each([&](std::size_t h) {
        History r = 0;
        for (auto [e, v] : history_items(static_cast<History>(h))) r |= History{1} << (2 * perm.at(static_cast<std::size_t>(e)) + v);
        out.set(r);
    });
    return out;
}

// Causal completions: the maximal causally complete refinements of theta.
// `complete` must list every causally complete space on events A.. where the
// count equals the number of events of theta.
inline std::vector<HistorySet> causal_completions(const HistorySet& theta, const std::vector<HistorySet>& complete) {
    if (!is_free_choice(theta)) throw PreconditionError("causal completions need a free-choice space");
    EventMask ev = space_events(theta);
    auto evs = mask_events(ev);
    std::vector<Event> to_compact(kMaxEvents, 0), from_compact(evs.size());
    for (std::size_t i = 0; i < evs.size(); ++i) {
        to_compact[static_cast<std::size_t>(evs[i])] = static_cast<Event>(i);
        from_compact[i] = evs[i];
    }
    HistorySet compact = relabel_space(theta, to_compact);
    HistorySet ext_theta = ext(compact);
    std::vector<HistorySet> below, ext_below;
    for (const auto& s : complete) {
        if (space_events(s) != full_mask(static_cast<int>(evs.size()))) continue;
        HistorySet e = ext(s);
        if (ext_theta.is_subset_of(e)) {
            below.push_back(s);
            ext_below.push_back(std::move(e));
        }
    }
    std::vector<HistorySet> out;
    for (std::size_t i = 0; i < below.size(); ++i) {
        bool maximal = true;
        for (std::size_t j = 0; j < below.size() && maximal; ++j)
            if (i != j && ext_below[j].is_subset_of(ext_below[i]) && ext_below[j] != ext_below[i]) maximal = false;
        if (maximal) out.push_back(relabel_space(below[i], from_compact));
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Literals: a decimal bitvector, or a bracketed list of histories where each
// history is either a single item "A/0" or "<A/0,B/1>".

inline History parse_history(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.size() >= 2 && s.front() == '<' && s.back() == '>') s = s.substr(1, s.size() - 2);
    std::vector<HistoryItem> items;
    std::size_t i = 0;
    while (i < s.size()) {
        if (i + 3 > s.size() || s[i + 1] != '/' || (s[i + 2] != '0' && s[i + 2] != '1'))
            throw std::invalid_argument("bad history literal '" + text + "'");
        items.emplace_back(letter_event(s[i]), s[i + 2] - '0');
        i += 3;
        if (i < s.size()) {
            if (s[i] != ',') throw std::invalid_argument("bad history literal '" + text + "'");
            ++i;
        }
    }
    return history(items);
}

inline HistorySet parse_space(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw std::invalid_argument("empty space literal");
    if (std::isdigit(static_cast<unsigned char>(s[0]))) return BitVec::from_decimal(s);
    if (s.front() != '[' || s.back() != ']') throw std::invalid_argument("bad space literal '" + text + "'");
    s = s.substr(1, s.size() - 2);
    HistorySet out;
    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t j;
        if (s[i] == '<') {
            j = s.find('>', i);
            if (j == std::string::npos) throw std::invalid_argument("unterminated history in '" + text + "'");
            ++j;
        } else {
            j = s.find(',', i);
            if (j == std::string::npos) j = s.size();
        }
        out.set(parse_history(s.substr(i, j - i)));
        i = j;
        if (i < s.size()) {
            if (s[i] != ',') throw std::invalid_argument("bad space literal '" + text + "'");
            ++i;
        }
    }
    return out;
}

inline std::string space_to_string(const HistorySet& s) {
    std::string out = "[";
    bool first = true;
    for (History h : hset_sorted(s)) {
        if (!first) out += ", ";
        first = false;
        out += history_to_string(h);
    }
    return out + "]";
}

}  // namespace causalspace
