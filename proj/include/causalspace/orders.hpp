#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "encoding.hpp"

namespace causalspace {

using EventMask = std::uint32_t;

// A preorder on a set of events. down[e] holds every event below or equal
// to e; entries for events outside the set are zero.
struct CausalOrder {
    EventMask events = 0;
    std::array<EventMask, kMaxEvents> down{};

    friend bool operator==(const CausalOrder&, const CausalOrder&) = default;
};

enum class CausalRelation { Precedes, Succeeds, Unrelated, Indefinite };

inline const char* to_string(CausalRelation r) {
    switch (r) {
        case CausalRelation::Precedes: return "precedes";
        case CausalRelation::Succeeds: return "succeeds";
        case CausalRelation::Unrelated: return "unrelated";
        case CausalRelation::Indefinite: return "indefinite";
    }
    return "?";
}

namespace detail {
inline void check_event(const CausalOrder& o, Event e) {
    if (e < 0 || e >= kMaxEvents || !((o.events >> e) & 1u)) throw std::invalid_argument("event not in the order");
}

// Floyd-Warshall style closure on the down-set representation.
inline void close_transitively(CausalOrder& o) {
    for (Event k : mask_events(o.events))
        for (Event e : mask_events(o.events))
            if ((o.down[static_cast<std::size_t>(e)] >> k) & 1u)
                o.down[static_cast<std::size_t>(e)] |= o.down[static_cast<std::size_t>(k)];
}
}  // namespace detail

inline bool is_valid_order(const CausalOrder& o) {
    for (Event e = 0; e < kMaxEvents; ++e) {
        EventMask d = o.down[static_cast<std::size_t>(e)];
        if (!((o.events >> e) & 1u)) {
            if (d) return false;
            continue;
        }
        if (!((d >> e) & 1u) || (d & ~o.events)) return false;
        for (Event k : mask_events(d))
            if (o.down[static_cast<std::size_t>(k)] & ~d) return false;
    }
    return true;
}

// Builds the reflexive-transitive closure of the given pairs (lo <= hi).
inline CausalOrder order_from_relations(EventMask events, const std::vector<std::pair<Event, Event>>& lo_hi) {
    CausalOrder o;
    o.events = events;
    for (Event e : mask_events(events)) o.down[static_cast<std::size_t>(e)] = 1u << e;
    for (auto [lo, hi] : lo_hi) {
        detail::check_event(o, lo);
        detail::check_event(o, hi);
        o.down[static_cast<std::size_t>(hi)] |= 1u << lo;
    }
    detail::close_transitively(o);
    return o;
}

inline CausalOrder discrete_order(EventMask events) { return order_from_relations(events, {}); }

inline CausalOrder indiscrete_order(EventMask events) {
    CausalOrder o;
    o.events = events;
    for (Event e : mask_events(events)) o.down[static_cast<std::size_t>(e)] = events;
    return o;
}

// A chain of groups; events in the same group are causally equivalent.
inline CausalOrder total_order(const std::vector<EventMask>& groups) {
    CausalOrder o;
    EventMask below = 0;
    for (EventMask g : groups) {
        if (!g || (g & o.events)) throw std::invalid_argument("total order groups must be non-empty and disjoint");
        o.events |= g;
        below |= g;
        for (Event e : mask_events(g)) o.down[static_cast<std::size_t>(e)] = below;
    }
    return o;
}

inline CausalOrder total_order(const std::vector<Event>& chain) {
    std::vector<EventMask> groups;
    for (Event e : chain) groups.push_back(1u << e);
    return total_order(groups);
}

inline EventMask causal_past(const CausalOrder& o, Event e) {
    detail::check_event(o, e);
    return o.down[static_cast<std::size_t>(e)];
}

inline EventMask causal_future(const CausalOrder& o, Event e) {
    detail::check_event(o, e);
    EventMask up = 0;
    for (Event x : mask_events(o.events))
        if ((o.down[static_cast<std::size_t>(x)] >> e) & 1u) up |= 1u << x;
    return up;
}

inline EventMask causal_eq_class(const CausalOrder& o, Event e) { return causal_past(o, e) & causal_future(o, e); }

inline bool order_le(const CausalOrder& o, Event a, Event b) { return (o.down[static_cast<std::size_t>(b)] >> a) & 1u; }

inline CausalRelation classify(const CausalOrder& o, Event a, Event b) {
    detail::check_event(o, a);
    detail::check_event(o, b);
    if (a == b) throw std::invalid_argument("classify needs two distinct events");
    bool ab = order_le(o, a, b), ba = order_le(o, b, a);
    if (ab && ba) return CausalRelation::Indefinite;
    if (ab) return CausalRelation::Precedes;
    if (ba) return CausalRelation::Succeeds;
    return CausalRelation::Unrelated;
}

inline bool is_definite(const CausalOrder& o) {
    for (Event e : mask_events(o.events))
        if (causal_eq_class(o, e) != (1u << e)) return false;
    return true;
}

inline bool is_lowerset(const CausalOrder& o, EventMask u) {
    if (u & ~o.events) return false;
    for (Event e : mask_events(u))
        if (o.down[static_cast<std::size_t>(e)] & ~u) return false;
    return true;
}

// All lowersets, empty and full included, in ascending mask order.
inline std::vector<EventMask> lowersets(const CausalOrder& o) {
    std::vector<EventMask> out;
    // Enumerate submasks of the event set in increasing order.
    EventMask s = 0;
    while (true) {
        if (is_lowerset(o, s)) out.push_back(s);
        if (s == o.events) break;
        s = ((s | ~o.events) + 1) & o.events;
    }
    return out;
}

// Relation inclusion: Omega <= Xi when Xi has every causal constraint of Omega.
inline bool order_leq(const CausalOrder& a, const CausalOrder& b) {
    if (a.events != b.events) return false;
    for (Event e : mask_events(a.events))
        if (a.down[static_cast<std::size_t>(e)] & ~b.down[static_cast<std::size_t>(e)]) return false;
    return true;
}

inline CausalOrder order_join(const CausalOrder& a, const CausalOrder& b) {
    if (a.events != b.events) throw std::invalid_argument("order join needs equal event sets");
    CausalOrder o = a;
    for (Event e : mask_events(a.events)) o.down[static_cast<std::size_t>(e)] |= b.down[static_cast<std::size_t>(e)];
    detail::close_transitively(o);
    return o;
}

inline CausalOrder order_meet(const CausalOrder& a, const CausalOrder& b) {
    if (a.events != b.events) throw std::invalid_argument("order meet needs equal event sets");
    CausalOrder o = a;
    for (Event e : mask_events(a.events)) o.down[static_cast<std::size_t>(e)] &= b.down[static_cast<std::size_t>(e)];
    return o;
}

// Union over possibly different event sets; used to combine order literals.
inline CausalOrder order_union(const CausalOrder& a, const CausalOrder& b) {
    CausalOrder o = a;
    o.events |= b.events;
    for (Event e : mask_events(b.events)) {
        auto i = static_cast<std::size_t>(e);
        o.down[i] |= b.down[i] | (1u << e);
    }
    detail::close_transitively(o);
    return o;
}

// Hist: every assignment on the causal past of each event.
inline HistorySet hist_space(const CausalOrder& o) {
    HistorySet s;
    for (Event e : mask_events(o.events))
        for (History h : max_histories_on(o.down[static_cast<std::size_t>(e)])) s.set(h);
    return s;
}

// ExtHist: every assignment on each non-empty lowerset.
inline HistorySet ext_hist_space(const CausalOrder& o) {
    HistorySet s;
    for (EventMask u : lowersets(o))
        if (u)
            for (History h : max_histories_on(u)) s.set(h);
    return s;
}

// Relabels events through perm (event e goes to perm[e]).
inline CausalOrder permute_order(const CausalOrder& o, const std::vector<Event>& perm) {
    auto map_mask = [&](EventMask m) {
        EventMask r = 0;
        for (Event e : mask_events(m)) r |= 1u << perm.at(static_cast<std::size_t>(e));
        return r;
    };
    CausalOrder out;
    out.events = map_mask(o.events);
    for (Event e : mask_events(o.events))
        out.down[static_cast<std::size_t>(perm.at(static_cast<std::size_t>(e)))] = map_mask(o.down[static_cast<std::size_t>(e)]);
    return out;
}

struct OrderHierarchy {
    std::vector<CausalOrder> orders;
    // (i, j): orders[i] < orders[j] with nothing in between.
    std::vector<std::pair<std::size_t, std::size_t>> covers;
};

inline int relation_size(const CausalOrder& o) {
    int r = 0;
    for (Event e : mask_events(o.events)) r += std::popcount(o.down[static_cast<std::size_t>(e)]);
    return r;
}

// Every preorder on events A.. (n of them), smallest relations first.
inline OrderHierarchy order_hierarchy(int n) {
    if (n < 0 || n > 4) throw std::invalid_argument("order hierarchy supports up to 4 events");
    EventMask events = full_mask(n);
    std::vector<std::pair<Event, Event>> pairs;
    for (Event a = 0; a < n; ++a)
        for (Event b = 0; b < n; ++b)
            if (a != b) pairs.emplace_back(a, b);
    OrderHierarchy h;
    for (std::uint32_t bits = 0; bits < (1u << pairs.size()); ++bits) {
        CausalOrder o = discrete_order(events);
        for (std::size_t i = 0; i < pairs.size(); ++i)
            if ((bits >> i) & 1u) o.down[static_cast<std::size_t>(pairs[i].second)] |= 1u << pairs[i].first;
        if (is_valid_order(o)) h.orders.push_back(o);
    }
    std::stable_sort(h.orders.begin(), h.orders.end(),
                     [](const CausalOrder& a, const CausalOrder& b) { return relation_size(a) < relation_size(b); });
    for (std::size_t i = 0; i < h.orders.size(); ++i)
        for (std::size_t j = 0; j < h.orders.size(); ++j) {
            if (i == j || !order_leq(h.orders[i], h.orders[j])) continue;
            bool cover = true;
            for (std::size_t k = 0; k < h.orders.size() && cover; ++k)
                if (k != i && k != j && order_leq(h.orders[i], h.orders[k]) && order_leq(h.orders[k], h.orders[j]))
                    cover = false;
            if (cover) h.covers.emplace_back(i, j);
        }
    return h;
}

// ---------------------------------------------------------------------------
// Text syntax:
//   expr  := term (('|' | 'v') term)*
//   term  := 'total(' item (',' item)* ')' | 'discrete(' events ')'
//          | 'indiscrete(' events ')' | 'wedge(' expr ')'
//   item  := letter | '{' letter (',' letter)* '}'
// Terms may use different events; '|' takes the transitive closure of the
// union. wedge(...) only groups a sub-expression.

namespace detail {
class OrderParser {
public:
    explicit OrderParser(const std::string& s) : s_(s) {}

    CausalOrder parse() {
        CausalOrder o = expr();
        skip();
        if (pos_ != s_.size()) fail("trailing characters");
        return o;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw std::invalid_argument("bad order syntax at " + std::to_string(pos_) + " in '" + s_ + "': " + what);
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }
    std::string word() {
        skip();
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::islower(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        return s_.substr(start, pos_ - start);
    }
    Event letter() {
        skip();
        if (pos_ >= s_.size() || s_[pos_] < 'A' || s_[pos_] > 'Z') fail("expected an event letter");
        return s_[pos_++] - 'A';
    }
    EventMask item() {
        if (eat('{')) {
            EventMask m = 0;
            do m |= 1u << letter();
            while (eat(','));
            expect('}');
            return m;
        }
        return 1u << letter();
    }
    CausalOrder expr() {
        CausalOrder o = term();
        while (true) {
            skip();
            if (eat('|')) {
                o = order_union(o, term());
            } else if (pos_ < s_.size() && s_[pos_] == 'v' &&
                       (pos_ + 1 >= s_.size() || !std::islower(static_cast<unsigned char>(s_[pos_ + 1])))) {
                ++pos_;
                o = order_union(o, term());
            } else {
                return o;
            }
        }
    }
    CausalOrder term() {
        std::string kw = word();
        expect('(');
        CausalOrder o;
        if (kw == "wedge") {
            o = expr();
        } else if (kw == "total") {
            std::vector<EventMask> groups;
            do groups.push_back(item());
            while (eat(','));
            EventMask seen = 0;
            for (EventMask g : groups) {
                if (g & seen) fail("repeated event in total order");
                seen |= g;
            }
            o = total_order(groups);
        } else if (kw == "discrete" || kw == "indiscrete") {
            EventMask m = 0;
            do {
                EventMask g = item();
                if (g & m) fail("repeated event");
                m |= g;
            } while (eat(','));
            o = kw == "discrete" ? discrete_order(m) : indiscrete_order(m);
        } else {
            fail("unknown order constructor '" + kw + "'");
        }
        expect(')');
        return o;
    }

    std::string s_;
    std::size_t pos_ = 0;
};

inline std::string mask_letters(EventMask m) {
    std::string s;
    for (Event e : mask_events(m)) {
        if (!s.empty()) s += ',';
        s += event_letter(e);
    }
    return s;
}
}  // namespace detail

inline CausalOrder parse_order(const std::string& text) { return detail::OrderParser(text).parse(); }

// Renders an order in the literal syntax; parse_order(order_to_string(o)) == o.
inline std::string order_to_string(const CausalOrder& o) {
    // Causal equivalence classes, in order of their smallest event.
    std::vector<EventMask> classes;
    EventMask seen = 0;
    for (Event e : mask_events(o.events)) {
        if ((seen >> e) & 1u) continue;
        EventMask c = causal_eq_class(o, e);
        classes.push_back(c);
        seen |= c;
    }
    auto group_str = [](EventMask c) {
        if (std::popcount(c) == 1) return std::string(1, event_letter(std::countr_zero(c)));
        return "{" + detail::mask_letters(c) + "}";
    };
    auto below = [&](EventMask a, EventMask b) {  // class a strictly below class b
        return a != b && ((o.down[static_cast<std::size_t>(std::countr_zero(b))] & a) != 0);
    };
    // Chain check.
    auto sorted = classes;
    std::sort(sorted.begin(), sorted.end(), [&](EventMask a, EventMask b) {
        return std::popcount(o.down[static_cast<std::size_t>(std::countr_zero(a))]) <
               std::popcount(o.down[static_cast<std::size_t>(std::countr_zero(b))]);
    });
    bool chain = true;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
        if (!below(sorted[i], sorted[i + 1])) chain = false;
    if (chain && sorted.size() > 1) {
        std::string s = "total(";
        for (std::size_t i = 0; i < sorted.size(); ++i) s += (i ? "," : "") + group_str(sorted[i]);
        return s + ")";
    }
    if (sorted.size() == 1) {
        return std::popcount(sorted[0]) == 1 ? "discrete(" + group_str(sorted[0]) + ")"
                                             : "indiscrete(" + detail::mask_letters(sorted[0]) + ")";
    }
    // General case: covering edges as two-element chains, then isolated classes.
    std::vector<std::string> terms;
    EventMask touched = 0;
    for (EventMask a : classes)
        for (EventMask b : classes) {
            if (!below(a, b)) continue;
            bool cover = true;
            for (EventMask c : classes)
                if (below(a, c) && below(c, b)) cover = false;
            if (cover) {
                terms.push_back("total(" + group_str(a) + "," + group_str(b) + ")");
                touched |= a | b;
            }
        }
    EventMask isolated = 0;
    for (EventMask c : classes) {
        if (c & touched) continue;
        if (std::popcount(c) == 1) isolated |= c;
        else terms.push_back("indiscrete(" + detail::mask_letters(c) + ")");
    }
    if (isolated) terms.push_back("discrete(" + detail::mask_letters(isolated) + ")");
    std::string s;
    for (std::size_t i = 0; i < terms.size(); ++i) s += (i ? "|" : "") + terms[i];
    return s;
}

}  // namespace causalspace
