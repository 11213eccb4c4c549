#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "catalogue_ids.hpp"
#include "causaltope.hpp"
#include "encoding.hpp"
#include "enumerator.hpp"
#include "hset256.hpp"
#include "orders.hpp"
#include "spaces.hpp"
#include "symmetry.hpp"

namespace causalspace {

// ---------------------------------------------------------------------------
// Causal functions.
//
// A causal function picks one output bit per class of causal_function_classes.
// Tables are packed with bit (k * n + e) holding the output at event e for
// joint input k (A most significant in k).

using CausalFunctionTable = std::uint64_t;

inline std::uint64_t count_causal_functions(const HistorySet& theta) {
    auto classes = causal_function_classes(theta);
    if (classes.size() >= 64) throw std::overflow_error("causal function count exceeds 64 bits");
    return std::uint64_t{1} << classes.size();
}

inline std::vector<CausalFunctionTable> enumerate_causal_functions(const HistorySet& theta, int n) {
    if (n < 1 || n > 3) throw std::length_error("explicit causal functions are limited to 3 events");
    auto classes = causal_function_classes(theta);
    if (classes.size() > 24) throw std::length_error("too many causal functions to list");
    std::unordered_map<History, std::size_t> class_of;
    for (std::size_t c = 0; c < classes.size(); ++c)
        for (History h : classes[c]) class_of[h] = c;
    HistorySet e = ext(theta);
    std::vector<History> members = hset_members(theta);
    std::vector<EventMask> tip(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) tip[i] = tips(theta, members[i], e);
    // For every (input, event) slot, the class that fixes its output.
    const std::size_t num = std::size_t{1} << n;
    std::vector<std::size_t> slot_class(num * static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < num; ++k) {
        History kh = detail::assignment_from_index(k, n);
        for (int ev = 0; ev < n; ++ev) {
            std::optional<std::size_t> c;
            for (std::size_t i = 0; i < members.size() && !c; ++i)
                if (restriction_leq(members[i], kh) && ((tip[i] >> ev) & 1u)) c = class_of.at(members[i]);
            if (!c) throw PreconditionError("an output is not determined by any input history");
            slot_class[k * static_cast<std::size_t>(n) + static_cast<std::size_t>(ev)] = *c;
        }
    }
    std::vector<CausalFunctionTable> out;
    out.reserve(std::size_t{1} << classes.size());
    for (std::uint64_t choice = 0; choice < (std::uint64_t{1} << classes.size()); ++choice) {
        CausalFunctionTable t = 0;
        for (std::size_t s = 0; s < slot_class.size(); ++s)
            if ((choice >> slot_class[s]) & 1u) t |= CausalFunctionTable{1} << s;
        out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Causal functions of theta that are causal for none of the given refinements.
inline std::uint64_t novel_causal_functions(const HistorySet& theta, const std::vector<HistorySet>& refinements, int n) {
    std::unordered_set<CausalFunctionTable> old;
    for (const auto& r : refinements)
        for (auto t : enumerate_causal_functions(r, n)) old.insert(t);
    std::uint64_t novel = 0;
    for (auto t : enumerate_causal_functions(theta, n))
        if (!old.count(t)) ++novel;
    return novel;
}

// ---------------------------------------------------------------------------
// Relation to causal orders.

struct OrderRelation {
    std::optional<CausalOrder> induced_by;
    // Minimal definite orders whose space is a coarsening of theta.
    std::vector<CausalOrder> closest_order_coarsenings;
    // The same over all preorders, definite or not.
    std::vector<CausalOrder> closest_any_order_coarsenings;
};

namespace detail {
inline std::vector<CausalOrder> minimal_orders(const std::vector<CausalOrder>& os) {
    std::vector<CausalOrder> out;
    for (const auto& a : os) {
        bool minimal = true;
        for (const auto& b : os)
            if (!(a == b) && order_leq(b, a)) minimal = false;
        if (minimal) out.push_back(a);
    }
    return out;
}
}  // namespace detail

inline OrderRelation classify_order_relation(const HistorySet& theta, int n) {
    OrderRelation r;
    HistorySet e = ext(theta);
    std::vector<CausalOrder> definite, any;
    for (const auto& o : order_hierarchy(n).orders) {
        if (!r.induced_by && hist_space(o) == theta) r.induced_by = o;
        if (ext_hist_space(o).is_subset_of(e)) {
            any.push_back(o);
            if (is_definite(o)) definite.push_back(o);
        }
    }
    r.closest_order_coarsenings = detail::minimal_orders(definite);
    r.closest_any_order_coarsenings = detail::minimal_orders(any);
    return r;
}

// One group of extended histories of theta missing from the order's space.
// Outputs at `outputs` do not depend on the inputs at `freed` whenever the
// inputs at `given` match one of `histories`.
struct DiffRecord {
    EventMask outputs = 0;
    EventMask freed = 0;
    EventMask given = 0;
    std::vector<History> histories;  // key order
    friend bool operator==(const DiffRecord&, const DiffRecord&) = default;
};

inline std::vector<DiffRecord> diff_from_order(const HistorySet& theta, const CausalOrder& o) {
    HistorySet e = ext(theta), eo = ext_hist_space(o);
    if (!eo.is_subset_of(e)) throw std::invalid_argument("space is not a refinement of the order's space");
    std::map<EventMask, std::vector<History>> by_dom;
    for (History h : hset_sorted(e - eo)) by_dom[dom(h)].push_back(h);
    std::vector<DiffRecord> out;
    for (auto& [d, hs] : by_dom) {
        EventMask past = 0;
        for (Event ev : mask_events(d)) past |= causal_past(o, ev);
        out.push_back({d, past & ~d, d, hs});
    }
    std::stable_sort(out.begin(), out.end(), [](const DiffRecord& a, const DiffRecord& b) {
        return std::popcount(a.given) > std::popcount(b.given);
    });
    return out;
}

// Inverse of diff_from_order: the space whose Ext adds `extra` to the
// order's extended histories.
inline HistorySet apply_order_diff(const CausalOrder& o, const std::vector<History>& extra) {
    return prime(ext_hist_space(o) | hset(extra));
}

// ---------------------------------------------------------------------------
// The hierarchy of causally complete spaces.

struct HierarchyNode {
    int class_id = 0;
    HistorySet representative;
    std::size_t orbit_size = 0;
    std::vector<int> closest_refinements;  // class ids, ascending
    std::vector<int> closest_coarsenings;
    bool is_tight = false;
    std::optional<CausalOrder> induced_by_order;
    std::uint64_t causal_function_count = 0;
    std::uint64_t novel_causal_function_count = 0;
    int causaltope_dim = 0;
    std::size_t total_eqs = 0;
    std::size_t indep_eqs = 0;
};

class Hierarchy {
public:
    // Builds the hierarchy from class representatives (any orbit members).
    // For 3 events the classes are numbered as in the published catalogue and
    // the catalogue's representatives are used; otherwise classes are sorted
    // by (dimension, causal-function count, canonical representative).
    Hierarchy(int n, const std::vector<HistorySet>& reps) : n_(n), group_(n) {
        if (n < 1 || n > 4) throw std::invalid_argument("hierarchy supports 1 to 4 events");
        std::vector<HistorySet> canon;
        for (const auto& r : reps) canon.push_back(canonical_rep(r, group_));
        std::sort(canon.begin(), canon.end());
        canon.erase(std::unique(canon.begin(), canon.end()), canon.end());
        assign_ids(canon);
        for (std::size_t c = 0; c < nodes_.size(); ++c) {
            for (const auto& s : orbit(nodes_[c].representative, group_)) {
                space_index_[HSet256::from_bitvec(s)] = spaces_.size();
                spaces_.push_back(s);
                space_class_.push_back(static_cast<int>(c));
            }
            nodes_[c].orbit_size = spaces_.size() - first_of_class(c);
        }
        compute_covers();
        for (auto& node : nodes_) fill_node(node);
    }

    int num_events() const { return n_; }
    const PermGroup& group() const { return group_; }
    const std::vector<HierarchyNode>& nodes() const { return nodes_; }
    const HierarchyNode& node(int class_id) const {
        if (class_id < 0 || static_cast<std::size_t>(class_id) >= nodes_.size())
            throw std::invalid_argument("unknown class id " + std::to_string(class_id));
        return nodes_[static_cast<std::size_t>(class_id)];
    }
    std::size_t num_classes() const { return nodes_.size(); }
    const std::vector<HistorySet>& spaces() const { return spaces_; }

    std::optional<std::size_t> index_of(const HistorySet& s) const {
        if (s.bit_length() > 256) return std::nullopt;
        auto it = space_index_.find(HSet256::from_bitvec(s));
        if (it == space_index_.end()) return std::nullopt;
        return it->second;
    }
    int class_of(const HistorySet& s) const {
        auto i = index_of(s);
        if (!i) throw std::invalid_argument("not a causally complete space on " + std::to_string(n_) + " events");
        return space_class_[*i];
    }
    int class_of_index(std::size_t i) const { return space_class_.at(i); }

    // Covering relation on individual spaces (indices into spaces()).
    const std::vector<std::size_t>& lower_covers(std::size_t i) const { return lower_.at(i); }
    const std::vector<std::size_t>& upper_covers(std::size_t i) const { return upper_.at(i); }
    bool leq(std::size_t finer, std::size_t coarser) const { return ext_[coarser].subset_of(ext_[finer]); }

    std::vector<HistorySet> lower_cover_spaces(const HistorySet& s) const { return pick(lower_.at(require(s))); }
    std::vector<HistorySet> upper_cover_spaces(const HistorySet& s) const { return pick(upper_.at(require(s))); }

    std::vector<int> minima() const {
        std::vector<int> out;
        for (const auto& n : nodes_)
            if (n.closest_refinements.empty()) out.push_back(n.class_id);
        return out;
    }
    std::vector<int> maxima() const {
        std::vector<int> out;
        for (const auto& n : nodes_)
            if (n.closest_coarsenings.empty()) out.push_back(n.class_id);
        return out;
    }

    // Condensed edges (refinement class -> coarsening class), sorted.
    std::vector<std::pair<int, int>> class_edges() const {
        std::vector<std::pair<int, int>> out;
        for (const auto& n : nodes_)
            for (int c : n.closest_coarsenings) out.emplace_back(n.class_id, c);
        return out;
    }

    bool uses_catalogue_ids() const { return catalogue_ids_; }

private:
    std::size_t require(const HistorySet& s) const {
        auto i = index_of(s);
        if (!i) throw std::invalid_argument("not a causally complete space on " + std::to_string(n_) + " events");
        return *i;
    }
    std::vector<HistorySet> pick(const std::vector<std::size_t>& idx) const {
        std::vector<HistorySet> out;
        for (auto i : idx) out.push_back(spaces_[i]);
        return out;
    }
    std::size_t first_of_class(std::size_t c) const {
        std::size_t i = spaces_.size();
        while (i > 0 && space_class_[i - 1] == static_cast<int>(c)) --i;
        return i;
    }

    void assign_ids(const std::vector<HistorySet>& canon) {
        std::vector<HistorySet> reps;
        if (n_ == 3) {
            std::map<HistorySet, HistorySet> listed;  // canonical -> catalogue representative
            for (auto v : catalogue_representatives()) {
                HistorySet r = BitVec::from_u64(v);
                listed[canonical_rep(r, group_)] = r;
            }
            bool all = listed.size() == canon.size();
            for (const auto& c : canon) all = all && listed.count(c);
            if (all) {
                catalogue_ids_ = true;
                for (auto v : catalogue_representatives()) reps.push_back(BitVec::from_u64(v));
            }
        }
        if (!catalogue_ids_) {
            struct Key {
                int dim;
                std::uint64_t cf;
                HistorySet rep;
            };
            std::vector<Key> keys;
            for (const auto& c : canon) keys.push_back({causaltope_dim(c, n_), count_causal_functions(c), c});
            std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
                if (a.dim != b.dim) return a.dim < b.dim;
                if (a.cf != b.cf) return a.cf < b.cf;
                return a.rep < b.rep;
            });
            for (auto& k : keys) reps.push_back(k.rep);
        }
        for (std::size_t c = 0; c < reps.size(); ++c) {
            HierarchyNode node;
            node.class_id = static_cast<int>(c);
            node.representative = reps[c];
            nodes_.push_back(std::move(node));
        }
    }

    void compute_covers() {
        const std::size_t m = spaces_.size();
        ext_.resize(m);
        for (std::size_t i = 0; i < m; ++i) ext_[i] = HSet256::from_bitvec(ext(spaces_[i]));
        // up[i]: spaces strictly coarser than space i, as a bitset.
        const std::size_t words = (m + 63) / 64;
        std::vector<std::vector<std::uint64_t>> up(m, std::vector<std::uint64_t>(words, 0));
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                if (i != j && ext_[j].subset_of(ext_[i]) && !(ext_[j] == ext_[i])) up[i][j / 64] |= std::uint64_t{1} << (j % 64);
        lower_.assign(m, {});
        upper_.assign(m, {});
        for (std::size_t i = 0; i < m; ++i) {
            std::vector<std::uint64_t> implied(words, 0);
            for (std::size_t w = 0; w < words; ++w) {
                std::uint64_t x = up[i][w];
                while (x) {
                    std::size_t j = w * 64 + static_cast<std::size_t>(std::countr_zero(x));
                    x &= x - 1;
                    for (std::size_t v = 0; v < words; ++v) implied[v] |= up[j][v];
                }
            }
            for (std::size_t w = 0; w < words; ++w) {
                std::uint64_t x = up[i][w] & ~implied[w];
                while (x) {
                    std::size_t j = w * 64 + static_cast<std::size_t>(std::countr_zero(x));
                    x &= x - 1;
                    upper_[i].push_back(j);
                    lower_[j].push_back(i);
                }
            }
        }
    }

    void fill_node(HierarchyNode& node) {
        std::size_t i = require(node.representative);
        std::set<int> ref, coa;
        for (auto j : lower_[i]) ref.insert(space_class_[j]);
        for (auto j : upper_[i]) coa.insert(space_class_[j]);
        node.closest_refinements.assign(ref.begin(), ref.end());
        node.closest_coarsenings.assign(coa.begin(), coa.end());
        node.is_tight = tightness(node.representative).tight;
        for (const auto& o : order_hierarchy(n_).orders)
            if (hist_space(o) == node.representative) {
                node.induced_by_order = o;
                break;
            }
        node.causal_function_count = count_causal_functions(node.representative);
        node.novel_causal_function_count =
            n_ <= 3 ? novel_causal_functions(node.representative, pick(lower_[i]), n_) : 0;
        auto info = causaltope_info(node.representative, n_);
        node.causaltope_dim = info.dim;
        node.total_eqs = info.total_eqs;
        node.indep_eqs = info.indep_eqs;
    }

    int n_;
    PermGroup group_;
    bool catalogue_ids_ = false;
    std::vector<HierarchyNode> nodes_;
    std::vector<HistorySet> spaces_;
    std::vector<int> space_class_;
    std::unordered_map<HSet256, std::size_t, HSet256Hash> space_index_;
    std::vector<HSet256> ext_;
    std::vector<std::vector<std::size_t>> lower_, upper_;
};

inline Hierarchy build_hierarchy(int n, const std::vector<HistorySet>& classes) { return Hierarchy(n, classes); }

inline Hierarchy build_hierarchy(int n) { return Hierarchy(n, enumerate_classes(n).reps); }

// ---------------------------------------------------------------------------
// Per-space report.

struct SpaceReport {
    int class_id = 0;
    std::size_t class_size = 0;
    HistorySet space;
    bool induced = false;
    // The order the space is compared against: the inducing order, or a
    // closest order coarsening (definite when one exists).
    std::optional<CausalOrder> order;
    bool order_definite = false;
    std::optional<int> order_space_class;     // class of Hist(order), if complete
    bool order_space_is_representative = false;
    std::vector<CausalOrder> closest_order_coarsenings;  // definite only
    std::vector<DiffRecord> bullets;
    int dim = 0;
    std::size_t total_eqs = 0;
    std::size_t indep_eqs = 0;
    std::vector<int> refinements;
    std::vector<int> coarsenings;
    bool is_minimum = false;
    bool is_maximum = false;
    std::optional<bool> is_join_of_refinements;
    std::optional<bool> is_meet_of_coarsenings;
    std::uint64_t causal_functions = 0;
    std::optional<std::uint64_t> novel_causal_functions;
    bool tight = false;
    std::vector<Identification> identifications;
    // Comparison with the closest refinements' causaltopes: the largest of
    // their dimensions, how many refinements reach it, and their classes.
    std::optional<int> sub_dim_delta;
    std::optional<std::size_t> sub_count;
    std::vector<int> sub_classes;
    // Dimension of the intersection of the closest coarsenings' causaltopes
    // minus the space's own dimension.
    std::optional<int> coarsening_meet_deficit;
};

// Chooses the order a non-induced space is described against: definite
// closest coarsenings first; ties go to the fewest missing extended
// histories, then to the first order in hierarchy order.
inline std::optional<CausalOrder> describing_order(const HistorySet& theta, const OrderRelation& rel) {
    if (rel.induced_by) return rel.induced_by;
    const auto& pool = rel.closest_order_coarsenings.empty() ? rel.closest_any_order_coarsenings
                                                             : rel.closest_order_coarsenings;
    std::optional<CausalOrder> best;
    std::size_t best_diff = 0;
    HistorySet e = ext(theta);
    for (const auto& o : pool) {
        std::size_t d = (e - ext_hist_space(o)).count();
        if (!best || d < best_diff) {
            best = o;
            best_diff = d;
        }
    }
    return best;
}

inline SpaceReport report(const HistorySet& theta, const Hierarchy& h) {
    const int n = h.num_events();
    SpaceReport r;
    r.space = theta;
    r.class_id = h.class_of(theta);
    const HierarchyNode& node = h.node(r.class_id);
    r.class_size = node.orbit_size;

    OrderRelation rel = classify_order_relation(theta, n);
    r.induced = rel.induced_by.has_value();
    r.closest_order_coarsenings = rel.closest_order_coarsenings;
    r.order = describing_order(theta, rel);
    if (r.order) {
        r.order_definite = is_definite(*r.order);
        HistorySet hs = hist_space(*r.order);
        if (is_free_choice(hs, full_mask(n)) && is_causally_complete(hs)) {
            r.order_space_class = h.class_of(hs);
            r.order_space_is_representative = hs == h.node(*r.order_space_class).representative;
        }
        r.bullets = diff_from_order(theta, *r.order);
    }

    auto info = causaltope_info(theta, n);
    r.dim = info.dim;
    r.total_eqs = info.total_eqs;
    r.indep_eqs = info.indep_eqs;
    r.refinements = node.closest_refinements;
    r.coarsenings = node.closest_coarsenings;
    r.is_minimum = r.refinements.empty();
    r.is_maximum = r.coarsenings.empty();

    auto lower = h.lower_cover_spaces(theta);
    auto upper = h.upper_cover_spaces(theta);
    if (!lower.empty()) {
        HistorySet j = lower[0];
        for (std::size_t i = 1; i < lower.size(); ++i) j = space_join(j, lower[i]);
        r.is_join_of_refinements = j == theta;
        int best = 0;
        std::size_t count = 0;
        std::set<int> classes;
        for (const auto& s : lower) {
            int d = causaltope_dim(s, n);
            if (count == 0 || d > best) {
                best = d;
                count = 0;
                classes.clear();
            }
            if (d == best) {
                ++count;
                classes.insert(h.class_of(s));
            }
        }
        r.sub_dim_delta = r.dim - best;
        r.sub_count = count;
        r.sub_classes.assign(classes.begin(), classes.end());
    }
    if (!upper.empty()) {
        HistorySet m = upper[0];
        for (std::size_t i = 1; i < upper.size(); ++i) m = space_meet(m, upper[i]);
        r.is_meet_of_coarsenings = m == theta;
        std::vector<LinearSystem> systems;
        for (const auto& s : upper) systems.push_back(build_equations(s, n));
        r.coarsening_meet_deficit = system_dim(stack_systems(systems)) - r.dim;
    }

    r.causal_functions = count_causal_functions(theta);
    if (!lower.empty() && n <= 3) r.novel_causal_functions = novel_causal_functions(theta, lower, n);
    auto t = tightness(theta);
    r.tight = t.tight;
    r.identifications = t.identifications;
    return r;
}

inline SpaceReport report(int class_id, const Hierarchy& h) { return report(h.node(class_id).representative, h); }

}  // namespace causalspace
