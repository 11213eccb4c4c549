#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_set>
#include <utility>
#include <vector>

#include "encoding.hpp"
#include "hset256.hpp"
#include "symmetry.hpp"

namespace causalspace {

struct CorruptFileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Checkpoint serialization. Every integer is big-endian; each history set is
// written with a 2-byte length followed by its minimal big-endian bytes.

namespace detail {
inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class ByteReader {
public:
    ByteReader(const std::uint8_t* p, std::size_t n) : p_(p), n_(n) {}
    std::uint64_t u(int bytes) {
        need(static_cast<std::size_t>(bytes));
        std::uint64_t v = 0;
        for (int i = 0; i < bytes; ++i) v = (v << 8) | p_[pos_++];
        return v;
    }
    BitVec bits(std::size_t len) {
        need(len);
        BitVec b = BitVec::from_bytes_be(p_ + pos_, len);
        pos_ += len;
        return b;
    }
    bool done() const { return pos_ == n_; }

private:
    void need(std::size_t k) const {
        if (n_ - pos_ < k) throw CorruptFileError("checkpoint truncated");
    }
    const std::uint8_t* p_;
    std::size_t n_;
    std::size_t pos_ = 0;
};
}  // namespace detail

inline std::size_t write_hsets(std::vector<std::uint8_t>& out, const std::vector<HistorySet>& hsets) {
    std::size_t written = 8;
    detail::put_u64(out, hsets.size());
    for (const auto& hs : hsets) {
        auto bytes = hs.to_bytes_be();
        if (bytes.size() > 0xffff) throw std::length_error("history set too large to serialize");
        out.push_back(static_cast<std::uint8_t>(bytes.size() >> 8));
        out.push_back(static_cast<std::uint8_t>(bytes.size() & 0xff));
        out.insert(out.end(), bytes.begin(), bytes.end());
        written += 2 + bytes.size();
    }
    return written;
}

inline std::vector<HistorySet> read_hsets(detail::ByteReader& r) {
    std::uint64_t count = r.u(8);
    std::vector<HistorySet> out;
    for (std::uint64_t i = 0; i < count; ++i) {
        auto len = static_cast<std::size_t>(r.u(2));
        BitVec b = r.bits(len);
        if (std::max<std::size_t>((b.bit_length() + 7) / 8, 1) != len)
            throw CorruptFileError("non-minimal history set length in checkpoint");
        out.push_back(std::move(b));
    }
    return out;
}

inline std::vector<HistorySet> read_hsets(const std::vector<std::uint8_t>& bytes) {
    detail::ByteReader r(bytes.data(), bytes.size());
    auto out = read_hsets(r);
    if (!r.done()) throw CorruptFileError("trailing bytes after history sets");
    return out;
}

// The persistent part of a search.
struct SearchState {
    std::uint64_t num_spaces = 0;
    std::uint64_t num_done = 0;
    std::uint64_t num_todo = 0;
    std::uint64_t fix_child_choice_idx = 0;
    std::uint64_t var_child_subset_bitvec = 0;
    std::vector<HistorySet> partial_spaces_visited;
    std::vector<HistorySet> eq_classes;
    std::vector<HistorySet> child_choices_list;
    std::vector<HistorySet> remaining_children_list;

    std::vector<std::uint8_t> to_bytes() const {
        std::vector<std::uint8_t> out;
        for (auto v : {num_spaces, num_done, num_todo, fix_child_choice_idx, var_child_subset_bitvec})
            detail::put_u64(out, v);
        write_hsets(out, partial_spaces_visited);
        write_hsets(out, eq_classes);
        write_hsets(out, child_choices_list);
        write_hsets(out, remaining_children_list);
        return out;
    }

    static SearchState from_bytes(const std::vector<std::uint8_t>& bytes) {
        detail::ByteReader r(bytes.data(), bytes.size());
        SearchState s;
        s.num_spaces = r.u(8);
        s.num_done = r.u(8);
        s.num_todo = r.u(8);
        s.fix_child_choice_idx = r.u(8);
        s.var_child_subset_bitvec = r.u(8);
        s.partial_spaces_visited = read_hsets(r);
        s.eq_classes = read_hsets(r);
        s.child_choices_list = read_hsets(r);
        s.remaining_children_list = read_hsets(r);
        if (!r.done()) throw CorruptFileError("trailing bytes in checkpoint");
        if (s.child_choices_list.size() != s.remaining_children_list.size())
            throw CorruptFileError("checkpoint choice lists differ in length");
        if (s.fix_child_choice_idx > s.child_choices_list.size() || s.num_done > s.num_todo)
            throw CorruptFileError("checkpoint counters out of range");
        return s;
    }
};

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for reading");
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Status formatting.

inline std::string time_str(double t) {
    char buf[64];
    if (t < 0) t = 0;
    if (t == 0) return "0s";
    if (t < 1e-6) std::snprintf(buf, sizeof buf, "%.2fns", t * 1e9);
    else if (t < 1e-3) std::snprintf(buf, sizeof buf, "%.2fus", t * 1e6);
    else if (t < 1) std::snprintf(buf, sizeof buf, "%.2fms", t * 1e3);
    else if (t < 60) std::snprintf(buf, sizeof buf, "%.2fs", t);
    else {
        auto s = static_cast<long long>(t);
        if (s < 3600) std::snprintf(buf, sizeof buf, "%lldm%02llds", s / 60, s % 60);
        else if (s < 86400) std::snprintf(buf, sizeof buf, "%lldh%02lldm", s / 3600, (s % 3600) / 60);
        else std::snprintf(buf, sizeof buf, "%lldd%02lldh", s / 86400, (s % 86400) / 3600);
    }
    return buf;
}

inline std::string memory_str(std::uint64_t mem) {
    char buf[64];
    if (mem < 1024) std::snprintf(buf, sizeof buf, "%lluB", static_cast<unsigned long long>(mem));
    else if (mem < 1024ull * 1024) std::snprintf(buf, sizeof buf, "%.2fKiB", mem / 1024.0);
    else if (mem < 1024ull * 1024 * 1024) std::snprintf(buf, sizeof buf, "%.2fMiB", mem / (1024.0 * 1024));
    else std::snprintf(buf, sizeof buf, "%.2fGiB", mem / (1024.0 * 1024 * 1024));
    return buf;
}

// ---------------------------------------------------------------------------

struct FinderOptions {
    bool verbose = false;
    std::ostream* out = &std::cout;
    // Minimum number of classes between status lines; unset prints a line
    // after every valid top-level subset.
    std::optional<std::uint64_t> update_period;
    // Checkpoint file (a ".bak" copy is written alongside).
    std::optional<std::string> filename;
    std::optional<std::uint64_t> save_period;
    bool save_backup = true;
    // Unset searches every depth up to the number of maximal histories.
    std::optional<int> toplevel_opt_depth;
    // Use the plain subset iterator at the top level as well.
    bool brute_force_toplevel = false;
    // Called after every checkpoint write. Tests throw from here to simulate
    // an interrupted run.
    std::function<void()> on_save;
};

struct ChildChoice {
    std::vector<History> include;
    std::vector<History> avoid;
    friend bool operator==(const ChildChoice&, const ChildChoice&) = default;
};

struct OptFixResult {
    std::vector<std::vector<History>> choices;
    std::uint64_t num_todo = 0;
    std::vector<std::vector<History>> remaining;
};

struct SearchMetrics {
    double elapsed_s = 0;
    std::uint64_t num_spaces = 0;
    std::uint64_t num_eq_classes = 0;
    std::uint64_t memory_bytes = 0;
    std::uint64_t num_done = 0;
    std::uint64_t num_todo = 0;
    double completed = 0;           // fraction of top-level subsets done
    double fixed_completed = 0;     // fraction of fixed subsets done
    double variable_completed = 0;  // fraction of the current variable range done
};

namespace detail {

// Tables that depend only on the number of events; shared between finders.
struct FinderTables {
    int n = 0;
    std::vector<History> max_hs;
    std::vector<History> all_hs;  // every non-empty sub-history, key order
    PermGroup group;
    std::vector<std::vector<History>> children;  // by history, numeric order
    std::vector<HSet256> children_set;
    std::vector<HSet256> parents;
    std::vector<int> domsize;
    std::vector<int> key_rank;  // position in all_hs

    explicit FinderTables(int n_) : n(n_), group(n_) {
        max_hs = max_histories(n);
        all_hs = sub_histories(max_hs);
        sort_histories(all_hs);
        std::size_t nh = std::size_t{1} << (2 * n);
        children.resize(nh);
        children_set.resize(nh);
        parents.resize(nh);
        domsize.assign(nh, 0);
        key_rank.assign(nh, -1);
        for (std::size_t i = 0; i < all_hs.size(); ++i) {
            History h = all_hs[i];
            key_rank[h] = static_cast<int>(i);
            domsize[h] = causalspace::domsize(h);
            auto ch = child_histories(h);
            std::sort(ch.begin(), ch.end());
            children[h] = ch;
            for (History k : ch) {
                children_set[h].set(static_cast<unsigned>(k));
                parents[k].set(static_cast<unsigned>(h));
            }
        }
    }

    std::size_t bytes() const {
        std::size_t b = sizeof(*this) + group.size() * (std::size_t{1} << (2 * n)) * sizeof(History);
        b += (children.size()) * (3 * sizeof(HSet256) + 2 * sizeof(int) + sizeof(std::vector<History>));
        b += all_hs.size() * sizeof(History) * 4;
        return b;
    }

    static std::shared_ptr<const FinderTables> get(int n) {
        static std::mutex mu;
        static std::vector<std::shared_ptr<const FinderTables>> cache(5);
        std::lock_guard<std::mutex> lock(mu);
        if (!cache[static_cast<std::size_t>(n)]) cache[static_cast<std::size_t>(n)] = std::make_shared<FinderTables>(n);
        return cache[static_cast<std::size_t>(n)];
    }
};

}  // namespace detail

// Search for equivalence classes of causally complete spaces on n events.
class SpaceFinder {
public:
    explicit SpaceFinder(int n, FinderOptions opts = {}) : n_(n), opts_(std::move(opts)) {
        if (n < 1 || n > 4) throw std::invalid_argument("the enumerator supports 1 to 4 events");
        if (opts_.update_period && *opts_.update_period == 0) throw std::invalid_argument("update period must be positive");
        if (opts_.save_period && *opts_.save_period == 0) throw std::invalid_argument("save period must be positive");
        t_ = detail::FinderTables::get(n);
        max_space_size_ = ((std::size_t{1} << (2 * n)) + 7) / 8 + 2 * sizeof(void*) + sizeof(HSet256);
    }

    int num_events() const { return n_; }
    const PermGroup& group() const { return t_->group; }

    void blank_state() {
        num_spaces_ = 0;
        partial_visited_.clear();
        eq_classes_.clear();
        eq_order_.clear();
        has_toplevel_ = false;
        num_done_ = num_todo_ = fix_idx_ = var_bits_ = 0;
        choices_.clear();
        remaining_.clear();
        num_remaining_.clear();
        initialised_ = true;
    }

    void load_state(const std::string& filename) { load_state(SearchState::from_bytes(read_file_bytes(filename))); }

    void load_state(const SearchState& s) {
        auto conv = [&](const std::vector<HistorySet>& v) {
            std::vector<HSet256> out;
            for (const auto& b : v) {
                if (b.bit_length() > (std::size_t{1} << (2 * n_)))
                    throw std::invalid_argument("checkpoint does not match the number of events");
                out.push_back(HSet256::from_bitvec(b));
            }
            return out;
        };
        auto partial = conv(s.partial_spaces_visited);
        auto eq = conv(s.eq_classes);
        auto choices = conv(s.child_choices_list);
        auto remaining = conv(s.remaining_children_list);
        auto check_members = [&](const std::vector<HSet256>& v, int want_domsize) {
            for (const auto& hs : v)
                hs.for_each([&](unsigned h) {
                    bool ok = is_valid_history(h) && h != 0 && t_->key_rank[h] >= 0;
                    if (ok && want_domsize >= 0) ok = t_->domsize[h] == want_domsize;
                    if (!ok) throw std::invalid_argument("checkpoint does not match the number of events");
                });
        };
        check_members(partial, -1);
        check_members(eq, -1);
        check_members(choices, n_ - 1);
        check_members(remaining, n_ - 1);
        if (choices.empty()) throw CorruptFileError("checkpoint has no top-level choices");

        num_spaces_ = s.num_spaces;
        num_done_ = s.num_done;
        num_todo_ = s.num_todo;
        fix_idx_ = s.fix_child_choice_idx;
        var_bits_ = s.var_child_subset_bitvec;
        partial_visited_ = {partial.begin(), partial.end()};
        eq_classes_ = {eq.begin(), eq.end()};
        eq_order_ = eq;
        choices_ = choices;
        remaining_ = remaining;
        has_toplevel_ = true;
        initialised_ = true;
    }

    SearchState state() const {
        SearchState s;
        s.num_spaces = num_spaces_;
        s.num_done = num_done_;
        s.num_todo = num_todo_;
        s.fix_child_choice_idx = fix_idx_;
        s.var_child_subset_bitvec = var_bits_;
        // Sets are written in ascending order so that checkpoints are
        // reproducible byte for byte.
        auto sorted_set = [](const auto& set) {
            std::vector<HistorySet> v;
            for (const auto& x : set) v.push_back(x.to_bitvec());
            std::sort(v.begin(), v.end());
            return v;
        };
        s.partial_spaces_visited = sorted_set(partial_visited_);
        s.eq_classes = sorted_set(eq_classes_);
        for (const auto& c : choices_) s.child_choices_list.push_back(c.to_bitvec());
        for (const auto& r : remaining_) s.remaining_children_list.push_back(r.to_bitvec());
        return s;
    }

    void save_state(const std::string& filename, bool save_backup = true) const {
        auto bytes = state().to_bytes();
        if (opts_.verbose) print_raw("Saving to '" + filename + "'... ");
        write_file_bytes(filename, bytes);
        std::size_t written = bytes.size();
        if (save_backup) {
            if (opts_.verbose) print_raw("saving to '" + filename + ".bak'... ");
            write_file_bytes(filename + ".bak", bytes);
            written += bytes.size();
        }
        if (opts_.verbose) print("done (" + memory_str(written) + " written).");
    }

    // Runs (or continues) the search.
    void find_eq_classes() {
        if (!initialised_) throw std::logic_error("must initialise using blank_state() or load_state()");
        if (opts_.brute_force_toplevel && opts_.save_period)
            throw std::invalid_argument("periodic saving requires the optimised top-level iterator");
        start_ = std::chrono::steady_clock::now();
        since_save_ = 0;
        find_eq_classes_rec(t_->max_hs, {}, {}, 0);
        if (opts_.update_period) print_status_line();
        partial_visited_.clear();
        if (opts_.filename) save_state(*opts_.filename, opts_.save_backup);
        if (opts_.filename && opts_.on_save) opts_.on_save();
        describe();
    }

    std::uint64_t num_spaces() const { return num_spaces_; }
    std::uint64_t num_eq_classes() const { return eq_classes_.size(); }
    std::uint64_t num_done() const { return num_done_; }
    std::uint64_t num_todo() const { return num_todo_; }

    // Representatives in discovery order (file order after a load).
    std::vector<HistorySet> eq_classes() const {
        std::vector<HistorySet> out;
        for (const auto& s : eq_order_) out.push_back(s.to_bitvec());
        return out;
    }

    // All spaces: the orbit of every representative.
    std::vector<HistorySet> spaces() const {
        std::vector<HistorySet> out;
        for (const auto& rep : eq_classes()) {
            auto o = orbit(rep, t_->group);
            out.insert(out.end(), o.begin(), o.end());
        }
        return out;
    }

    double perc_completed() const { return num_todo_ ? static_cast<double>(num_done_) / static_cast<double>(num_todo_) : 0.0; }
    double fixed_toplevel_subsets_perc_completed() const {
        return choices_.empty() ? 0.0 : static_cast<double>(fix_idx_) / static_cast<double>(choices_.size());
    }
    double var_toplevel_subsets_perc_completed() const {
        if (fix_idx_ >= choices_.size()) return 1.0;
        int rem = remaining_[fix_idx_].count();
        return static_cast<double>(var_bits_) / std::ldexp(1.0, rem);
    }

    // Upper-bound estimate from collection sizes, not a platform probe.
    std::uint64_t memsize() const {
        std::uint64_t m = t_->bytes() + sizeof(*this);
        m += (partial_visited_.size() + eq_classes_.size() + eq_order_.size() + choices_.size() + remaining_.size()) *
             max_space_size_;
        return m;
    }

    double time_elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

    SearchMetrics metrics() const {
        SearchMetrics m;
        m.elapsed_s = initialised_ ? time_elapsed() : 0.0;
        m.num_spaces = num_spaces_;
        m.num_eq_classes = eq_classes_.size();
        m.memory_bytes = memsize();
        m.num_done = num_done_;
        m.num_todo = num_todo_;
        m.completed = perc_completed();
        m.fixed_completed = fixed_toplevel_subsets_perc_completed();
        m.variable_completed = var_toplevel_subsets_perc_completed();
        return m;
    }

    // --- Algorithm pieces, exposed for inspection and testing. ---

    // Decodes subset_bits over child_hists, adds the pre-chosen children and
    // returns the subset iff every history of hs not already covered has a
    // child in it.
    std::optional<std::vector<History>> child_subset(const std::vector<History>& hs,
                                                     const std::vector<History>& child_hists, std::uint64_t subset_bits,
                                                     const std::vector<History>& covered = {},
                                                     const std::vector<History>& chosen = {}) const {
        auto r = child_subset_raw(to_set(hs), child_hists, subset_bits, to_set(covered), to_set(chosen));
        if (!r) return std::nullopt;
        return members_key_order(*r);
    }

    // Every subset of the union of children covering each history in hs.
    void iter_child_subsets(const std::vector<History>& hs,
                            const std::function<void(const std::vector<History>&)>& f) const {
        iter_child_subsets_raw(hs, [&](const HSet256& s) { f(members_key_order(s)); });
    }

    std::vector<ChildChoice> fix_child_choices(const std::vector<History>& hs, std::optional<int> max_depth) const {
        std::vector<std::size_t> all(t_->group.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        std::vector<ChildChoice> out;
        for (auto& [inc, avoid] : fix_child_choices_raw(hs, all, {}, {}, 0, max_depth))
            out.push_back({members_numeric(inc), members_numeric(avoid)});
        return out;
    }

    OptFixResult opt_fix_child_choices() const { return opt_fix_child_choices(t_->max_hs); }

    OptFixResult opt_fix_child_choices(const std::vector<History>& hs) const {
        auto raw = opt_fix_raw(hs, false);
        OptFixResult r;
        r.num_todo = raw.num_todo;
        for (const auto& c : raw.choices) r.choices.push_back(members_numeric(c));
        for (const auto& c : raw.remaining) r.remaining.push_back(members_numeric(c));
        return r;
    }

    // Runs only the given slice of top-level choices from a blank state; used
    // by the parallel driver.
    void run_toplevel_slice(const std::vector<HistorySet>& choices, const std::vector<HistorySet>& remaining) {
        blank_state();
        for (const auto& c : choices) choices_.push_back(HSet256::from_bitvec(c));
        for (const auto& r : remaining) remaining_.push_back(HSet256::from_bitvec(r));
        num_todo_ = 0;
        for (const auto& r : remaining_) num_todo_ += std::uint64_t{1} << r.count();
        has_toplevel_ = true;
        find_eq_classes();
    }

private:
    struct RawOptFix {
        std::vector<HSet256> choices;
        std::uint64_t num_todo = 0;
        std::vector<HSet256> remaining;
    };

    static HSet256 to_set(const std::vector<History>& v) {
        HSet256 s;
        for (History h : v) s.set(static_cast<unsigned>(h));
        return s;
    }
    std::vector<History> members_key_order(const HSet256& s) const {
        std::vector<History> out;
        s.for_each([&](unsigned h) { out.push_back(h); });
        std::sort(out.begin(), out.end(), [&](History a, History b) { return t_->key_rank[a] < t_->key_rank[b]; });
        return out;
    }
    static std::vector<History> members_numeric(const HSet256& s) {
        std::vector<History> out;
        s.for_each([&](unsigned h) { out.push_back(h); });
        return out;
    }
    HSet256 apply(std::size_t gi, const HSet256& s) const {
        HSet256 out;
        s.for_each([&](unsigned h) { out.set(static_cast<unsigned>(t_->group.apply(gi, h))); });
        return out;
    }

    bool visited(const HSet256& s) const { return partial_visited_.count(s) || eq_classes_.count(s); }

    // The recursive level-by-level search.
    void find_eq_classes_rec(const std::vector<History>& new_hs, const std::vector<History>& hs,
                             const std::vector<History>& hs_rest, int level) {
        std::vector<History> hs_so_far = new_hs;
        hs_so_far.insert(hs_so_far.end(), hs.begin(), hs.end());

        // A single event has no children: the maximal histories are the space.
        if (level == 0 && std::all_of(new_hs.begin(), new_hs.end(), [&](History h) { return t_->domsize[h] == 1; })) {
            HSet256 s = to_set(new_hs);
            std::vector<HSet256> eq_class;
            if (consider(s, eq_class)) {
                num_spaces_ += eq_class.size();
                on_class(s);
            }
        }

        auto process = [&](const HSet256& cs) {
            std::vector<History> cs_sorted = members_key_order(cs);
            std::vector<History> rest = new_hs;
            rest.insert(rest.end(), hs_rest.begin(), hs_rest.end());
            for (History k : cs_sorted)
                for (std::size_t j = 0; j < hs_so_far.size(); ++j)
                    if ((k & ~hs_so_far[j]) == 0) rest[j] &= ~k;
            std::vector<History> winnowed, winnowed_rest;
            for (std::size_t j = 0; j < hs_so_far.size(); ++j)
                if (rest[j]) {
                    winnowed.push_back(hs_so_far[j]);
                    winnowed_rest.push_back(rest[j]);
                }
            HSet256 partial = cs | to_set(winnowed);
            std::vector<HSet256> eq_class;
            if (!consider(partial, eq_class)) return;
            bool bottom = std::all_of(cs_sorted.begin(), cs_sorted.end(), [&](History h) { return t_->domsize[h] == 1; });
            if (bottom) {
                num_spaces_ += eq_class.size();
                on_class(partial);
            } else {
                partial_visited_.insert(partial);
                find_eq_classes_rec(cs_sorted, winnowed, winnowed_rest, level + 1);
            }
        };

        if (level == 0 && !opts_.brute_force_toplevel) {
            iter_toplevel(new_hs, process);
        } else if (level == 0) {
            iter_toplevel_brute(new_hs, process);
        } else {
            iter_child_subsets_raw(new_hs, process);
        }
    }

    // Returns false if s or any image of it was seen before; otherwise fills
    // eq_class with the orbit of s.
    bool consider(const HSet256& s, std::vector<HSet256>& eq_class) const {
        if (visited(s)) return false;
        for (std::size_t gi = 0; gi < t_->group.size(); ++gi) {
            HSet256 img = apply(gi, s);
            if (std::find(eq_class.begin(), eq_class.end(), img) == eq_class.end()) eq_class.push_back(img);
            if (visited(img)) return false;
        }
        return true;
    }

    void on_class(const HSet256& rep) {
        eq_classes_.insert(rep);
        eq_order_.push_back(rep);
        ++since_save_;
        if (opts_.update_period && eq_classes_.size() % *opts_.update_period == 0) print_status_line();
    }

    std::optional<HSet256> child_subset_raw(const HSet256& hs, const std::vector<History>& child_hists,
                                            std::uint64_t bits, const HSet256& covered, const HSet256& chosen) const {
        HSet256 to_cover = hs - covered;
        HSet256 subset = chosen;
        std::size_t idx = 0;
        while (bits) {
            if (bits & 1u) {
                History k = child_hists.at(idx);
                subset.set(static_cast<unsigned>(k));
                if (!to_cover.empty()) to_cover -= t_->parents[k];
            }
            bits >>= 1;
            ++idx;
        }
        if (to_cover.empty()) return subset;
        return std::nullopt;
    }

    std::vector<History> union_children_key_order(const std::vector<History>& hs) const {
        HSet256 all;
        for (History h : hs) all |= t_->children_set[h];
        return members_key_order(all);
    }

    template <class F>
    void iter_child_subsets_raw(const std::vector<History>& hs, F&& f) const {
        auto child_hists = union_children_key_order(hs);
        if (child_hists.size() >= 64) throw std::length_error("too many child histories");
        HSet256 hs_set = to_set(hs);
        std::uint64_t num = std::uint64_t{1} << child_hists.size();
        for (std::uint64_t bits = 1; bits < num; ++bits) {
            auto cs = child_subset_raw(hs_set, child_hists, bits, {}, {});
            if (cs) f(*cs);
        }
    }

    // Unoptimised top level: every subset of all children, with progress
    // counters but no resumable position.
    template <class F>
    void iter_toplevel_brute(const std::vector<History>& hs, F&& f) {
        auto child_hists = union_children_key_order(hs);
        HSet256 hs_set = to_set(hs);
        std::uint64_t num = std::uint64_t{1} << child_hists.size();
        num_todo_ = num - 1;
        num_done_ = 0;
        if (opts_.verbose) print("Iterating over " + std::to_string(num_todo_) + " top-level child history subsets.");
        print_status_header();
        for (std::uint64_t bits = 1; bits < num; ++bits) {
            auto cs = child_subset_raw(hs_set, child_hists, bits, {}, {});
            ++num_done_;
            if (cs) {
                f(*cs);
                if (!opts_.update_period) print_status_line();
            }
        }
    }

    template <class F>
    void iter_toplevel(const std::vector<History>& hs, F&& f) {
        if (!has_toplevel_) {
            auto raw = opt_fix_raw(hs, opts_.verbose);
            num_todo_ = raw.num_todo;
            num_done_ = 0;
            choices_ = raw.choices;
            remaining_ = raw.remaining;
            fix_idx_ = 0;
            var_bits_ = 0;
            has_toplevel_ = true;
        }
        num_remaining_.clear();
        for (const auto& r : remaining_) num_remaining_.push_back(r.count());
        if (opts_.verbose) print("Iterating over " + std::to_string(num_todo_) + " top-level child history subsets.");
        print_status_header();
        HSet256 hs_set = to_set(hs);
        for (std::size_t idx = static_cast<std::size_t>(fix_idx_); idx < choices_.size(); ++idx) {
            const HSet256 choice = choices_[idx];
            std::vector<History> rem_sorted = members_key_order(remaining_[idx]);
            HSet256 covered;
            for (History h : hs)
                if (choice.intersects(t_->children_set[h])) covered.set(static_cast<unsigned>(h));
            std::uint64_t num = std::uint64_t{1} << rem_sorted.size();
            for (std::uint64_t bits = var_bits_; bits < num; ++bits) {
                auto cs = child_subset_raw(hs_set, rem_sorted, bits, covered, choice);
                ++num_done_;
                if (cs) f(*cs);
                if (cs && !opts_.update_period) print_status_line();
                ++var_bits_;
                if (cs) consider_saving_state();
            }
            var_bits_ = 0;
            ++fix_idx_;
        }
    }

    void consider_saving_state() {
        if (opts_.filename && opts_.save_period && since_save_ >= *opts_.save_period) {
            since_save_ = 0;
            save_state(*opts_.filename, opts_.save_backup);
            print_status_line();
            if (opts_.on_save) opts_.on_save();
        }
    }

    using ChoicePair = std::pair<HSet256, HSet256>;

    // Itertools-style powerset of a sorted list: by size, then lexicographic.
    static std::vector<HSet256> powerset(const std::vector<History>& xs) {
        std::vector<HSet256> out;
        std::size_t m = xs.size();
        for (std::size_t r = 0; r <= m; ++r) {
            std::vector<std::size_t> idx(r);
            for (std::size_t i = 0; i < r; ++i) idx[i] = i;
            while (true) {
                HSet256 s;
                for (auto i : idx) s.set(static_cast<unsigned>(xs[i]));
                out.push_back(s);
                std::size_t i = r;
                while (i > 0 && idx[i - 1] == i - 1 + m - r) --i;
                if (i == 0) break;
                ++idx[i - 1];
                for (std::size_t j = i; j < r; ++j) idx[j] = idx[j - 1] + 1;
            }
        }
        return out;
    }

    std::vector<ChoicePair> fix_child_choices_raw(const std::vector<History>& hs, const std::vector<std::size_t>& perm_group,
                                                  const HSet256& include, const HSet256& avoid, int depth,
                                                  std::optional<int> max_depth) const {
        if (perm_group.size() == 1 || hs.empty() || (max_depth && depth > *max_depth)) return {ChoicePair{}};
        struct Rep {
            HSet256 ks;
            std::vector<std::size_t> stab;
        };
        std::optional<History> best_h;
        std::vector<Rep> best_reps;
        std::vector<History> hs_new_fixed;
        for (History h : hs) {
            HSet256 inc_h = include & t_->children_set[h];
            std::vector<HSet256> sel;
            for (const auto& s : powerset(t_->children[h]))
                if (!s.intersects(avoid) && inc_h.subset_of(s)) sel.push_back(s);
            // Larger subsets first, then by their key-ordered members.
            std::stable_sort(sel.begin(), sel.end(), [&](const HSet256& a, const HSet256& b) {
                if (a.count() != b.count()) return a.count() > b.count();
                auto va = members_key_order(a), vb = members_key_order(b);
                return va < vb;
            });
            std::vector<Rep> reps;
            std::vector<HSet256> seen;
            for (const auto& ks : sel) {
                if (ks.empty() || std::find(seen.begin(), seen.end(), ks) != seen.end()) continue;
                Rep rep{ks, {}};
                for (std::size_t gi : perm_group) {
                    HSet256 img = apply(gi, ks);
                    if (img == ks) rep.stab.push_back(gi);
                    if (std::find(seen.begin(), seen.end(), img) == seen.end()) seen.push_back(img);
                }
                reps.push_back(std::move(rep));
            }
            if (!reps.empty()) {
                if (!best_h || reps.size() < best_reps.size()) {
                    best_h = h;
                    best_reps = std::move(reps);
                }
            } else {
                hs_new_fixed.push_back(h);
            }
        }
        if (!best_h) return {ChoicePair{}};
        hs_new_fixed.push_back(*best_h);
        std::vector<History> new_hs;
        for (History h : hs)
            if (std::find(hs_new_fixed.begin(), hs_new_fixed.end(), h) == hs_new_fixed.end()) new_hs.push_back(h);
        std::vector<ChoicePair> out;
        for (const auto& [ks, stab] : best_reps) {
            HSet256 new_inc = include | ks;
            HSet256 new_avoid = avoid | (t_->children_set[*best_h] - ks);
            for (const auto& [ri, ra] : fix_child_choices_raw(new_hs, stab, new_inc, new_avoid, depth + 1, max_depth)) {
                ChoicePair c{ri | ks, ra | new_avoid};
                if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
            }
        }
        return out;
    }

    RawOptFix opt_fix_raw(const std::vector<History>& hs, bool verbose) const {
        HSet256 child_set;
        for (History h : hs) child_set |= t_->children_set[h];
        int limit = opts_.toplevel_opt_depth ? *opts_.toplevel_opt_depth : static_cast<int>(hs.size());
        if (verbose) {
            print("Brute-forcing complexity: " + std::to_string(std::uint64_t{1} << child_set.count()) +
                  " top-level child history subsets.");
            if (limit >= 0) print("Optimising top-level child history subsets (max depth " + std::to_string(limit) + ").");
        }
        std::vector<std::size_t> all(t_->group.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        std::optional<RawOptFix> best;
        for (int max_depth = -1; max_depth <= limit; ++max_depth) {
            RawOptFix cur;
            for (const auto& [inc, avoid] : fix_child_choices_raw(hs, all, {}, {}, 0, max_depth)) {
                HSet256 rem = child_set - (inc | avoid);
                cur.num_todo += std::uint64_t{1} << rem.count();
                cur.choices.push_back(inc);
                cur.remaining.push_back(rem);
            }
            if (!best || cur.num_todo <= best->num_todo) {
                if (verbose && max_depth >= 0)
                    print("  " + std::to_string(cur.num_todo) + " subsets at optimisation depth " + std::to_string(max_depth));
                best = std::move(cur);
            } else {
                break;
            }
        }
        return *best;
    }

    void print_raw(const std::string& s) const {
        if (opts_.out) {
            *opts_.out << s;
            opts_.out->flush();
        }
    }
    void print(const std::string& s) const { print_raw(s + "\n"); }

    void print_status_header() const {
        if (!opts_.verbose) return;
        char buf[128];
        std::snprintf(buf, sizeof buf, "%10s %12s %10s %10s %10s %10s %10s", "time", "spaces", "eq. cls", "memory",
                      "completed", "fts compl.", "vts compl.");
        print(buf);
    }

    void print_status_line() const {
        if (!opts_.verbose) return;
        char buf[256];
        char c[32], f[32], v[32];
        std::snprintf(c, sizeof c, "%.4f", 100.0 * perc_completed());
        std::snprintf(f, sizeof f, "%.4f", 100.0 * fixed_toplevel_subsets_perc_completed());
        std::snprintf(v, sizeof v, "%.4f", 100.0 * var_toplevel_subsets_perc_completed());
        std::snprintf(buf, sizeof buf, "%10s %12llu %10llu %10s %10s %10s %10s", time_str(time_elapsed()).c_str(),
                      static_cast<unsigned long long>(num_spaces_), static_cast<unsigned long long>(eq_classes_.size()),
                      memory_str(memsize()).c_str(), c, f, v);
        print(buf);
    }

    void describe() const {
        if (opts_.verbose)
            print("Found " + std::to_string(num_spaces_) + " spaces in " + std::to_string(eq_classes_.size()) +
                  " equivalence classes.");
    }

    int n_;
    FinderOptions opts_;
    std::shared_ptr<const detail::FinderTables> t_;
    std::size_t max_space_size_ = 0;
    bool initialised_ = false;

    std::uint64_t num_spaces_ = 0;
    std::unordered_set<HSet256, HSet256Hash> partial_visited_;
    std::unordered_set<HSet256, HSet256Hash> eq_classes_;
    std::vector<HSet256> eq_order_;

    bool has_toplevel_ = false;
    std::uint64_t num_done_ = 0, num_todo_ = 0, fix_idx_ = 0, var_bits_ = 0;
    std::vector<HSet256> choices_, remaining_;
    std::vector<int> num_remaining_;

    std::chrono::steady_clock::time_point start_{};
    std::uint64_t since_save_ = 0;
};

struct EnumerationResult {
    std::vector<HistorySet> reps;  // canonical representatives, ascending
    std::uint64_t num_spaces = 0;
};

// Sequential search, with representatives replaced by their canonical form.
inline EnumerationResult enumerate_classes(int n, bool brute_force_toplevel = false) {
    FinderOptions o;
    o.brute_force_toplevel = brute_force_toplevel;
    SpaceFinder f(n, o);
    f.blank_state();
    f.find_eq_classes();
    EnumerationResult r;
    for (const auto& rep : f.eq_classes()) r.reps.push_back(canonical_rep(rep, f.group()));
    std::sort(r.reps.begin(), r.reps.end());
    r.num_spaces = f.num_spaces();
    return r;
}

// Parallel mode: every fixed top-level choice is searched independently with
// private visited sets, and results are merged by orbit. Each chunk explores
// a superset of what the sequential search does for the same choices, so the
// merged class set is the same.
inline EnumerationResult enumerate_classes_parallel(int n, unsigned threads = 0) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    SpaceFinder base(n);
    base.blank_state();
    auto opt = base.opt_fix_child_choices();
    std::size_t m = opt.choices.size();
    std::vector<std::vector<HistorySet>> found(m);
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto worker = [&] {
        try {
            for (std::size_t i = next++; i < m; i = next++) {
                SpaceFinder f(n);
                f.run_toplevel_slice({hset(opt.choices[i])}, {hset(opt.remaining[i])});
                found[i] = f.eq_classes();
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mu);
            err = std::current_exception();
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::min<std::size_t>(threads, std::max<std::size_t>(m, 1)); ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
    std::set<HistorySet> reps;
    if (n == 1) reps.insert(canonical_rep(hset(max_histories(1)), base.group()));
    for (const auto& v : found)
        for (const auto& rep : v) reps.insert(canonical_rep(rep, base.group()));
    EnumerationResult r;
    r.reps.assign(reps.begin(), reps.end());
    for (const auto& rep : r.reps) r.num_spaces += orbit(rep, base.group()).size();
    return r;
}

}  // namespace causalspace
