#pragma once

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "encoding.hpp"
#include "histories.hpp"
#include "spaces.hpp"

namespace causalspace {

// Homogeneous system over the entries of a standard empirical model.
// Column index = input * 2^n + output, each assignment read with event A as
// the most significant bit.
struct LinearSystem {
    int num_events = 0;
    std::size_t num_cols = 0;
    std::vector<std::vector<std::int8_t>> rows;

    friend bool operator==(const LinearSystem&, const LinearSystem&) = default;
};

namespace detail {
// Position of a total assignment on events 0..n-1, A most significant.
inline std::size_t assignment_index(History h, int n) {
    std::size_t idx = 0;
    for (int e = 0; e < n; ++e) idx = (idx << 1) | static_cast<std::size_t>(value_at(h, e));
    return idx;
}

inline History assignment_from_index(std::size_t idx, int n) {
    History h = 0;
    for (int e = 0; e < n; ++e) h |= History{1} << (2 * e + static_cast<int>((idx >> (n - 1 - e)) & 1u));
    return h;
}
}  // namespace detail

// Causality rows: for every non-maximal h in Ext, every output o on dom(h)
// and every consecutive pair of maximal histories above h, the marginal on
// dom(h) must agree. Then one quasi-normalisation row per consecutive pair of
// joint inputs.
inline LinearSystem build_equations(const HistorySet& theta, int n) {
    if (n < 1 || n > 4) throw std::invalid_argument("causaltope equations support 1 to 4 events");
    if (space_events(theta) & ~full_mask(n)) throw std::invalid_argument("space uses events beyond n");
    if (!is_free_choice(theta, full_mask(n))) throw PreconditionError("causaltope needs a free-choice space");
    const std::size_t num = std::size_t{1} << n;
    LinearSystem sys;
    sys.num_events = n;
    sys.num_cols = num * num;
    HistorySet e = ext(theta);
    const std::uint32_t full = full_mask(n);

    // Adds the row: sum of P(o' | k1) - sum of P(o' | k2) over full outputs
    // o' extending the partial output `out` on `mask`.
    auto add_row = [&](std::size_t k1, std::size_t k2, std::uint32_t mask, std::size_t out_bits) {
        std::vector<std::int8_t> row(sys.num_cols, 0);
        for (std::size_t o = 0; o < num; ++o) {
            bool match = true;
            for (int ev = 0; ev < n && match; ++ev)
                if ((mask >> ev) & 1u) {
                    std::size_t want = (out_bits >> ev) & 1u;
                    if (((o >> (n - 1 - ev)) & 1u) != want) match = false;
                }
            if (!match) continue;
            row[k1 * num + o] += 1;
            row[k2 * num + o] -= 1;
        }
        sys.rows.push_back(std::move(row));
    };

    for (History h : hset_sorted(e)) {
        std::uint32_t d = dom(h);
        if (d == full) continue;
        std::vector<std::size_t> above;
        for (std::size_t k = 0; k < num; ++k)
            if (restriction_leq(h, detail::assignment_from_index(k, n))) above.push_back(k);
        auto evs = mask_events(d);
        const std::size_t m = evs.size();
        for (std::size_t ob = 0; ob < (std::size_t{1} << m); ++ob) {
            // ob enumerates outputs on dom(h) lexicographically, first event most significant.
            std::size_t out_bits = 0;
            for (std::size_t j = 0; j < m; ++j)
                if ((ob >> (m - 1 - j)) & 1u) out_bits |= std::size_t{1} << evs[j];
            for (std::size_t j = 0; j + 1 < above.size(); ++j) add_row(above[j], above[j + 1], d, out_bits);
        }
    }
    for (std::size_t k = 0; k + 1 < num; ++k) add_row(k, k + 1, 0, 0);
    return sys;
}

// Exact rank by fraction-free (Bareiss) elimination.
inline std::size_t rank(const LinearSystem& s) {
    using boost::multiprecision::cpp_int;
    std::size_t rows = s.rows.size(), cols = s.num_cols;
    std::vector<std::vector<cpp_int>> a(rows, std::vector<cpp_int>(cols));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) a[i][j] = s.rows[i][j];
    cpp_int prev = 1;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t p = r;
        while (p < rows && a[p][c] == 0) ++p;
        if (p == rows) continue;
        std::swap(a[p], a[r]);
        for (std::size_t i = r + 1; i < rows; ++i) {
            for (std::size_t j = c + 1; j < cols; ++j) a[i][j] = (a[r][c] * a[i][j] - a[i][c] * a[r][j]) / prev;
            a[i][c] = 0;
        }
        prev = a[r][c];
        ++r;
    }
    return r;
}

// Rank over GF(p); a consistency check for the exact rank, never a substitute.
inline std::size_t rank_mod_p(const LinearSystem& s, std::uint64_t p) {
    std::size_t rows = s.rows.size(), cols = s.num_cols;
    std::vector<std::vector<std::uint64_t>> a(rows, std::vector<std::uint64_t>(cols));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            std::int64_t v = s.rows[i][j];
            a[i][j] = static_cast<std::uint64_t>((v % static_cast<std::int64_t>(p) + static_cast<std::int64_t>(p)) %
                                                 static_cast<std::int64_t>(p));
        }
    auto pw = [&](std::uint64_t b, std::uint64_t e) {
        unsigned __int128 r = 1, x = b;
        while (e) {
            if (e & 1) r = r * x % p;
            x = x * x % p;
            e >>= 1;
        }
        return static_cast<std::uint64_t>(r);
    };
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = r;
        while (piv < rows && a[piv][c] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(a[piv], a[r]);
        std::uint64_t inv = pw(a[r][c], p - 2);
        for (std::size_t i = r + 1; i < rows; ++i) {
            if (!a[i][c]) continue;
            std::uint64_t f = static_cast<std::uint64_t>(static_cast<unsigned __int128>(a[i][c]) * inv % p);
            for (std::size_t j = c; j < cols; ++j)
                a[i][j] = static_cast<std::uint64_t>((a[i][j] + static_cast<unsigned __int128>(p - f) * a[r][j]) % p);
        }
        ++r;
    }
    return r;
}

// Stacks several systems over the same columns.
inline LinearSystem stack_systems(const std::vector<LinearSystem>& parts) {
    if (parts.empty()) throw std::invalid_argument("nothing to stack");
    LinearSystem out;
    out.num_events = parts[0].num_events;
    out.num_cols = parts[0].num_cols;
    for (const auto& p : parts) {
        if (p.num_cols != out.num_cols) throw std::invalid_argument("systems have different columns");
        out.rows.insert(out.rows.end(), p.rows.begin(), p.rows.end());
    }
    return out;
}

// Dimension of the solution set once the normalisation is imposed.
inline int system_dim(const LinearSystem& s) {
    return static_cast<int>(s.num_cols) - static_cast<int>(rank(s)) - 1;
}

struct CausaltopeInfo {
    std::size_t total_eqs = 0;
    std::size_t indep_eqs = 0;
    int dim = 0;
};

inline CausaltopeInfo causaltope_info(const HistorySet& theta, int n) {
    LinearSystem s = build_equations(theta, n);
    CausaltopeInfo info;
    info.total_eqs = s.rows.size();
    info.indep_eqs = rank(s);
    info.dim = static_cast<int>(s.num_cols) - static_cast<int>(info.indep_eqs) - 1;
    return info;
}

inline int causaltope_dim(const HistorySet& theta, int n) { return causaltope_info(theta, n).dim; }

// ---------------------------------------------------------------------------
// Dumps.

inline std::string column_name(std::size_t col, int n) {
    std::size_t num = std::size_t{1} << n;
    std::string s = "i";
    for (int e = 0; e < n; ++e) s += static_cast<char>('0' + ((col / num) >> (n - 1 - e) & 1u));
    s += "o";
    for (int e = 0; e < n; ++e) s += static_cast<char>('0' + ((col % num) >> (n - 1 - e) & 1u));
    return s;
}

inline std::string system_to_csv(const LinearSystem& s) {
    std::ostringstream out;
    for (std::size_t c = 0; c < s.num_cols; ++c) out << (c ? "," : "") << column_name(c, s.num_events);
    out << "\n";
    for (const auto& row : s.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << static_cast<int>(row[c]);
        out << "\n";
    }
    return out.str();
}

inline LinearSystem system_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty CSV");
    LinearSystem s;
    s.num_cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',') + 1);
    std::size_t first = line.find(',');
    std::string name = line.substr(0, first);
    s.num_events = static_cast<int>((name.size() - 2) / 2);
    if (s.num_cols != (std::size_t{1} << (2 * s.num_events))) throw std::invalid_argument("CSV header does not match");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::int8_t> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            int v = std::stoi(cell);
            if (v < -1 || v > 1) throw std::invalid_argument("CSV coefficient out of range");
            row.push_back(static_cast<std::int8_t>(v));
        }
        if (row.size() != s.num_cols) throw std::invalid_argument("CSV row has the wrong width");
        s.rows.push_back(std::move(row));
    }
    return s;
}

// Binary greymap: 0 is white, +1 mid grey, -1 black.
inline std::string system_to_pgm(const LinearSystem& s) {
    std::string out = "P5\n" + std::to_string(s.num_cols) + " " + std::to_string(s.rows.size()) + "\n255\n";
    for (const auto& row : s.rows)
        for (auto v : row) out += static_cast<char>(v == 0 ? 255 : v > 0 ? 128 : 0);
    return out;
}

inline std::string dump_system(const LinearSystem& s, const std::string& format) {
    if (format == "csv") return system_to_csv(s);
    if (format == "pgm") return system_to_pgm(s);
    throw std::invalid_argument("unsupported system format '" + format + "'");
}

}  // namespace causalspace
