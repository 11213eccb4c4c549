#include <catch_amalgamated.hpp>

#include <chrono>
#include <random>

#include "causalspace/analysis.hpp"
#include "causalspace/catalogue_ids.hpp"
#include "causalspace/causaltope.hpp"
#include "causalspace/orders.hpp"
#include "support.hpp"

using namespace causalspace;
using testsupport::catalogue;
using testsupport::S;

namespace {

HistorySet rep(int id) { return HistorySet::from_u64(catalogue_representatives().at(static_cast<std::size_t>(id))); }

const Hierarchy& hierarchy3() {
    static const Hierarchy h = build_hierarchy(3);
    return h;
}

// Oracle: constraints written straight from the definition, one row for
// every pair of joint inputs that agree on dom(h) and every output on dom(h),
// plus normalisation against the first joint input.
LinearSystem all_pairs_system(const HistorySet& theta, int n) {
    const std::size_t num = std::size_t{1} << n;
    LinearSystem s;
    s.num_events = n;
    s.num_cols = num * num;
    auto input_value = [&](std::size_t idx, int e) { return static_cast<int>((idx >> (n - 1 - e)) & 1u); };
    auto row_for = [&](std::size_t k1, std::size_t k2, EventMask mask, std::size_t out) {
        std::vector<std::int8_t> row(s.num_cols, 0);
        for (std::size_t o = 0; o < num; ++o) {
            if (((o ^ out) & mask) != 0) continue;
            row[k1 * num + o] += 1;
            row[k2 * num + o] -= 1;
        }
        return row;
    };
    HistorySet e = ext(theta);
    e.for_each([&](std::size_t hh) {
        History h = hh;
        if (domsize(h) == n) return;
        // mask and outputs use the same "A most significant" layout as columns
        EventMask mask = 0;
        for (Event ev : mask_events(dom(h))) mask |= 1u << (n - 1 - ev);
        for (std::size_t k1 = 0; k1 < num; ++k1)
            for (std::size_t k2 = k1 + 1; k2 < num; ++k2) {
                bool ok = true;
                for (Event ev : mask_events(dom(h)))
                    ok = ok && input_value(k1, ev) == value_at(h, ev) && input_value(k2, ev) == value_at(h, ev);
                if (!ok) continue;
                for (std::size_t out = 0; out < num; ++out)
                    if ((out & ~mask) == 0) s.rows.push_back(row_for(k1, k2, mask, out));
            }
    });
    for (std::size_t k = 1; k < num; ++k) s.rows.push_back(row_for(0, k, 0, 0));
    return s;
}

}  // namespace

TEST_CASE("published equation counts") {
    auto c0 = causaltope_info(rep(0), 3);
    CHECK(c0.total_eqs == 91);
    CHECK(c0.indep_eqs == 37);
    CHECK(c0.dim == 26);
    auto c100 = causaltope_info(rep(100), 3);
    CHECK(c100.total_eqs == 35);
    CHECK(c100.indep_eqs == 21);
    CHECK(c100.dim == 42);
    auto c101 = causaltope_info(rep(101), 3);
    CHECK(c101.total_eqs == 35);
    CHECK(c101.indep_eqs == 21);
    CHECK(c101.dim == 42);
    auto c92 = causaltope_info(rep(92), 3);
    CHECK(c92.total_eqs == 47);
    CHECK(c92.indep_eqs == 23);
    CHECK(c92.dim == 40);
    CHECK(causaltope_dim(rep(61), 3) == 35);
}

TEST_CASE("small cases") {
    auto one = causaltope_info(S("[A/0, A/1]"), 1);
    CHECK(one.total_eqs == 1);
    CHECK(one.dim == 2);
    // two independent parties, against the all-pairs oracle
    HistorySet disc2 = hist_space(discrete_order(0b11));
    CHECK(causaltope_dim(disc2, 2) == system_dim(all_pairs_system(disc2, 2)));
    CHECK_THROWS_AS(build_equations(S("[A/0, B/0, B/1]"), 2), PreconditionError);
    CHECK_THROWS_AS(build_equations(rep(0), 2), std::invalid_argument);
}

TEST_CASE("every catalogue class matches") {
    auto t0 = std::chrono::steady_clock::now();
    const auto& cat = catalogue();
    REQUIRE(cat.size() == 102);
    for (const auto& entry : cat) {
        int id = entry["id"].get<int>();
        CAPTURE(id);
        auto info = causaltope_info(rep(id), 3);
        CHECK(info.total_eqs == entry["total_eqs"].get<std::size_t>());
        CHECK(info.indep_eqs == entry["indep_eqs"].get<std::size_t>());
        CHECK(info.dim == entry["dim"].get<int>());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(secs < 30.0);
}

TEST_CASE("rank cross-checks") {
    for (int id = 0; id < 102; ++id) {
        CAPTURE(id);
        LinearSystem s = build_equations(rep(id), 3);
        std::size_t r = rank(s);
        CHECK(rank_mod_p(s, 1000000007ULL) == r);
        CHECK(rank_mod_p(s, 998244353ULL) == r);
        // consecutive pairs span the same space as all pairs
        LinearSystem full = all_pairs_system(rep(id), 3);
        CHECK(rank(full) == r);
        CHECK(rank(stack_systems({s, full})) == r);
    }
}

TEST_CASE("rows are balanced") {
    for (int id : {0, 17, 61, 92, 100, 101}) {
        for (const auto& row : build_equations(rep(id), 3).rows) {
            int plus = 0, minus = 0;
            for (auto v : row) {
                plus += v == 1;
                minus += v == -1;
            }
            CHECK(plus == minus);
            CHECK(plus > 0);
        }
    }
}

TEST_CASE("local product models satisfy every constraint") {
    // P(o|i) = prod_e a[e][i_e][o_e] with a[e][i][0] + a[e][i][1] = 7, all
    // integer so the check is exact.
    std::mt19937 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        int a[3][2][2];
        for (auto& ev : a)
            for (auto& in : ev) {
                in[0] = static_cast<int>(rng() % 8);
                in[1] = 7 - in[0];
            }
        std::vector<long> p(64);
        for (std::size_t i = 0; i < 8; ++i)
            for (std::size_t o = 0; o < 8; ++o) {
                long v = 1;
                for (int e = 0; e < 3; ++e) v *= a[e][(i >> (2 - e)) & 1u][(o >> (2 - e)) & 1u];
                p[i * 8 + o] = v;
            }
        for (int id : {0, 33, 61, 92, 100, 101}) {
            for (const auto& row : build_equations(rep(id), 3).rows) {
                long dot = 0;
                for (std::size_t c = 0; c < 64; ++c) dot += row[c] * p[c];
                CHECK(dot == 0);
            }
        }
    }
}

TEST_CASE("coarser spaces have larger causaltopes") {
    const auto& h = hierarchy3();
    for (int id = 0; id < 102; ++id) {
        HistorySet s = rep(id);
        LinearSystem mine = build_equations(s, 3);
        int d = system_dim(mine);
        for (const auto& up : h.upper_cover_spaces(s)) {
            LinearSystem theirs = build_equations(up, 3);
            CHECK(system_dim(theirs) >= d);
            // the coarser constraints are implied by the finer ones
            CHECK(rank(stack_systems({mine, theirs})) == rank(mine));
        }
    }
}

TEST_CASE("meet of coarsening causaltopes") {
    const auto& h = hierarchy3();
    for (const auto& entry : catalogue()) {
        int id = entry["id"].get<int>();
        if (!entry.contains("coarsening_meet_deficit")) continue;
        CAPTURE(id);
        HistorySet s = rep(id);
        std::vector<LinearSystem> parts;
        for (const auto& up : h.upper_cover_spaces(s)) parts.push_back(build_equations(up, 3));
        REQUIRE_FALSE(parts.empty());
        int deficit = system_dim(stack_systems(parts)) - causaltope_dim(s, 3);
        CHECK(deficit == entry["coarsening_meet_deficit"].get<int>());
        if (entry["is_meet_of_coarsenings"].is_boolean() && entry["is_meet_of_coarsenings"].get<bool>()) CHECK(deficit == 0);
    }
    HistorySet s61 = rep(61);
    std::vector<LinearSystem> parts;
    for (const auto& up : h.upper_cover_spaces(s61)) parts.push_back(build_equations(up, 3));
    CHECK(system_dim(stack_systems(parts)) - causaltope_dim(s61, 3) == 2);
}

TEST_CASE("dumps") {
    LinearSystem s = build_equations(rep(0), 3);
    std::string csv = system_to_csv(s);
    std::istringstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(std::count(header.begin(), header.end(), ',') == 63);
    CHECK(header.rfind("i000o000,i000o001,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 92);
    CHECK(system_from_csv(csv) == s);
    CHECK(dump_system(s, "csv") == csv);

    LinearSystem empty{3, 64, {}};
    std::string ecsv = system_to_csv(empty);
    CHECK(std::count(ecsv.begin(), ecsv.end(), '\n') == 1);
    CHECK(system_from_csv(ecsv).rows.empty());

    std::string pgm = system_to_pgm(s);
    std::string head = "P5\n64 91\n255\n";
    CHECK(pgm.rfind(head, 0) == 0);
    CHECK(pgm.size() == head.size() + 64 * 91);
    CHECK(dump_system(s, "pgm") == pgm);
    CHECK_THROWS_AS(dump_system(s, "png"), std::invalid_argument);
    CHECK_THROWS_AS(system_from_csv("i0o0,i0o1\n1,2\n"), std::invalid_argument);
    CHECK(column_name(9, 2) == "i10o01");
}
