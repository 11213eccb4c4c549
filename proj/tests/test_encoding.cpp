#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <set>

#include "causalspace/histories.hpp"
#include "causalspace/symmetry.hpp"
#include "support.hpp"

using namespace causalspace;
using testsupport::H;
using testsupport::S;

TEST_CASE("bitvec basics") {
    CHECK(bitvec({1, 3, 5, 8}).to_u64() == 298);
    CHECK(bitvec({}).to_u64() == 0);
    CHECK(bitvec({0}).to_u64() == 1);
    CHECK_THROWS_AS(bitvec({-1}), std::invalid_argument);

    // {2} is disjoint from {1,3,5,8}
    CHECK(sub(BitVec::from_u64(298), bitvec({2})).to_u64() == 298);
    CHECK(sub(BitVec::from_u64(298), BitVec::from_u64(2)).to_u64() == 296);
    CHECK(sub(BitVec::from_u64(298), BitVec::from_u64(298)).to_u64() == 0);
    CHECK(sub(BitVec::from_u64(0b1011), BitVec::from_u64(0b0010)).to_u64() == 0b1001);

    CHECK(is_subset(BitVec{}, BitVec::from_u64(298)));
    CHECK(is_subset(BitVec::from_u64(298), BitVec::from_u64(298)));
    CHECK_FALSE(is_subset(BitVec::from_u64(0b11), BitVec::from_u64(0b01)));

    CHECK(iter_bitvec(BitVec::from_u64(298)) == std::vector<std::size_t>{1, 3, 5, 8});
    CHECK(iter_bitvec(BitVec{}).empty());
    CHECK(iter_bitvec(BitVec::from_u64(137)) == std::vector<std::size_t>{0, 3, 7});
}

TEST_CASE("bitvec round trips on random sets") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::set<std::int64_t> elems;
        int k = static_cast<int>(rng() % 20);
        for (int i = 0; i < k; ++i) elems.insert(static_cast<std::int64_t>(rng() % 300));
        std::vector<std::int64_t> v(elems.begin(), elems.end());
        std::vector<std::int64_t> shuffled = v;
        shuffled.insert(shuffled.end(), v.begin(), v.end());
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        BitVec b = bitvec(shuffled);
        auto back = iter_bitvec(b);
        REQUIRE(back.size() == v.size());
        for (std::size_t i = 0; i < v.size(); ++i) CHECK(back[i] == static_cast<std::size_t>(v[i]));

        BitVec u = b, w = bitvec({static_cast<std::int64_t>(rng() % 300), static_cast<std::int64_t>(rng() % 300)});
        CHECK(is_subset(sub(u, w), u));
        CHECK_FALSE(sub(u, w).intersects(w));
        CHECK(BitVec::from_decimal(u.to_decimal()) == u);
        auto bytes = u.to_bytes_be();
        CHECK(BitVec::from_bytes_be(bytes.data(), bytes.size()) == u);
    }
}

TEST_CASE("history encoding") {
    CHECK(history(std::map<Event, InputValue>{{0, 0}, {1, 1}, {3, 1}}) == 137);
    CHECK(history(std::vector<HistoryItem>{}) == 0);
    CHECK(history(std::vector<HistoryItem>{{0, 0}}) == 1);
    CHECK_THROWS_AS(history(std::vector<HistoryItem>{{0, 0}, {0, 1}}), std::invalid_argument);

    CHECK(dom(137) == 0b1011u);
    CHECK(domsize(137) == 3);
    CHECK(dom(0) == 0u);
    CHECK(domsize(1) == 1);
    CHECK(history_to_string(H("<A/0,B/1>")) == "<A/0,B/1>");

    // item decoding then re-encoding is the identity on valid histories
    for (History h = 0; h < (History{1} << 8); ++h) {
        if (!is_valid_history(h)) continue;
        CHECK(history(history_items(h)) == h);
    }
}

TEST_CASE("history sort key") {
    CHECK(history_less(H("A/0"), H("<A/0,B/0>")));
    CHECK(history_less(H("A/0"), H("A/1")));
    CHECK_FALSE(history_less(H("A/1"), H("A/1")));
    // total and consistent with domain size
    std::vector<History> all;
    for (History h = 1; h < (History{1} << 6); ++h)
        if (is_valid_history(h)) all.push_back(h);
    for (History a : all)
        for (History b : all) {
            if (a == b) continue;
            CHECK(history_less(a, b) != history_less(b, a));
            if (domsize(a) < domsize(b)) CHECK(history_less(a, b));
        }
}

TEST_CASE("maximal, child and sub histories") {
    CHECK(max_histories(1) == std::vector<History>{H("A/0"), H("A/1")});
    CHECK(max_histories(2).size() == 4);
    auto m3 = max_histories(3);
    REQUIRE(m3.size() == 8);
    CHECK(m3[0] == H("<A/0,B/0,C/0>"));

    auto ch = child_histories(H("<A/0,B/0,C/0>"));
    CHECK(std::set<History>(ch.begin(), ch.end()) ==
          std::set<History>{H("<A/0,B/0>"), H("<A/0,C/0>"), H("<B/0,C/0>")});
    CHECK(child_histories(H("A/0")).empty());
    auto ch2 = child_histories(H("<A/1,B/1>"));
    CHECK(std::set<History>(ch2.begin(), ch2.end()) == std::set<History>{H("A/1"), H("B/1")});

    CHECK(sub_histories(max_histories(2)).size() == 8);
    auto par = parents(sub_histories(max_histories(2)));
    auto p = par.at(H("A/0"));
    CHECK(std::set<History>(p.begin(), p.end()) == std::set<History>{H("<A/0,B/0>"), H("<A/0,B/1>")});
    CHECK(sub_histories({H("A/0")}) == std::vector<History>{H("A/0")});

    int pow3 = 1;
    for (int n = 1; n <= 4; ++n) {
        pow3 *= 3;
        CHECK(sub_histories(max_histories(n)).size() == static_cast<std::size_t>(pow3 - 1));
    }
}

TEST_CASE("partial function semilattice") {
    CHECK(restriction_leq(H("A/0"), H("<A/0,B/1>")));
    CHECK_FALSE(restriction_leq(H("A/0"), H("<A/1,B/1>")));
    CHECK(restriction_leq(0, H("<A/1,B/1>")));

    CHECK(meet(H("<A/0,B/1>"), H("<A/0,C/0>")) == H("A/0"));
    CHECK(meet(H("<A/0,B/1>"), H("<A/0,B/1>")) == H("<A/0,B/1>"));
    CHECK(meet(H("A/0"), H("A/1")) == 0);

    CHECK(compatible(H("<A/0,B/1>"), H("<B/1,C/0>")));
    CHECK_FALSE(compatible(H("A/0"), H("A/1")));
    CHECK(compatible(H("A/0"), H("B/1")));

    CHECK(join({H("A/0"), H("B/1")}) == H("<A/0,B/1>"));
    CHECK(join({H("<A/0,B/1>")}) == H("<A/0,B/1>"));
    CHECK(join({H("<A/0,B/0>"), H("<B/0,C/1>")}) == H("<A/0,B/0,C/1>"));
    CHECK_THROWS_AS(join({H("A/0"), H("A/1")}), PreconditionError);
}

TEST_CASE("semilattice laws against a map-based oracle") {
    // Oracle: histories as explicit maps event -> value.
    auto as_map = [](History h) {
        std::map<Event, int> m;
        for (auto [e, v] : history_items(h)) m[e] = v;
        return m;
    };
    std::vector<History> all;
    for (History h = 0; h < (History{1} << 6); ++h)
        if (is_valid_history(h)) all.push_back(h);
    for (History f : all)
        for (History g : all) {
            auto mf = as_map(f), mg = as_map(g);
            bool leq = std::all_of(mf.begin(), mf.end(), [&](auto kv) { return mg.count(kv.first) && mg[kv.first] == kv.second; });
            CHECK(restriction_leq(f, g) == leq);
            std::map<Event, int> agree;
            bool comp = true;
            for (auto [e, v] : mf) {
                if (mg.count(e) && mg[e] == v) agree[e] = v;
                if (mg.count(e) && mg[e] != v) comp = false;
            }
            CHECK(as_map(meet(f, g)) == agree);
            CHECK(compatible(f, g) == comp);
            if (comp) {
                History j = join({f, g});
                CHECK(restriction_leq(f, j));
                CHECK(restriction_leq(g, j));
            }
        }
}

TEST_CASE("permutation group") {
    CHECK(iter_perm_group(3).size() == 48);
    CHECK(iter_perm_group(2).size() == 8);
    CHECK(iter_perm_group(1).size() == 2);

    PermGroupEl id{{0, 1}, {0, 0}};
    CHECK(permute_history(H("<A/0,B/1>"), id) == H("<A/0,B/1>"));
    PermGroupEl swap{{1, 0}, {0, 0}};
    CHECK(permute_history(H("<A/0,B/1>"), swap) == H("<A/1,B/0>"));
    PermGroupEl flip{{0}, {1}};
    CHECK(permute_history(H("A/0"), flip) == H("A/1"));
}

TEST_CASE("group action, orbits and stabilisers") {
    PermGroup g2(2), g3(3);
    auto orb = orbit(HistorySet::from_u64(1362), g2);
    std::set<std::uint64_t> got;
    for (auto& s : orb) got.insert(s.to_u64());
    CHECK(got == std::set<std::uint64_t>{1362, 820, 1558, 358});
    CHECK(orbit(HistorySet::from_u64(278), g2).size() == 1);
    CHECK(canonical_rep(HistorySet::from_u64(1558), g2).to_u64() == 358);
    CHECK(canonical_rep(HistorySet::from_u64(278), g2).to_u64() == 278);

    HistorySet kids = hset({H("<A/0,C/0>"), H("<B/0,C/0>"), H("<A/0,B/0>")});
    CHECK(stabiliser(kids, g3).size() == 6);

    // composition: applying g then g' equals applying their composite
    const auto& els = g3.elements();
    for (std::size_t a = 0; a < els.size(); a += 5)
        for (std::size_t b = 0; b < els.size(); b += 7) {
            PermGroupEl comp{std::vector<Event>(3), std::vector<InputValue>(3)};
            for (int e = 0; e < 3; ++e) {
                comp.event_perm[e] = els[b].event_perm[els[a].event_perm[e]];
                comp.flips[e] = els[a].flips[e] ^ els[b].flips[els[a].event_perm[e]];
            }
            for (History h : sub_histories(max_histories(3)))
                CHECK(permute_history(permute_history(h, els[a]), els[b]) == permute_history(h, comp));
        }

    // orbit-stabiliser and canonical representative properties
    std::mt19937_64 rng(11);
    auto all = sub_histories(max_histories(3));
    for (int trial = 0; trial < 50; ++trial) {
        HistorySet s;
        for (History h : all)
            if (rng() % 4 == 0) s.set(h);
        auto o = orbit(s, g3);
        CHECK(o.size() * stabiliser(s, g3).size() == g3.size());
        HistorySet c = canonical_rep(s, g3);
        CHECK(std::find(o.begin(), o.end(), c) != o.end());
        CHECK(canonical_rep(c, g3) == c);
        CHECK(canonical_rep(g3.apply(trial % g3.size(), s), g3) == c);
    }
    for (History h : all) CHECK(orbit(hset({h}), g3).size() * stabiliser(h, g3).size() == g3.size());
}
