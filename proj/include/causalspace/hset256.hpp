#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <functional>

#include "bitvec.hpp"

namespace causalspace {

// Fixed 256-bit set, enough for every history value on up to 4 events.
// Used on the enumerator's hot paths instead of the heap-backed BitVec.
struct HSet256 {
    std::array<std::uint64_t, 4> w{};

    void set(unsigned i) { w[i >> 6] |= std::uint64_t{1} << (i & 63); }
    bool test(unsigned i) const { return (w[i >> 6] >> (i & 63)) & 1u; }
    bool empty() const { return (w[0] | w[1] | w[2] | w[3]) == 0; }
    int count() const {
        return std::popcount(w[0]) + std::popcount(w[1]) + std::popcount(w[2]) + std::popcount(w[3]);
    }
    bool intersects(const HSet256& o) const {
        return ((w[0] & o.w[0]) | (w[1] & o.w[1]) | (w[2] & o.w[2]) | (w[3] & o.w[3])) != 0;
    }
    bool subset_of(const HSet256& o) const {
        return ((w[0] & ~o.w[0]) | (w[1] & ~o.w[1]) | (w[2] & ~o.w[2]) | (w[3] & ~o.w[3])) == 0;
    }
    HSet256& operator|=(const HSet256& o) {
        for (int i = 0; i < 4; ++i) w[i] |= o.w[i];
        return *this;
    }
    HSet256& operator&=(const HSet256& o) {
        for (int i = 0; i < 4; ++i) w[i] &= o.w[i];
        return *this;
    }
    HSet256& operator-=(const HSet256& o) {
        for (int i = 0; i < 4; ++i) w[i] &= ~o.w[i];
        return *this;
    }
    friend HSet256 operator|(HSet256 a, const HSet256& b) { return a |= b; }
    friend HSet256 operator&(HSet256 a, const HSet256& b) { return a &= b; }
    friend HSet256 operator-(HSet256 a, const HSet256& b) { return a -= b; }
    friend bool operator==(const HSet256&, const HSet256&) = default;

    template <class F>
    void for_each(F&& f) const {
        for (unsigned k = 0; k < 4; ++k) {
            std::uint64_t x = w[k];
            while (x) {
                f(k * 64 + static_cast<unsigned>(std::countr_zero(x)));
                x &= x - 1;
            }
        }
    }

    BitVec to_bitvec() const {
        BitVec b;
        for_each([&](unsigned i) { b.set(i); });
        return b;
    }
    static HSet256 from_bitvec(const BitVec& b) {
        HSet256 s;
        b.for_each([&](std::size_t i) {
            if (i >= 256) throw std::out_of_range("history set does not fit in 256 bits");
            s.set(static_cast<unsigned>(i));
        });
        return s;
    }
};

struct HSet256Hash {
    std::size_t operator()(const HSet256& s) const noexcept {
        std::uint64_t h = 0x243f6a8885a308d3ull;
        for (auto x : s.w) {
            h ^= x;
            h *= 0x9e3779b97f4a7c15ull;
            h ^= h >> 29;
        }
        return static_cast<std::size_t>(h);
    }
};

}  // namespace causalspace
