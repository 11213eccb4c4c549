#pragma once

#include <algorithm>
#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace causalspace {

// Arbitrary-length set of non-negative integers, stored as little-endian
// 64-bit words. Trailing zero words are always trimmed, so equal sets have
// equal representations.
class BitVec {
public:
    BitVec() = default;
    BitVec(std::initializer_list<std::size_t> elems) {
        for (auto x : elems) set(x);
    }
    template <class It>
    BitVec(It first, It last) {
        for (; first != last; ++first) set(static_cast<std::size_t>(*first));
    }

    static BitVec from_u64(std::uint64_t v) {
        BitVec b;
        if (v) b.w_.push_back(v);
        return b;
    }

    bool test(std::size_t i) const {
        std::size_t k = i / 64;
        return k < w_.size() && ((w_[k] >> (i % 64)) & 1u);
    }
    void set(std::size_t i) {
        std::size_t k = i / 64;
        if (k >= w_.size()) w_.resize(k + 1, 0);
        w_[k] |= std::uint64_t{1} << (i % 64);
    }
    void reset(std::size_t i) {
        std::size_t k = i / 64;
        if (k >= w_.size()) return;
        w_[k] &= ~(std::uint64_t{1} << (i % 64));
        trim();
    }

    bool empty() const { return w_.empty(); }
    explicit operator bool() const { return !w_.empty(); }

    std::size_t count() const {
        std::size_t c = 0;
        for (auto x : w_) c += static_cast<std::size_t>(std::popcount(x));
        return c;
    }

    std::size_t bit_length() const {
        if (w_.empty()) return 0;
        return 64 * (w_.size() - 1) + static_cast<std::size_t>(std::bit_width(w_.back()));
    }

    // Only valid when bit_length() <= 64.
    std::uint64_t to_u64() const {
        if (w_.size() > 1) throw std::overflow_error("BitVec does not fit in 64 bits");
        return w_.empty() ? 0 : w_[0];
    }
    bool fits_u64() const { return w_.size() <= 1; }

    const std::vector<std::uint64_t>& words() const { return w_; }

    template <class F>
    void for_each(F&& f) const {
        for (std::size_t k = 0; k < w_.size(); ++k) {
            std::uint64_t x = w_[k];
            while (x) {
                int b = std::countr_zero(x);
                f(k * 64 + static_cast<std::size_t>(b));
                x &= x - 1;
            }
        }
    }

    std::vector<std::size_t> elements() const {
        std::vector<std::size_t> out;
        out.reserve(count());
        for_each([&](std::size_t i) { out.push_back(i); });
        return out;
    }

    BitVec& operator|=(const BitVec& o) {
        if (o.w_.size() > w_.size()) w_.resize(o.w_.size(), 0);
        for (std::size_t k = 0; k < o.w_.size(); ++k) w_[k] |= o.w_[k];
        return *this;
    }
    BitVec& operator&=(const BitVec& o) {
        if (w_.size() > o.w_.size()) w_.resize(o.w_.size());
        for (std::size_t k = 0; k < w_.size(); ++k) w_[k] &= o.w_[k];
        trim();
        return *this;
    }
    BitVec& operator^=(const BitVec& o) {
        if (o.w_.size() > w_.size()) w_.resize(o.w_.size(), 0);
        for (std::size_t k = 0; k < o.w_.size(); ++k) w_[k] ^= o.w_[k];
        trim();
        return *this;
    }
    // Set difference.
    BitVec& operator-=(const BitVec& o) {
        std::size_t m = std::min(w_.size(), o.w_.size());
        for (std::size_t k = 0; k < m; ++k) w_[k] &= ~o.w_[k];
        trim();
        return *this;
    }
    friend BitVec operator|(BitVec a, const BitVec& b) { return a |= b; }
    friend BitVec operator&(BitVec a, const BitVec& b) { return a &= b; }
    friend BitVec operator^(BitVec a, const BitVec& b) { return a ^= b; }
    friend BitVec operator-(BitVec a, const BitVec& b) { return a -= b; }

    bool is_subset_of(const BitVec& o) const {
        if (w_.size() > o.w_.size()) return false;
        for (std::size_t k = 0; k < w_.size(); ++k)
            if (w_[k] & ~o.w_[k]) return false;
        return true;
    }
    bool intersects(const BitVec& o) const {
        std::size_t m = std::min(w_.size(), o.w_.size());
        for (std::size_t k = 0; k < m; ++k)
            if (w_[k] & o.w_[k]) return true;
        return false;
    }

    friend bool operator==(const BitVec&, const BitVec&) = default;

    // Numeric order of the underlying integers.
    friend std::strong_ordering operator<=>(const BitVec& a, const BitVec& b) {
        if (a.w_.size() != b.w_.size()) return a.w_.size() <=> b.w_.size();
        for (std::size_t k = a.w_.size(); k-- > 0;)
            if (a.w_[k] != b.w_[k]) return a.w_[k] <=> b.w_[k];
        return std::strong_ordering::equal;
    }

    std::size_t hash() const {
        std::uint64_t h = 0x9e3779b97f4a7c15ull ^ w_.size();
        for (auto x : w_) {
            h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            h *= 0xff51afd7ed558ccdull;
        }
        return static_cast<std::size_t>(h ^ (h >> 33));
    }

    // Minimal big-endian byte string; zero encodes as a single 0x00 byte.
    std::vector<std::uint8_t> to_bytes_be() const {
        std::size_t n = std::max<std::size_t>((bit_length() + 7) / 8, 1);
        std::vector<std::uint8_t> out(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t k = i / 8;
            if (k < w_.size()) out[n - 1 - i] = static_cast<std::uint8_t>(w_[k] >> (8 * (i % 8)));
        }
        return out;
    }
    static BitVec from_bytes_be(const std::uint8_t* p, std::size_t n) {
        BitVec b;
        b.w_.assign((n + 7) / 8, 0);
        for (std::size_t i = 0; i < n; ++i)
            b.w_[i / 8] |= std::uint64_t{p[n - 1 - i]} << (8 * (i % 8));
        b.trim();
        return b;
    }

    std::string to_decimal() const {
        if (w_.empty()) return "0";
        std::vector<std::uint64_t> q = w_;
        std::string digits;
        constexpr std::uint64_t base = 10000000000000000000ull;  // 10^19
        while (!q.empty()) {
            unsigned __int128 rem = 0;
            for (std::size_t k = q.size(); k-- > 0;) {
                unsigned __int128 cur = (rem << 64) | q[k];
                q[k] = static_cast<std::uint64_t>(cur / base);
                rem = cur % base;
            }
            while (!q.empty() && q.back() == 0) q.pop_back();
            auto r = static_cast<std::uint64_t>(rem);
            for (int i = 0; i < 19; ++i) {
                digits.push_back(static_cast<char>('0' + r % 10));
                r /= 10;
                if (q.empty() && r == 0) break;
            }
        }
        while (digits.size() > 1 && digits.back() == '0') digits.pop_back();
        std::reverse(digits.begin(), digits.end());
        return digits;
    }
    static BitVec from_decimal(std::string_view s) {
        if (s.empty()) throw std::invalid_argument("empty number");
        BitVec b;
        for (char c : s) {
            if (c < '0' || c > '9') throw std::invalid_argument("not a decimal number: " + std::string(s));
            std::uint64_t carry = static_cast<std::uint64_t>(c - '0');
            for (auto& x : b.w_) {
                unsigned __int128 cur = static_cast<unsigned __int128>(x) * 10 + carry;
                x = static_cast<std::uint64_t>(cur);
                carry = static_cast<std::uint64_t>(cur >> 64);
            }
            if (carry) b.w_.push_back(carry);
        }
        b.trim();
        return b;
    }

    std::string to_binary() const {
        std::size_t n = bit_length();
        if (n == 0) return "0";
        std::string s;
        for (std::size_t i = n; i-- > 0;) s.push_back(test(i) ? '1' : '0');
        return s;
    }

private:
    void trim() {
        while (!w_.empty() && w_.back() == 0) w_.pop_back();
    }
    std::vector<std::uint64_t> w_;
};

// Free-function spellings of the basic set operations.
inline BitVec bitvec(const std::vector<std::int64_t>& elems) {
    BitVec b;
    for (auto x : elems) {
        if (x < 0) throw std::invalid_argument("bitvec: negative element");
        b.set(static_cast<std::size_t>(x));
    }
    return b;
}
inline BitVec sub(const BitVec& u, const BitVec& v) { return u - v; }
inline bool is_subset(const BitVec& u, const BitVec& v) { return u.is_subset_of(v); }
inline std::vector<std::size_t> iter_bitvec(const BitVec& u) { return u.elements(); }

}  // namespace causalspace

template <>
struct std::hash<causalspace::BitVec> {
    std::size_t operator()(const causalspace::BitVec& b) const noexcept { return b.hash(); }
};
