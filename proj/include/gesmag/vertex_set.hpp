#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

namespace gesmag {

using VertexId = int;

inline constexpr int kMaxVertices = 64;

/// A set of vertices of a graph with at most 64 vertices, stored as a bitmask.
/// Iteration visits members in ascending VertexId order.
class VertexSet {
public:
    class iterator {
    public:
        using iterator_category = std::forward_iterator_tag;
        using value_type = VertexId;
        using difference_type = std::ptrdiff_t;
        using pointer = const VertexId*;
        using reference = VertexId;

        constexpr iterator() = default;
        constexpr explicit iterator(std::uint64_t rest) : rest_(rest) {}

        constexpr VertexId operator*() const { return std::countr_zero(rest_); }
        constexpr iterator& operator++() {
            rest_ &= rest_ - 1;
            return *this;
        }
        constexpr iterator operator++(int) {
            iterator tmp = *this;
            ++*this;
            return tmp;
        }
        constexpr bool operator==(const iterator&) const = default;

    private:
        std::uint64_t rest_ = 0;
    };

    constexpr VertexSet() = default;
    constexpr explicit VertexSet(std::uint64_t bits) : bits_(bits) {}
    constexpr VertexSet(std::initializer_list<VertexId> vs) {
        for (VertexId v : vs) insert(v);
    }

    static constexpr VertexSet single(VertexId v) { return VertexSet(std::uint64_t{1} << v); }
    /// {0, 1, ..., n-1}
    static constexpr VertexSet range(int n) {
        return n >= 64 ? VertexSet(~std::uint64_t{0}) : VertexSet((std::uint64_t{1} << n) - 1);
    }
    static VertexSet from(const std::vector<VertexId>& vs) {
        VertexSet s;
        for (VertexId v : vs) s.insert(v);
        return s;
    }

    constexpr std::uint64_t bits() const { return bits_; }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr int size() const { return std::popcount(bits_); }
    constexpr bool contains(VertexId v) const { return (bits_ >> v) & 1U; }
    constexpr void insert(VertexId v) { bits_ |= std::uint64_t{1} << v; }
    constexpr void erase(VertexId v) { bits_ &= ~(std::uint64_t{1} << v); }

    /// Smallest member by index. Undefined on the empty set.
    constexpr VertexId min() const { return std::countr_zero(bits_); }
    constexpr VertexId max() const { return 63 - std::countl_zero(bits_); }

    constexpr bool subset_of(VertexSet o) const { return (bits_ & ~o.bits_) == 0; }
    constexpr bool intersects(VertexSet o) const { return (bits_ & o.bits_) != 0; }

    constexpr iterator begin() const { return iterator(bits_); }
    constexpr iterator end() const { return iterator(0); }

    std::vector<VertexId> to_vector() const { return {begin(), end()}; }

    constexpr VertexSet operator|(VertexSet o) const { return VertexSet(bits_ | o.bits_); }
    constexpr VertexSet operator&(VertexSet o) const { return VertexSet(bits_ & o.bits_); }
    constexpr VertexSet operator-(VertexSet o) const { return VertexSet(bits_ & ~o.bits_); }
    constexpr VertexSet& operator|=(VertexSet o) {
        bits_ |= o.bits_;
        return *this;
    }
    constexpr VertexSet& operator&=(VertexSet o) {
        bits_ &= o.bits_;
        return *this;
    }
    constexpr VertexSet& operator-=(VertexSet o) {
        bits_ &= ~o.bits_;
        return *this;
    }
    constexpr VertexSet with(VertexId v) const { return VertexSet(bits_ | (std::uint64_t{1} << v)); }
    constexpr VertexSet without(VertexId v) const { return VertexSet(bits_ & ~(std::uint64_t{1} << v)); }

    constexpr bool operator==(const VertexSet&) const = default;
    /// Lexicographic order on the ascending member lists.
    friend bool lex_less(VertexSet a, VertexSet b) {
        auto ia = a.begin(), ib = b.begin();
        for (; ia != a.end() && ib != b.end(); ++ia, ++ib) {
            if (*ia != *ib) return *ia < *ib;
        }
        return ia == a.end() && ib != b.end();
    }
    /// Strict weak order used for ordered containers (not lexicographic).
    constexpr bool operator<(const VertexSet& o) const { return bits_ < o.bits_; }

    std::string str() const {
        std::string s = "{";
        bool first = true;
        for (VertexId v : *this) {
            if (!first) s += ",";
            s += std::to_string(v);
            first = false;
        }
        return s + "}";
    }

private:
    std::uint64_t bits_ = 0;
};

/// Calls f(subset) for every subset of `s`, including the empty set and `s` itself.
template <typename F>
void for_each_subset(VertexSet s, F&& f) {
    const std::uint64_t full = s.bits();
    std::uint64_t sub = 0;
    while (true) {
        f(VertexSet(sub));
        if (sub == full) break;
        sub = (sub - full) & full;
    }
}

/// Calls f(subset) for every subset of `s` with at most `k` members.
template <typename F>
void for_each_subset_up_to(VertexSet s, int k, F&& f) {
    std::vector<VertexId> members = s.to_vector();
    std::function<void(std::size_t, VertexSet)> rec = [&](std::size_t from, VertexSet cur) {
        f(cur);
        if (cur.size() >= k) return;
        for (std::size_t i = from; i < members.size(); ++i) rec(i + 1, cur.with(members[i]));
    };
    rec(0, VertexSet{});
}

}  // namespace gesmag

template <>
struct std::hash<gesmag::VertexSet> {
    std::size_t operator()(const gesmag::VertexSet& s) const noexcept {
        return std::hash<std::uint64_t>{}(s.bits());
    }
};
