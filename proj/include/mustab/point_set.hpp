#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace mustab {

using Point = std::size_t;

/// Hard limit on the number of points: point sets are 64-bit masks.
inline constexpr std::size_t kMaxPoints = 64;

/// Subset of the points of a finite space, stored as a bitmask.
class PointSet {
 public:
  constexpr PointSet() = default;

  static constexpr PointSet from_bits(std::uint64_t bits) {
    PointSet s;
    s.bits_ = bits;
    return s;
  }
  static constexpr PointSet all(std::size_t n) {
    return from_bits(n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1);
  }
  static constexpr PointSet single(Point p) { return from_bits(std::uint64_t{1} << p); }

  constexpr bool contains(Point p) const { return (bits_ >> p) & 1U; }
  constexpr void insert(Point p) { bits_ |= std::uint64_t{1} << p; }
  constexpr void erase(Point p) { bits_ &= ~(std::uint64_t{1} << p); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool is_subset_of(PointSet other) const { return (bits_ & ~other.bits_) == 0; }

  /// Least element; undefined on the empty set.
  constexpr Point first() const { return static_cast<Point>(std::countr_zero(bits_)); }

  /// Complement within {0, ..., n-1}.
  constexpr PointSet complement(std::size_t n) const { return from_bits(~bits_ & all(n).bits_); }

  constexpr PointSet operator&(PointSet o) const { return from_bits(bits_ & o.bits_); }
  constexpr PointSet operator|(PointSet o) const { return from_bits(bits_ | o.bits_); }
  constexpr PointSet operator-(PointSet o) const { return from_bits(bits_ & ~o.bits_); }
  constexpr PointSet& operator&=(PointSet o) { bits_ &= o.bits_; return *this; }
  constexpr PointSet& operator|=(PointSet o) { bits_ |= o.bits_; return *this; }

  friend constexpr bool operator==(PointSet, PointSet) = default;

  template <class Visit>
  constexpr void for_each(Visit&& visit) const {
    for (std::uint64_t b = bits_; b != 0; b &= b - 1) {
      visit(static_cast<Point>(std::countr_zero(b)));
    }
  }

  std::vector<Point> to_vector() const {
    std::vector<Point> out;
    out.reserve(size());
    for_each([&](Point p) { out.push_back(p); });
    return out;
  }

 private:
  std::uint64_t bits_ = 0;
};

}  // namespace mustab
