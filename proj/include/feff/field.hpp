#pragma once

// Component arrays with abstract-index slot descriptors.
//
// A slot is either a tensor index (range n, chart coordinates) or a tractor
// index (range n + 2, frame slots Y, Z_1..Z_n, X), and is upper or lower.
// Components are stored row major with the first slot varying slowest.

#include <algorithm>
#include <array>
#include <cassert>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace feff {

enum class IndexKind : unsigned char { Tensor, Tractor };
enum class Variance : unsigned char { Upper, Lower };

struct Slot {
  IndexKind kind = IndexKind::Tensor;
  Variance var = Variance::Lower;
  friend bool operator==(const Slot&, const Slot&) = default;
};

inline constexpr Slot kUp{IndexKind::Tensor, Variance::Upper};
inline constexpr Slot kDown{IndexKind::Tensor, Variance::Lower};
inline constexpr Slot kTUp{IndexKind::Tractor, Variance::Upper};
inline constexpr Slot kTDown{IndexKind::Tractor, Variance::Lower};

inline constexpr int kMaxRank = 8;
using Index = std::array<int, kMaxRank>;

class Shape {
 public:
  Shape() = default;
  Shape(int n, std::vector<Slot> slots) : n_(n), slots_(std::move(slots)) {
    if (slots_.size() > kMaxRank) throw std::invalid_argument("rank too large");
    size_ = 1;
    for (const Slot& s : slots_) size_ *= static_cast<std::size_t>(extent_of(s));
  }

  int dim() const { return n_; }
  int rank() const { return static_cast<int>(slots_.size()); }
  const std::vector<Slot>& slots() const { return slots_; }
  const Slot& slot(int i) const { return slots_[static_cast<std::size_t>(i)]; }
  int extent(int i) const { return extent_of(slot(i)); }
  int extent_of(const Slot& s) const { return s.kind == IndexKind::Tensor ? n_ : n_ + 2; }
  std::size_t size() const { return size_; }

  std::size_t flat(const Index& idx) const {
    std::size_t off = 0;
    for (int i = 0; i < rank(); ++i) off = off * static_cast<std::size_t>(extent(i)) + static_cast<std::size_t>(idx[i]);
    return off;
  }
  Index unflat(std::size_t off) const {
    Index idx{};
    for (int i = rank() - 1; i >= 0; --i) {
      const auto e = static_cast<std::size_t>(extent(i));
      idx[i] = static_cast<int>(off % e);
      off /= e;
    }
    return idx;
  }

  Shape prepend(Slot s) const {
    std::vector<Slot> v{s};
    v.insert(v.end(), slots_.begin(), slots_.end());
    return Shape(n_, v);
  }

  friend bool operator==(const Shape& a, const Shape& b) { return a.n_ == b.n_ && a.slots_ == b.slots_; }

 private:
  int n_ = 0;
  std::vector<Slot> slots_;
  std::size_t size_ = 1;
};

template <class T>
class Field {
 public:
  Field() = default;
  Field(Shape shape, T fill) : shape_(std::move(shape)), c_(shape_.size(), fill) {}

  const Shape& shape() const { return shape_; }
  int rank() const { return shape_.rank(); }
  std::size_t size() const { return c_.size(); }

  T& operator[](std::size_t i) { return c_[i]; }
  const T& operator[](std::size_t i) const { return c_[i]; }
  T& at(const Index& idx) { return c_[shape_.flat(idx)]; }
  const T& at(const Index& idx) const { return c_[shape_.flat(idx)]; }

  template <class... I>
  T& operator()(I... i) {
    static_assert(sizeof...(I) <= kMaxRank);
    assert(sizeof...(I) == static_cast<std::size_t>(rank()));
    return c_[shape_.flat(Index{static_cast<int>(i)...})];
  }
  template <class... I>
  const T& operator()(I... i) const {
    static_assert(sizeof...(I) <= kMaxRank);
    assert(sizeof...(I) == static_cast<std::size_t>(rank()));
    return c_[shape_.flat(Index{static_cast<int>(i)...})];
  }

  std::span<T> components() { return c_; }
  std::span<const T> components() const { return c_; }

 private:
  Shape shape_;
  std::vector<T> c_;
};

using NumField = Field<double>;

inline double max_abs(const NumField& f) {
  double m = 0.0;
  for (double v : f.components()) m = std::max(m, v < 0 ? -v : v);
  return m;
}

}  // namespace feff
