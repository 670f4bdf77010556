#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace spagg {

// A sparsity pattern p in {0,1}^M with a cached popcount. The MCMC state.
class SparsityPattern {
 public:
  SparsityPattern() = default;

  explicit SparsityPattern(int size) : size_(size), words_((size + 63) / 64, 0) {
    if (size < 0) throw std::invalid_argument("pattern size must be nonnegative");
  }

  template <typename Container>
  static SparsityPattern from_indices(int size, const Container& indices) {
    SparsityPattern p(size);
    for (int i : indices) p.set(i, true);
    return p;
  }

  static SparsityPattern from_indices(int size, std::initializer_list<int> indices) {
    return from_indices<std::initializer_list<int>>(size, indices);
  }

  int size() const { return size_; }
  int count() const { return count_; }
  bool empty() const { return count_ == 0; }
  bool full() const { return count_ == size_; }

  bool test(int i) const {
    check(i);
    return (words_[static_cast<std::size_t>(i) / 64] >> (i % 64)) & 1u;
  }

  void set(int i, bool value) {
    check(i);
    const std::uint64_t mask = std::uint64_t{1} << (i % 64);
    std::uint64_t& w = words_[static_cast<std::size_t>(i) / 64];
    const bool cur = (w & mask) != 0;
    if (cur == value) return;
    w ^= mask;
    count_ += value ? 1 : -1;
  }

  void flip(int i) {
    check(i);
    const std::uint64_t mask = std::uint64_t{1} << (i % 64);
    std::uint64_t& w = words_[static_cast<std::size_t>(i) / 64];
    w ^= mask;
    count_ += (w & mask) ? 1 : -1;
  }

  std::vector<int> support() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(count_));
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits) {
        const int b = __builtin_ctzll(bits);
        out.push_back(static_cast<int>(w * 64) + b);
        bits &= bits - 1;
      }
    }
    return out;
  }

  const std::vector<std::uint64_t>& words() const { return words_; }

  bool operator==(const SparsityPattern& other) const = default;

 private:
  void check(int i) const {
    if (i < 0 || i >= size_) throw std::out_of_range("pattern index out of range");
  }

  int size_ = 0;
  int count_ = 0;
  std::vector<std::uint64_t> words_;
};

struct PatternHash {
  std::size_t operator()(const SparsityPattern& p) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(p.size());
    for (std::uint64_t w : p.words()) {
      h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace spagg
