#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace granular {

// A finite binary outcome history (a node of the full binary tree). Bit i is
// the outcome of step i; the empty history is the root. Bits are packed so
// that long simulation paths stay cheap as map keys.
class History {
 public:
  History() = default;

  static History from_string(std::string_view bits) {
    History h;
    for (char c : bits) {
      if (c == '0')
        h.push_back(0);
      else if (c == '1')
        h.push_back(1);
      else
        throw std::invalid_argument("history strings may contain only 0 and 1");
    }
    return h;
  }

  // The i-th history of length `len` in lexicographic order (bit 0 most
  // significant), used for length-then-lex enumeration.
  static History from_index(std::size_t len, std::uint64_t index) {
    History h;
    for (std::size_t i = 0; i < len; ++i)
      h.push_back(static_cast<int>((index >> (len - 1 - i)) & 1u));
    return h;
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  int operator[](std::size_t i) const {
    return static_cast<int>((words_[i >> 6] >> (i & 63u)) & 1u);
  }

  int last() const { return (*this)[size_ - 1]; }

  void push_back(int bit) {
    std::size_t word = size_ >> 6;
    if (word == words_.size()) words_.push_back(0);
    if (bit) words_[word] |= (std::uint64_t{1} << (size_ & 63u));
    ++size_;
  }

  void pop_back() {
    --size_;
    std::size_t needed = (size_ + 63) >> 6;
    if (words_.size() > needed)
      words_.resize(needed);
    else
      words_[size_ >> 6] &= ~(std::uint64_t{1} << (size_ & 63u));
  }

  History child(int bit) const {
    History h(*this);
    h.push_back(bit);
    return h;
  }

  History parent() const {
    if (empty()) throw std::logic_error("the empty history has no parent");
    History h(*this);
    h.pop_back();
    return h;
  }

  History prefix(std::size_t n) const {
    if (n > size_) throw std::out_of_range("prefix length exceeds history length");
    History h;
    h.size_ = n;
    h.words_.assign(words_.begin(), words_.begin() + ((n + 63) >> 6));
    if (n & 63u) h.words_.back() &= (std::uint64_t{1} << (n & 63u)) - 1;
    return h;
  }

  bool is_prefix_of(const History& other) const {
    if (size_ > other.size_) return false;
    std::size_t full = size_ >> 6;
    for (std::size_t w = 0; w < full; ++w)
      if (words_[w] != other.words_[w]) return false;
    if (size_ & 63u) {
      std::uint64_t mask = (std::uint64_t{1} << (size_ & 63u)) - 1;
      if ((words_[full] & mask) != (other.words_[full] & mask)) return false;
    }
    return true;
  }

  std::string to_string() const {
    std::string s;
    s.reserve(size_);
    for (std::size_t i = 0; i < size_; ++i) s.push_back((*this)[i] ? '1' : '0');
    return s;
  }

  friend bool operator==(const History& a, const History& b) {
    return a.size_ == b.size_ && a.words_ == b.words_;
  }

  // Length-then-lexicographic order, the row order of strategy table files.
  friend bool length_lex_less(const History& a, const History& b) {
    if (a.size_ != b.size_) return a.size_ < b.size_;
    for (std::size_t i = 0; i < a.size_; ++i)
      if (a[i] != b[i]) return a[i] < b[i];
    return false;
  }

  std::size_t hash() const {
    auto mix = [](std::uint64_t x) {
      x ^= x >> 33;
      x *= 0xff51afd7ed558ccdull;
      x ^= x >> 33;
      x *= 0xc4ceb9fe1a85ec53ull;
      x ^= x >> 33;
      return x;
    };
    std::uint64_t h = mix(0x9e3779b97f4a7c15ull ^ size_);
    for (std::uint64_t w : words_) h = mix(h ^ w);
    return static_cast<std::size_t>(h);
  }

 private:
  std::vector<std::uint64_t> words_;
  std::size_t size_ = 0;
};

struct HistoryHash {
  std::size_t operator()(const History& h) const { return h.hash(); }
};

}  // namespace granular
