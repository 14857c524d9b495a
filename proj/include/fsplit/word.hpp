#pragma once

// Freely reduced words in a free group of fixed finite rank.
// Letters are nonzero integers: +i is the i-th basis generator (1-based),
// -i its inverse. Serialized as a..z for generators, A..Z for inverses.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fsplit {

struct Basis {
  int rank = 2;
  explicit Basis(int n = 2) : rank(n) {}
  bool operator==(const Basis&) const = default;
};

class Word {
 public:
  Word() = default;
  explicit Word(std::vector<int> letters);  // reduces

  static Word letter(int x);
  static Word parse(const std::string& s);  // a..z / A..Z

  const std::vector<int>& letters() const { return ls_; }
  bool empty() const { return ls_.empty(); }
  int size() const { return static_cast<int>(ls_.size()); }
  int at(int i) const { return ls_[static_cast<size_t>(i)]; }

  Word inverse() const;
  Word operator*(const Word& o) const;
  bool operator==(const Word& o) const { return ls_ == o.ls_; }
  bool operator!=(const Word& o) const { return ls_ != o.ls_; }
  bool operator<(const Word& o) const;  // shortlex

  // w * x for a single letter, reduced.
  Word push(int x) const;

  Word conjugate(const Word& c) const;  // c * w * c^-1
  std::string str() const;
  size_t hash() const;

  bool in_range(int rank) const;

 private:
  std::vector<int> ls_;
};

// shortlex letter order: 1 < -1 < 2 < -2 < ...
int letter_order(int x);
bool shortlex_less(const Word& a, const Word& b);

std::vector<int> free_reduce(std::span<const int> in);

std::ostream& operator<<(std::ostream& os, const Word& w);

}  // namespace fsplit

template <>
struct std::hash<fsplit::Word> {
  size_t operator()(const fsplit::Word& w) const { return w.hash(); }
};
