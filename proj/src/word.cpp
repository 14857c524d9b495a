#include "fsplit/word.hpp"

#include <ostream>
#include <stdexcept>

namespace fsplit {

std::vector<int> free_reduce(std::span<const int> in) {
  std::vector<int> out;
  out.reserve(in.size());
  for (int x : in) {
    if (x == 0) throw std::invalid_argument("zero letter");
    if (!out.empty() && out.back() == -x)
      out.pop_back();
    else
      out.push_back(x);
  }
  return out;
}

Word::Word(std::vector<int> letters) : ls_(free_reduce(letters)) {}

Word Word::letter(int x) {
  Word w;
  w.ls_.push_back(x);
  return w;
}

Word Word::parse(const std::string& s) {
  std::vector<int> ls;
  for (char c : s) {
    if (c >= 'a' && c <= 'z')
      ls.push_back(c - 'a' + 1);
    else if (c >= 'A' && c <= 'Z')
      ls.push_back(-(c - 'A' + 1));
    else if (c == ' ' || c == '1')
      continue;  // '1' allowed as the empty word
    else
      throw std::invalid_argument("bad word char");
  }
  return Word(std::move(ls));
}

Word Word::inverse() const {
  Word w;
  w.ls_.reserve(ls_.size());
  for (auto it = ls_.rbegin(); it != ls_.rend(); ++it) w.ls_.push_back(-*it);
  return w;
}

Word Word::operator*(const Word& o) const {
  std::vector<int> cat = ls_;
  size_t i = 0;
  while (!cat.empty() && i < o.ls_.size() && cat.back() == -o.ls_[i]) {
    cat.pop_back();
    ++i;
  }
  cat.insert(cat.end(), o.ls_.begin() + static_cast<long>(i), o.ls_.end());
  Word w;
  w.ls_ = std::move(cat);
  return w;
}

Word Word::push(int x) const {
  Word w = *this;
  if (!w.ls_.empty() && w.ls_.back() == -x)
    w.ls_.pop_back();
  else
    w.ls_.push_back(x);
  return w;
}

Word Word::conjugate(const Word& c) const { return c * (*this) * c.inverse(); }

int letter_order(int x) { return x > 0 ? 2 * (x - 1) : 2 * (-x - 1) + 1; }

bool shortlex_less(const Word& a, const Word& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  for (int i = 0; i < a.size(); ++i) {
    int oa = letter_order(a.at(i)), ob = letter_order(b.at(i));
    if (oa != ob) return oa < ob;
  }
  return false;
}

bool Word::operator<(const Word& o) const { return shortlex_less(*this, o); }

std::string Word::str() const {
  if (ls_.empty()) return "1";
  std::string s;
  for (int x : ls_) s += x > 0 ? static_cast<char>('a' + x - 1) : static_cast<char>('A' - x - 1);
  return s;
}

size_t Word::hash() const {
  size_t h = 1469598103934665603ull;
  for (int x : ls_) {
    h ^= static_cast<size_t>(x + 64);
    h *= 1099511628211ull;
  }
  return h;
}

bool Word::in_range(int rank) const {
  for (int x : ls_)
    if (x == 0 || x > rank || x < -rank) return false;
  return true;
}

std::ostream& operator<<(std::ostream& os, const Word& w) { return os << w.str(); }

}  // namespace fsplit
