#include "lenspec/word.hpp"

#include <algorithm>
#include <cctype>

#include "lenspec/errors.hpp"

namespace lenspec {

namespace {

void reduce_into(std::vector<Word::Letter>& out, Word::Letter x) {
  if (!out.empty() && out.back() == inverse_letter(x)) {
    out.pop_back();
  } else {
    out.push_back(x);
  }
}

}  // namespace

Word::Word(std::vector<Letter> letters) {
  letters_.reserve(letters.size());
  for (Letter x : letters) reduce_into(letters_, x);
}

Word Word::parse(std::string_view text) {
  std::vector<Letter> letters;
  for (char ch : text) {
    const unsigned char c = static_cast<unsigned char>(ch);
    if (c >= 'a' && c <= 'z') {
      letters.push_back(static_cast<Letter>(2 * (c - 'a')));
    } else if (c >= 'A' && c <= 'Z') {
      letters.push_back(static_cast<Letter>(2 * (c - 'A') + 1));
    } else {
      throw DataError("invalid letter '" + std::string(1, ch) + "' in word \"" +
                      std::string(text) + "\"");
    }
  }
  Word w(letters);
  if (w.size() != letters.size()) {
    throw DataError("word \"" + std::string(text) + "\" is not freely reduced");
  }
  return w;
}

std::string Word::str() const {
  std::string s;
  s.reserve(letters_.size());
  for (Letter x : letters_) {
    const char base = (x & 1u) ? 'A' : 'a';
    s.push_back(static_cast<char>(base + x / 2));
  }
  return s;
}

Word Word::inverse() const {
  Word w;
  w.letters_.reserve(letters_.size());
  for (auto it = letters_.rbegin(); it != letters_.rend(); ++it) {
    w.letters_.push_back(inverse_letter(*it));
  }
  return w;
}

Word Word::power(int k) const {
  if (k < 0) return inverse().power(-k);
  Word out;
  for (int i = 0; i < k; ++i) out = out * *this;
  return out;
}

Word Word::operator*(const Word& other) const {
  Word w = *this;
  for (Letter x : other.letters_) reduce_into(w.letters_, x);
  return w;
}

bool Word::is_cyclically_reduced() const {
  return letters_.size() <= 1 || letters_.front() != inverse_letter(letters_.back());
}

bool Word::is_primitive() const {
  const std::size_t n = letters_.size();
  if (n == 0) return false;
  for (std::size_t d = 1; d < n; ++d) {
    if (n % d != 0) continue;
    bool periodic = true;
    for (std::size_t i = d; i < n && periodic; ++i) periodic = letters_[i] == letters_[i - d];
    if (periodic) return false;
  }
  return true;
}

Word Word::rotated(std::size_t shift) const {
  Word w;
  if (letters_.empty()) return w;
  const std::size_t n = letters_.size();
  shift %= n;
  w.letters_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) w.letters_.push_back(letters_[(i + shift) % n]);
  return w;
}

Word Word::cyclically_reduced() const {
  std::size_t lo = 0;
  std::size_t hi = letters_.size();
  while (hi - lo >= 2 && letters_[lo] == inverse_letter(letters_[hi - 1])) {
    ++lo;
    --hi;
  }
  Word w;
  w.letters_.assign(letters_.begin() + static_cast<std::ptrdiff_t>(lo),
                    letters_.begin() + static_cast<std::ptrdiff_t>(hi));
  return w;
}

Word Word::canonical(bool unoriented) const {
  Word best = *this;
  for (std::size_t i = 1; i < letters_.size(); ++i) best = std::min(best, rotated(i));
  if (unoriented) {
    const Word inv = inverse();
    for (std::size_t i = 0; i < inv.size(); ++i) best = std::min(best, inv.rotated(i));
  }
  return best;
}

int Word::max_generator() const {
  int g = -1;
  for (Letter x : letters_) g = std::max(g, static_cast<int>(x / 2));
  return g;
}

}  // namespace lenspec
