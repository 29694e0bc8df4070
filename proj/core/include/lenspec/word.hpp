#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lenspec {

// Element of a free group on generators a, b, c, ... Letter code 2g is
// generator g, code 2g + 1 its inverse. Text form uses lowercase for
// generators and uppercase for inverses ("aB" = a b^-1).
class Word {
 public:
  using Letter = std::uint8_t;

  Word() = default;
  explicit Word(std::vector<Letter> letters);

  static Word parse(std::string_view text);
  std::string str() const;

  std::span<const Letter> letters() const { return letters_; }
  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  Letter operator[](std::size_t i) const { return letters_[i]; }

  Word inverse() const;
  Word power(int k) const;
  // Concatenation followed by free reduction.
  Word operator*(const Word& other) const;

  bool is_cyclically_reduced() const;
  bool is_primitive() const;
  Word rotated(std::size_t shift) const;
  // Cyclic reduction of a freely reduced word: a conjugate that is cyclically reduced.
  Word cyclically_reduced() const;

  // Lexicographically least rotation, optionally also over rotations of the inverse.
  Word canonical(bool unoriented) const;

  // Largest generator index used, or -1 for the empty word.
  int max_generator() const;

  auto operator<=>(const Word&) const = default;
  bool operator==(const Word&) const = default;

 private:
  std::vector<Letter> letters_;
};

constexpr Word::Letter inverse_letter(Word::Letter x) { return x ^ 1u; }
constexpr Word::Letter generator_letter(int g) { return static_cast<Word::Letter>(2 * g); }

}  // namespace lenspec
