#pragma once

// Rank-2 free group: letters, reduced words and the uniform step measure.

#include <array>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace cosetwalk {

enum class Axis : std::uint8_t { A = 0, B = 1 };

inline constexpr Axis other(Axis x) noexcept { return x == Axis::A ? Axis::B : Axis::A; }
inline constexpr char axis_char(Axis x) noexcept { return x == Axis::A ? 'a' : 'b'; }

// Encoded as 2*axis + (sign < 0): a, a^-1, b, b^-1.
enum class Letter : std::uint8_t { a = 0, A = 1, b = 2, B = 3 };

inline constexpr std::array<Letter, 4> kLetters{Letter::a, Letter::A, Letter::b, Letter::B};

inline constexpr Letter make_letter(Axis x, int sign) noexcept {
  return static_cast<Letter>(2 * static_cast<int>(x) + (sign < 0 ? 1 : 0));
}
inline constexpr Axis axis(Letter l) noexcept { return static_cast<Axis>(static_cast<int>(l) >> 1); }
inline constexpr int sign(Letter l) noexcept { return (static_cast<int>(l) & 1) ? -1 : +1; }
inline constexpr Letter inverse(Letter l) noexcept {
  return static_cast<Letter>(static_cast<int>(l) ^ 1);
}
inline constexpr int index(Letter l) noexcept { return static_cast<int>(l); }

// Text form: a, A (= a^-1), b, B (= b^-1).
inline constexpr char to_char(Letter l) noexcept { return "aAbB"[index(l)]; }

inline Letter letter_from_char(char c) {
  switch (c) {
    case 'a': return Letter::a;
    case 'A': return Letter::A;
    case 'b': return Letter::b;
    case 'B': return Letter::B;
    default: throw PreconditionError(std::string("not a letter: '") + c + "'");
  }
}

// A freely reduced word. Letters are packed one per byte so short words stay
// inside the small-string buffer, which keeps interning tables compact.
class Word {
 public:
  Word() = default;

  // Reduces while appending, so any letter sequence is accepted.
  static Word from_letters(const std::vector<Letter>& letters) {
    Word w;
    for (Letter l : letters) w.push_reduce(l);
    return w;
  }

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  Letter operator[](std::size_t i) const noexcept { return static_cast<Letter>(data_[i]); }
  Letter front() const noexcept { return static_cast<Letter>(data_.front()); }
  Letter back() const noexcept { return static_cast<Letter>(data_.back()); }

  // Right-multiplies by one letter, cancelling against the last letter.
  void push_reduce(Letter l) {
    if (!data_.empty() && static_cast<Letter>(data_.back()) == inverse(l)) {
      data_.pop_back();
    } else {
      data_.push_back(static_cast<char>(l));
    }
  }

  std::vector<Letter> letters() const {
    std::vector<Letter> out;
    out.reserve(data_.size());
    for (char c : data_) out.push_back(static_cast<Letter>(c));
    return out;
  }

  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;

  const std::string& bytes() const noexcept { return data_; }

 private:
  std::string data_;
};

struct WordHash {
  std::size_t operator()(const Word& w) const noexcept { return std::hash<std::string>{}(w.bytes()); }
};

inline Word reduce_concat(const Word& left, const Word& right) {
  Word out = left;
  for (std::size_t i = 0; i < right.size(); ++i) out.push_reduce(right[i]);
  return out;
}

inline Word inverse(const Word& w) {
  Word out;
  for (std::size_t i = w.size(); i-- > 0;) out.push_reduce(inverse(w[i]));
  return out;
}

// The empty word is written "e".
inline std::string to_string(const Word& w) {
  if (w.empty()) return "e";
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) s.push_back(to_char(w[i]));
  return s;
}

inline Word parse_word(std::string_view text) {
  Word w;
  if (text == "e") return w;
  for (char c : text) w.push_reduce(letter_from_char(c));
  return w;
}

inline std::ostream& operator<<(std::ostream& os, const Word& w) { return os << to_string(w); }

// Uniform probability on the 2*rank generators and their inverses. Each weight
// is the exact rational 1/(2*rank).
class StepMeasure {
 public:
  int rank() const noexcept { return rank_; }
  int support_size() const noexcept { return 2 * rank_; }
  std::int64_t weight_numerator() const noexcept { return 1; }
  std::int64_t weight_denominator() const noexcept { return 2 * rank_; }
  double weight() const noexcept { return 1.0 / (2.0 * rank_); }
  // Weight of a rank-2 letter; the walk engines only use rank 2.
  double operator()(Letter) const noexcept { return weight(); }

  friend StepMeasure step_measure(int rank);

 private:
  explicit StepMeasure(int rank) : rank_(rank) {}
  int rank_;
};

inline StepMeasure step_measure(int rank) {
  if (rank < 2) throw PreconditionError("step measure requires rank >= 2, got " + std::to_string(rank));
  return StepMeasure(rank);
}

}  // namespace cosetwalk
