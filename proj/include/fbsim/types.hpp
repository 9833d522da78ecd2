#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fbsim {

inline constexpr int kNumTopics = 14;
inline constexpr int kNumStances = 5;

/// Political stance of an article, from -2 (extreme liberal) to +2
/// (extreme conservative). Column index in topic x stance matrices is
/// value + 2.
class Stance {
 public:
  constexpr Stance() = default;

  static Stance from_value(int value) {
    if (value < -2 || value > 2) {
      throw std::invalid_argument("stance value out of range: " + std::to_string(value));
    }
    Stance s;
    s.value_ = value;
    return s;
  }
  static Stance from_index(int index) { return from_value(index - 2); }

  constexpr int value() const { return value_; }
  constexpr int index() const { return value_ + 2; }

  friend constexpr bool operator==(Stance a, Stance b) { return a.value_ == b.value_; }

 private:
  int value_ = 0;
};

using TopicId = int;

inline constexpr std::array<std::string_view, kNumTopics> kTopicNames = {
    "abortion",    "environment",     "guns",          "health care", "immigration",
    "LGBTQIA",     "taxes",           "technology",    "trade",       "Trump impeachment",
    "US military", "welfare",         "US 2020 election", "racism"};

inline std::string_view topic_name(TopicId t) { return kTopicNames.at(static_cast<std::size_t>(t)); }

/// Dense 14x5 matrix indexed by (topic, stance index).
template <class T>
class TopicStanceMatrix {
 public:
  static constexpr std::size_t kSize = kNumTopics * kNumStances;

  TopicStanceMatrix() { cells_.fill(T{}); }

  T& operator()(TopicId t, int s) { return cells_[static_cast<std::size_t>(t * kNumStances + s)]; }
  const T& operator()(TopicId t, int s) const {
    return cells_[static_cast<std::size_t>(t * kNumStances + s)];
  }

  T& at(std::size_t flat) { return cells_.at(flat); }
  const T& at(std::size_t flat) const { return cells_.at(flat); }

  const std::array<T, kSize>& cells() const { return cells_; }

  T row_sum(TopicId t) const {
    T sum{};
    for (int s = 0; s < kNumStances; ++s) sum += (*this)(t, s);
    return sum;
  }

  T total() const {
    T sum{};
    for (const T& v : cells_) sum += v;
    return sum;
  }

  friend bool operator==(const TopicStanceMatrix&, const TopicStanceMatrix&) = default;

 private:
  std::array<T, kSize> cells_;
};

using PreferenceMatrix = TopicStanceMatrix<double>;
using UtilityMatrix = TopicStanceMatrix<std::uint8_t>;

using Rng = std::mt19937_64;

/// Derives an independent 64-bit seed for a named sub-stream (splitmix64 mix).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ stream) ^ index);
}

}  // namespace fbsim
