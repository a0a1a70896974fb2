#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace lcdc {

/// Simulation timestamp in integer picoseconds since simulation start.
class SimTime {
 public:
  constexpr SimTime() = default;

  static constexpr SimTime ps(std::uint64_t v) { return SimTime{v}; }
  static constexpr SimTime ns(std::uint64_t v) { return SimTime{v * 1'000ULL}; }
  static constexpr SimTime us(std::uint64_t v) { return SimTime{v * 1'000'000ULL}; }
  static constexpr SimTime ms(std::uint64_t v) { return SimTime{v * 1'000'000'000ULL}; }
  static constexpr SimTime max() {
    return SimTime{std::numeric_limits<std::uint64_t>::max()};
  }

  // Rounds to the nearest picosecond. Negative or non-finite input is rejected.
  static SimTime from_seconds(double s) {
    if (!std::isfinite(s) || s < 0.0) {
      throw std::invalid_argument("SimTime::from_seconds: negative or non-finite value");
    }
    return SimTime{static_cast<std::uint64_t>(std::llround(s * 1e12))};
  }
  static SimTime from_us(double us) { return from_seconds(us * 1e-6); }

  constexpr std::uint64_t ticks() const { return ticks_; }
  constexpr double seconds() const { return static_cast<double>(ticks_) * 1e-12; }
  constexpr double micros() const { return static_cast<double>(ticks_) * 1e-6; }
  constexpr double nanos() const { return static_cast<double>(ticks_) * 1e-3; }

  constexpr auto operator<=>(const SimTime&) const = default;

  constexpr SimTime& operator+=(SimTime o) {
    ticks_ += o.ticks_;
    return *this;
  }
  friend constexpr SimTime operator+(SimTime a, SimTime b) { return SimTime{a.ticks_ + b.ticks_}; }
  // Saturates at zero; callers compare before subtracting where order matters.
  friend constexpr SimTime operator-(SimTime a, SimTime b) {
    return SimTime{a.ticks_ > b.ticks_ ? a.ticks_ - b.ticks_ : 0};
  }
  friend constexpr SimTime operator*(SimTime a, std::uint64_t k) { return SimTime{a.ticks_ * k}; }
  friend constexpr SimTime operator*(std::uint64_t k, SimTime a) { return SimTime{a.ticks_ * k}; }

 private:
  constexpr explicit SimTime(std::uint64_t t) : ticks_(t) {}
  std::uint64_t ticks_ = 0;
};

/// Time to clock `bytes` onto a link of `bits_per_second`, rounded to the picosecond.
inline SimTime serialization_time(std::uint64_t bytes, double bits_per_second) {
  return SimTime::from_seconds(static_cast<double>(bytes) * 8.0 / bits_per_second);
}

}  // namespace lcdc
