#pragma once

// Keep-fraction to threshold calibration.
//
// For n scores and keep fraction f, let m = floor(f n). The threshold is
// the (m+1)-th largest score: the smallest observed value t with
// |{s : s > t}| <= m. Filtering with `score > t` then keeps at most m
// records (fewer only when scores tie at t). For m >= n the threshold is
// the float just below the minimum, so everything passes.
//
// Reservoir mode applies the same rule to a uniform sample (Algorithm R)
// of at most `capacity` scores.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "dfn/core/rng.hpp"

namespace dfn::filter {

enum class CalibrationMode { kExact, kReservoir };

std::string_view to_string(CalibrationMode m) noexcept;
CalibrationMode parse_calibration_mode(std::string_view s);

inline constexpr std::size_t kDefaultReservoirCapacity = 100'000;

// Threshold from an explicit list (the list is copied and partially sorted).
float order_statistic_threshold(std::span<const float> scores, double keep_fraction);

class ThresholdCalibrator {
 public:
  ThresholdCalibrator(CalibrationMode mode, std::size_t reservoir_capacity = kDefaultReservoirCapacity,
                      std::uint64_t seed = 0);

  void observe(float score);
  void observe(std::span<const float> scores) {
    for (float s : scores) observe(s);
  }

  std::uint64_t observed() const noexcept { return seen_; }
  std::span<const float> retained() const noexcept { return kept_; }

  // Throws ValidationError on an empty stream or keep_fraction outside (0, 1].
  float threshold(double keep_fraction) const;

 private:
  CalibrationMode mode_;
  std::size_t capacity_;
  Rng rng_;
  std::uint64_t seen_ = 0;
  std::vector<float> kept_;
};

float calibrate_threshold(std::span<const float> scores, double keep_fraction, CalibrationMode mode,
                          std::size_t reservoir_capacity = kDefaultReservoirCapacity, std::uint64_t seed = 0);

}  // namespace dfn::filter
