#include "dfn/filter/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "dfn/core/error.hpp"

namespace dfn::filter {

std::string_view to_string(CalibrationMode m) noexcept {
  return m == CalibrationMode::kExact ? "exact" : "reservoir";
}

CalibrationMode parse_calibration_mode(std::string_view s) {
  if (s == "exact") return CalibrationMode::kExact;
  if (s == "reservoir") return CalibrationMode::kReservoir;
  throw ValidationError("unknown calibration mode '" + std::string(s) + "'");
}

namespace {

void check_keep_fraction(double keep_fraction) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw ValidationError("keep_fraction must lie in (0, 1], got " + std::to_string(keep_fraction));
  }
}

}  // namespace

float order_statistic_threshold(std::span<const float> scores, double keep_fraction) {
  check_keep_fraction(keep_fraction);
  if (scores.empty()) throw ValidationError("calibrate_threshold: empty score stream");
  const std::size_t n = scores.size();
  // The epsilon absorbs products like 0.15 * 1e6 landing a hair under an integer.
  const auto m = static_cast<std::size_t>(std::floor(keep_fraction * static_cast<double>(n) + 1e-9));
  if (m >= n) {
    const float lo = *std::min_element(scores.begin(), scores.end());
    return std::nextafter(lo, -std::numeric_limits<float>::infinity());
  }
  std::vector<float> work(scores.begin(), scores.end());
  std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(m), work.end(), std::greater<>());
  return work[m];
}

ThresholdCalibrator::ThresholdCalibrator(CalibrationMode mode, std::size_t reservoir_capacity, std::uint64_t seed)
    : mode_(mode), capacity_(reservoir_capacity), rng_(Rng::derive(seed, {0x52455356ULL})) {
  if (mode_ == CalibrationMode::kReservoir) {
    if (capacity_ == 0) throw ValidationError("reservoir capacity must be >= 1");
    kept_.reserve(capacity_);
  }
}

void ThresholdCalibrator::observe(float score) {
  ++seen_;
  if (mode_ == CalibrationMode::kExact || kept_.size() < capacity_) {
    kept_.push_back(score);
    return;
  }
  const std::uint64_t slot = rng_.below(seen_);
  if (slot < capacity_) kept_[slot] = score;
}

float ThresholdCalibrator::threshold(double keep_fraction) const {
  if (seen_ == 0) throw ValidationError("calibrate_threshold: empty score stream");
  return order_statistic_threshold(kept_, keep_fraction);
}

float calibrate_threshold(std::span<const float> scores, double keep_fraction, CalibrationMode mode,
                          std::size_t reservoir_capacity, std::uint64_t seed) {
  ThresholdCalibrator cal(mode, reservoir_capacity, seed);
  cal.observe(scores);
  return cal.threshold(keep_fraction);
}

}  // namespace dfn::filter
