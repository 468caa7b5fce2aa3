#include "dfn/core/pool.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <unordered_set>

#include "dfn/core/error.hpp"
#include "dfn/core/rng.hpp"

namespace dfn {

void Pool::reserve(std::size_t n) {
  ids_.reserve(n);
  image_.reserve(n * dims_.image);
  text_.reserve(n * dims_.text);
  labels_.reserve(n);
  aligned_.reserve(n);
}

void Pool::push_back(const RecordView& r) {
  if (r.image.size() != dims_.image || r.text.size() != dims_.text) {
    throw ShapeMismatchError("record " + std::to_string(r.id) + " has dims (" +
                             std::to_string(r.image.size()) + ", " + std::to_string(r.text.size()) +
                             "), pool expects (" + std::to_string(dims_.image) + ", " +
                             std::to_string(dims_.text) + ")");
  }
  ids_.push_back(r.id);
  image_.insert(image_.end(), r.image.begin(), r.image.end());
  text_.insert(text_.end(), r.text.begin(), r.text.end());
  labels_.push_back(r.concept_label);
  aligned_.push_back(r.aligned);
}

void Pool::push_back(const Record& r) {
  push_back(RecordView{r.id, r.image, r.text, r.concept_label, r.aligned});
}

void Pool::append(const Pool& other) {
  if (other.dims_ != dims_) throw ShapeMismatchError("cannot append pools with different dims");
  ids_.insert(ids_.end(), other.ids_.begin(), other.ids_.end());
  image_.insert(image_.end(), other.image_.begin(), other.image_.end());
  text_.insert(text_.end(), other.text_.begin(), other.text_.end());
  labels_.insert(labels_.end(), other.labels_.begin(), other.labels_.end());
  aligned_.insert(aligned_.end(), other.aligned_.begin(), other.aligned_.end());
}

Pool Pool::slice(std::size_t begin, std::size_t end) const {
  Pool out(dims_);
  out.ids_.assign(ids_.begin() + begin, ids_.begin() + end);
  out.image_.assign(image_.begin() + begin * dims_.image, image_.begin() + end * dims_.image);
  out.text_.assign(text_.begin() + begin * dims_.text, text_.begin() + end * dims_.text);
  out.labels_.assign(labels_.begin() + begin, labels_.begin() + end);
  out.aligned_.assign(aligned_.begin() + begin, aligned_.begin() + end);
  return out;
}

Pool Pool::select(std::span<const std::size_t> indices) const {
  Pool out(dims_);
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back((*this)[i]);
  return out;
}

void Pool::validate() const {
  for (std::size_t i = 0; i < size(); ++i) {
    const RecordView r = (*this)[i];
    for (float v : r.image) {
      if (!std::isfinite(v)) throw ValidationError("record " + std::to_string(r.id) + ": non-finite image feature");
    }
    for (float v : r.text) {
      if (!std::isfinite(v)) throw ValidationError("record " + std::to_string(r.id) + ": non-finite text feature");
    }
  }
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(ids_.size());
  for (std::uint64_t id : ids_) {
    if (!seen.insert(id).second) throw ValidationError("duplicate record id " + std::to_string(id));
  }
}

std::uint64_t Pool::content_hash() const noexcept {
  std::uint64_t h = splitmix64_mix((std::uint64_t{dims_.image} << 32) | dims_.text);
  auto fold = [&h](std::uint64_t w) { h = splitmix64_mix(h ^ w) + 0x9e3779b97f4a7c15ULL; };
  fold(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    fold(ids_[i]);
    fold((std::uint64_t{labels_[i]} << 8) | static_cast<std::uint8_t>(aligned_[i]));
  }
  auto fold_floats = [&fold](const std::vector<float>& v) {
    std::size_t i = 0;
    for (; i + 2 <= v.size(); i += 2) {
      fold((std::uint64_t{std::bit_cast<std::uint32_t>(v[i])} << 32) |
           std::bit_cast<std::uint32_t>(v[i + 1]));
    }
    if (i < v.size()) fold(std::bit_cast<std::uint32_t>(v[i]));
  };
  fold_floats(image_);
  fold_floats(text_);
  return h;
}

}  // namespace dfn
