#pragma once

// Columnar in-memory pool of image-text records.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dfn {

inline constexpr std::uint32_t kUnknownLabel = 0xFFFFFFFFu;

enum class Alignment : std::uint8_t { kFalse = 0, kTrue = 1, kUnknown = 0xFF };

struct Dims {
  std::uint32_t image = 0;
  std::uint32_t text = 0;
  friend bool operator==(const Dims&, const Dims&) = default;
};

// One record, owning its feature vectors.
struct Record {
  std::uint64_t id = 0;
  std::vector<float> image;
  std::vector<float> text;
  std::uint32_t concept_label = kUnknownLabel;
  Alignment aligned = Alignment::kUnknown;

  friend bool operator==(const Record&, const Record&) = default;
};

// Non-owning view of a record inside a Pool.
struct RecordView {
  std::uint64_t id;
  std::span<const float> image;
  std::span<const float> text;
  std::uint32_t concept_label;
  Alignment aligned;

  Record to_record() const {
    return {id, {image.begin(), image.end()}, {text.begin(), text.end()}, concept_label, aligned};
  }
};

class Pool {
 public:
  Pool() = default;
  explicit Pool(Dims dims) : dims_(dims) {}

  Dims dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }

  void reserve(std::size_t n);
  // Throws ShapeMismatchError if feature lengths disagree with dims().
  void push_back(const RecordView& r);
  void push_back(const Record& r);
  // Appends every record of `other`; dims must match.
  void append(const Pool& other);

  RecordView operator[](std::size_t i) const noexcept {
    return {ids_[i],
            {image_.data() + i * dims_.image, dims_.image},
            {text_.data() + i * dims_.text, dims_.text},
            labels_[i],
            aligned_[i]};
  }

  std::span<const std::uint64_t> ids() const noexcept { return ids_; }
  std::span<const float> image_data() const noexcept { return image_; }
  std::span<const float> text_data() const noexcept { return text_; }
  std::span<float> mutable_image_data() noexcept { return image_; }
  std::span<float> mutable_text_data() noexcept { return text_; }
  std::span<const std::uint32_t> labels() const noexcept { return labels_; }
  std::span<const Alignment> alignment() const noexcept { return aligned_; }

  // Records [begin, end) as a new pool.
  Pool slice(std::size_t begin, std::size_t end) const;
  // Records at the given indices, in the given order.
  Pool select(std::span<const std::size_t> indices) const;

  // Throws ValidationError on non-finite features or duplicate ids.
  void validate() const;

  // Order-sensitive 64-bit content hash over ids, features and metadata.
  std::uint64_t content_hash() const noexcept;

  friend bool operator==(const Pool&, const Pool&) = default;

 private:
  Dims dims_{};
  std::vector<std::uint64_t> ids_;
  std::vector<float> image_;
  std::vector<float> text_;
  std::vector<std::uint32_t> labels_;
  std::vector<Alignment> aligned_;
};

}  // namespace dfn
