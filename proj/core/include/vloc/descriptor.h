#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace vloc {

inline constexpr std::size_t kDescriptorDim = 128;

// One SIFT-style keypoint descriptor.
using Descriptor = std::array<float, kDescriptorDim>;

// Read-only view of a descriptor stored inside a DescriptorSet.
using DescriptorView = std::span<const float, kDescriptorDim>;

// A frame's (k, 128) descriptor array, stored row-major and contiguously.
// Immutable after construction; squared norms are cached for the scan
// kernels. All components must be finite.
class DescriptorSet {
 public:
  DescriptorSet() = default;
  explicit DescriptorSet(std::vector<float> values);
  explicit DescriptorSet(const std::vector<Descriptor>& descriptors);

  std::size_t size() const noexcept { return norms_sq_.size(); }
  bool empty() const noexcept { return norms_sq_.empty(); }

  DescriptorView operator[](std::size_t i) const noexcept {
    return DescriptorView(values_.data() + i * kDescriptorDim,
                          kDescriptorDim);
  }

  // Row-major k x 128 values.
  std::span<const float> values() const noexcept { return values_; }

  // Squared Euclidean norm of descriptor i, accumulated in double.
  double norm_sq(std::size_t i) const noexcept { return norms_sq_[i]; }
  double max_norm_sq() const noexcept { return max_norm_sq_; }

  // Zero-norm descriptors have no defined cosine similarity.
  bool is_degenerate(std::size_t i) const noexcept {
    return norms_sq_[i] == 0.0;
  }

  friend bool operator==(const DescriptorSet& a, const DescriptorSet& b);

 private:
  void Validate();

  std::vector<float> values_;
  std::vector<double> norms_sq_;
  double max_norm_sq_ = 0.0;
};

// Bitwise comparison of the stored floats (distinguishes -0.0 from 0.0).
bool BitwiseEqual(const DescriptorSet& a, const DescriptorSet& b) noexcept;

}  // namespace vloc
