#include "vloc/descriptor.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "vloc/error.h"

namespace vloc {

DescriptorSet::DescriptorSet(std::vector<float> values)
    : values_(std::move(values)) {
  Validate();
}

DescriptorSet::DescriptorSet(const std::vector<Descriptor>& descriptors) {
  values_.reserve(descriptors.size() * kDescriptorDim);
  for (const Descriptor& d : descriptors) {
    values_.insert(values_.end(), d.begin(), d.end());
  }
  Validate();
}

void DescriptorSet::Validate() {
  if (values_.size() % kDescriptorDim != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "descriptor buffer of " + std::to_string(values_.size()) +
                    " floats is not a multiple of 128");
  }
  if (!std::all_of(values_.begin(), values_.end(),
                   [](float v) { return std::isfinite(v); })) {
    const auto bad = std::find_if(values_.begin(), values_.end(),
                                  [](float v) { return !std::isfinite(v); });
    throw Error(ErrorCode::kInvalidArgument,
                "descriptor " +
                    std::to_string((bad - values_.begin()) / kDescriptorDim) +
                    " has a non-finite component");
  }
  const std::size_t k = values_.size() / kDescriptorDim;
  norms_sq_.resize(k);
  // Each row is summed in index order; rows are interleaved in groups of
  // kLanes only so the independent sums can share vector registers.
  constexpr std::size_t kLanes = 8;
  std::size_t i = 0;
  for (; i + kLanes <= k; i += kLanes) {
    const float* base = values_.data() + i * kDescriptorDim;
    double acc[kLanes] = {};
    for (std::size_t c = 0; c < kDescriptorDim; ++c) {
      for (std::size_t l = 0; l < kLanes; ++l) {
        const double v = base[l * kDescriptorDim + c];
        acc[l] += v * v;
      }
    }
    std::copy(acc, acc + kLanes, norms_sq_.begin() + i);
  }
  for (; i < k; ++i) {
    const float* row = values_.data() + i * kDescriptorDim;
    double acc = 0.0;
    for (std::size_t c = 0; c < kDescriptorDim; ++c) {
      acc += static_cast<double>(row[c]) * static_cast<double>(row[c]);
    }
    norms_sq_[i] = acc;
  }
  max_norm_sq_ =
      norms_sq_.empty() ? 0.0
                        : *std::max_element(norms_sq_.begin(), norms_sq_.end());
}

bool operator==(const DescriptorSet& a, const DescriptorSet& b) {
  return a.values_ == b.values_;
}

bool BitwiseEqual(const DescriptorSet& a, const DescriptorSet& b) noexcept {
  const auto va = a.values();
  const auto vb = b.values();
  return va.size() == vb.size() &&
         (va.empty() ||
          std::memcmp(va.data(), vb.data(), va.size_bytes()) == 0);
}

}  // namespace vloc
