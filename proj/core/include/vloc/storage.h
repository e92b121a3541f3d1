#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "vloc/database.h"

namespace vloc {

// VLDB on-disk layout, all fields little-endian:
//
//   "VLDB" | u32 version (=1) | u32 frame_count | frame_count x record
//
// record:
//   u64 frame_id | i64 timestamp_ns | f64 lat | f64 lon | u32 k |
//   k x 128 f32 descriptor values (row-major)
//
// A per-frame `.desc` file is exactly one record with no file header.
// Database metadata is not part of the format.
inline constexpr std::uint32_t kVldbVersion = 1;

std::vector<std::uint8_t> EncodeDatabase(const Database& db);
Database DecodeDatabase(std::span<const std::uint8_t> bytes);

void SaveDatabase(const Database& db, const std::filesystem::path& path);
Database LoadDatabase(const std::filesystem::path& path);

// Contents of a `.desc` file. Extractor plugins that only know pixels may
// leave the id, timestamp and coordinates zeroed; ingestion takes those
// fields from its own sources and uses only the descriptors.
struct DescRecord {
  std::uint64_t frame_id = 0;
  std::int64_t timestamp_ns = 0;
  double lat = 0.0;
  double lon = 0.0;
  DescriptorSet descriptors;
};

std::vector<std::uint8_t> EncodeDescRecord(const DescRecord& record);
DescRecord DecodeDescRecord(std::span<const std::uint8_t> bytes);

void WriteDescFile(const std::filesystem::path& path, const DescRecord& record);
DescRecord ReadDescFile(const std::filesystem::path& path);

}  // namespace vloc
