#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "vloc/database.h"

namespace vloc {

// KITTI-raw drive directory:
//   oxts/timestamps.txt          one "YYYY-MM-DD HH:MM:SS.fffffffff" per frame
//   oxts/data/%010d.txt          whitespace-separated; fields 1, 2 = lat, lon
//   descriptors/%010d.desc       one descriptor record per frame
// Frame ids are the zero-based file indices. Only the descriptors are taken
// from the .desc files.
Database IngestKitti(const std::filesystem::path& root_dir);

// Manifest with header frame_id,timestamp_ns,lat_deg,lon_deg,descriptor_path.
// Relative descriptor paths resolve against the manifest's directory.
Database IngestCsv(const std::filesystem::path& manifest);

// Nanoseconds since the Unix epoch for a KITTI timestamp line (UTC).
// Throws kMalformedLine.
std::int64_t ParseKittiTimestamp(std::string_view text);

struct QueryInput {
  DescriptorSet descriptors;
  std::int64_t timestamp_ns = 0;
  std::optional<GeoPoint> truth;
};

// Query manifest: header query_ts_ns,descriptor_path with optional trailing
// truth_lat,truth_lon columns (cells may be empty). Rows are returned in
// file order; a header-only file yields an empty list.
std::vector<QueryInput> ReadQueryManifest(const std::filesystem::path& manifest);

}  // namespace vloc
