#include "vloc/ingest.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <string>

#include "vloc/error.h"
#include "vloc/storage.h"

namespace vloc {
namespace {

namespace fs = std::filesystem;

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
bool ParseNumber(std::string_view text, T& out) {
  text = Trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> Split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> SplitWhitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::vector<std::string> ReadLines(const fs::path& path, ErrorCode missing) {
  std::ifstream in(path);
  if (!in) {
    throw Error(missing, "cannot read " + path.string());
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::size_t CountFiles(const fs::path& dir, std::string_view extension) {
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == extension) ++n;
  }
  return n;
}

std::string IndexName(std::size_t index, std::string_view extension) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%010zu", index);
  return std::string(buf) + std::string(extension);
}

void RequireDirectory(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::kMissingFile, "missing directory " + dir.string());
  }
}

GeoPoint ReadOxtsPosition(const fs::path& path, std::size_t index) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kMissingFile, "missing oxts record " + path.string());
  }
  std::string line;
  std::getline(in, line);
  const auto fields = SplitWhitespace(line);
  double lat = 0.0;
  double lon = 0.0;
  if (fields.size() < 2 || !ParseNumber(fields[0], lat) ||
      !ParseNumber(fields[1], lon)) {
    throw Error(ErrorCode::kMalformedLine,
                "frame " + std::to_string(index) +
                    ": malformed oxts line in " + path.string());
  }
  if (!IsValidLatLon(lat, lon)) {
    throw Error(ErrorCode::kOutOfRange,
                "frame " + std::to_string(index) +
                    ": coordinate out of range in " + path.string());
  }
  return GeoPoint(lat, lon);
}

DescriptorSet ReadDescriptors(const fs::path& path) {
  try {
    return ReadDescFile(path).descriptors;
  } catch (const Error& e) {
    throw Error(ErrorCode::kUnreadableFile,
                "unreadable descriptor file " + path.string() + ": " + e.what());
  }
}

fs::path Resolve(const fs::path& base_dir, std::string_view cell) {
  fs::path p{std::string(cell)};
  return p.is_absolute() ? p : base_dir / p;
}

std::string RowContext(const fs::path& manifest, std::size_t line_no) {
  return manifest.string() + ":" + std::to_string(line_no) + ": ";
}

}  // namespace

std::int64_t ParseKittiTimestamp(std::string_view text) {
  text = Trim(text);
  auto fail = [&]() -> Error {
    return Error(ErrorCode::kMalformedLine,
                 "malformed timestamp '" + std::string(text) + "'");
  };
  // YYYY-MM-DD HH:MM:SS[.f{1,9}]
  if (text.size() < 19 || text[4] != '-' || text[7] != '-' ||
      text[10] != ' ' || text[13] != ':' || text[16] != ':') {
    throw fail();
  }
  int year = 0;
  unsigned month = 0, day = 0, hour = 0, minute = 0, second = 0;
  if (!ParseNumber(text.substr(0, 4), year) ||
      !ParseNumber(text.substr(5, 2), month) ||
      !ParseNumber(text.substr(8, 2), day) ||
      !ParseNumber(text.substr(11, 2), hour) ||
      !ParseNumber(text.substr(14, 2), minute) ||
      !ParseNumber(text.substr(17, 2), second)) {
    throw fail();
  }
  std::int64_t frac_ns = 0;
  if (text.size() > 19) {
    const std::string_view frac = text.substr(20);
    if (text[19] != '.' || frac.empty() || frac.size() > 9 ||
        !std::all_of(frac.begin(), frac.end(),
                     [](char c) { return c >= '0' && c <= '9'; })) {
      throw fail();
    }
    ParseNumber(frac, frac_ns);
    for (std::size_t i = frac.size(); i < 9; ++i) frac_ns *= 10;
  }
  const std::chrono::year_month_day ymd{std::chrono::year(year),
                                        std::chrono::month(month),
                                        std::chrono::day(day)};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 60) throw fail();
  const auto days = std::chrono::sys_days(ymd).time_since_epoch().count();
  const std::int64_t secs = static_cast<std::int64_t>(days) * 86400 +
                            hour * 3600 + minute * 60 + second;
  return secs * kNanosPerSecond + frac_ns;
}

Database IngestKitti(const fs::path& root_dir) {
  const fs::path oxts_dir = root_dir / "oxts";
  const fs::path data_dir = oxts_dir / "data";
  const fs::path desc_dir = root_dir / "descriptors";
  const fs::path ts_path = oxts_dir / "timestamps.txt";
  if (!fs::is_regular_file(ts_path)) {
    throw Error(ErrorCode::kMissingFile, "missing " + ts_path.string());
  }
  RequireDirectory(data_dir);
  RequireDirectory(desc_dir);

  std::vector<std::string> lines = ReadLines(ts_path, ErrorCode::kMissingFile);
  while (!lines.empty() && Trim(lines.back()).empty()) lines.pop_back();

  const std::size_t n = lines.size();
  const std::size_t n_data = CountFiles(data_dir, ".txt");
  const std::size_t n_desc = CountFiles(desc_dir, ".desc");
  if (n_data != n || n_desc != n) {
    throw Error(ErrorCode::kCountMismatch,
                std::to_string(n) + " timestamps, " + std::to_string(n_data) +
                    " oxts records, " + std::to_string(n_desc) +
                    " descriptor files in " + root_dir.string());
  }

  std::vector<GeoFrame> frames;
  frames.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::int64_t ts = 0;
    try {
      ts = ParseKittiTimestamp(lines[i]);
    } catch (const Error& e) {
      throw Error(ErrorCode::kMalformedLine,
                  "frame " + std::to_string(i) + ": " + e.what());
    }
    const GeoPoint geotag = ReadOxtsPosition(data_dir / IndexName(i, ".txt"), i);
    const fs::path desc_path = desc_dir / IndexName(i, ".desc");
    if (!fs::is_regular_file(desc_path)) {
      throw Error(ErrorCode::kMissingFile,
                  "frame " + std::to_string(i) + ": missing " +
                      desc_path.string());
    }
    frames.push_back({i, ts, geotag, ReadDescriptors(desc_path)});
  }
  return Database(std::move(frames), {root_dir.string(), "image_01"});
}

Database IngestCsv(const fs::path& manifest) {
  const std::vector<std::string> lines =
      ReadLines(manifest, ErrorCode::kMissingFile);
  constexpr std::string_view kHeader =
      "frame_id,timestamp_ns,lat_deg,lon_deg,descriptor_path";
  if (lines.empty() || Trim(lines[0]) != kHeader) {
    throw Error(ErrorCode::kHeaderMismatch,
                manifest.string() + ": expected header '" +
                    std::string(kHeader) + "'");
  }
  const fs::path base = manifest.parent_path();
  std::vector<GeoFrame> frames;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (Trim(lines[li]).empty()) continue;
    const auto cells = Split(lines[li], ',');
    GeoFrame f;
    double lat = 0.0;
    double lon = 0.0;
    if (cells.size() != 5 || !ParseNumber(cells[0], f.frame_id) ||
        !ParseNumber(cells[1], f.timestamp_ns) || !ParseNumber(cells[2], lat) ||
        !ParseNumber(cells[3], lon) || Trim(cells[4]).empty()) {
      throw Error(ErrorCode::kMalformedLine,
                  RowContext(manifest, li + 1) + "malformed row");
    }
    if (!IsValidLatLon(lat, lon)) {
      throw Error(ErrorCode::kOutOfRange,
                  RowContext(manifest, li + 1) + "coordinate out of range");
    }
    f.geotag = GeoPoint(lat, lon);
    f.descriptors = ReadDescriptors(Resolve(base, Trim(cells[4])));
    frames.push_back(std::move(f));
  }
  return Database(std::move(frames), {manifest.string(), ""});
}

std::vector<QueryInput> ReadQueryManifest(const fs::path& manifest) {
  const std::vector<std::string> lines =
      ReadLines(manifest, ErrorCode::kMissingFile);
  if (lines.empty()) return {};
  const std::string_view header = Trim(lines[0]);
  bool with_truth = false;
  if (header == "query_ts_ns,descriptor_path,truth_lat,truth_lon") {
    with_truth = true;
  } else if (header != "query_ts_ns,descriptor_path") {
    throw Error(ErrorCode::kHeaderMismatch,
                manifest.string() +
                    ": expected header 'query_ts_ns,descriptor_path"
                    "[,truth_lat,truth_lon]'");
  }
  const fs::path base = manifest.parent_path();
  std::vector<QueryInput> out;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (Trim(lines[li]).empty()) continue;
    const auto cells = Split(lines[li], ',');
    QueryInput q;
    if (cells.size() != (with_truth ? 4u : 2u) ||
        !ParseNumber(cells[0], q.timestamp_ns) || Trim(cells[1]).empty()) {
      throw Error(ErrorCode::kMalformedLine,
                  RowContext(manifest, li + 1) + "malformed row");
    }
    if (with_truth) {
      const bool lat_empty = Trim(cells[2]).empty();
      const bool lon_empty = Trim(cells[3]).empty();
      if (lat_empty != lon_empty) {
        throw Error(ErrorCode::kMalformedLine,
                    RowContext(manifest, li + 1) + "truth needs both lat and lon");
      }
      if (!lat_empty) {
        double lat = 0.0;
        double lon = 0.0;
        if (!ParseNumber(cells[2], lat) || !ParseNumber(cells[3], lon)) {
          throw Error(ErrorCode::kMalformedLine,
                      RowContext(manifest, li + 1) + "malformed truth");
        }
        if (!IsValidLatLon(lat, lon)) {
          throw Error(ErrorCode::kOutOfRange,
                      RowContext(manifest, li + 1) + "truth out of range");
        }
        q.truth = GeoPoint(lat, lon);
      }
    }
    q.descriptors = ReadDescriptors(Resolve(base, Trim(cells[1])));
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace vloc
