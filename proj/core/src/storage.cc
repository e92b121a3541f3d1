#include "vloc/storage.h"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "vloc/error.h"

namespace vloc {
namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'V', 'L', 'D', 'B'};
constexpr std::size_t kRecordHeaderBytes = 8 + 8 + 8 + 8 + 4;
constexpr std::size_t kDescriptorBytes = kDescriptorDim * sizeof(float);

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

  void U32(std::uint32_t v) { Little(v); }
  void U64(std::uint64_t v) { Little(v); }
  void I64(std::int64_t v) { Little(std::bit_cast<std::uint64_t>(v)); }
  void F64(double v) { Little(std::bit_cast<std::uint64_t>(v)); }
  void F32(float v) { Little(std::bit_cast<std::uint32_t>(v)); }
  void Bytes(std::span<const std::uint8_t> b) {
    out_.insert(out_.end(), b.begin(), b.end());
  }

 private:
  template <typename T>
  void Little(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }

  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::size_t remaining() const { return in_.size() - pos_; }

  void Require(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw Error(ErrorCode::kTruncatedFile,
                  std::string("file truncated while reading ") + what);
    }
  }

  std::uint32_t U32(const char* what) { return Little<std::uint32_t>(what); }
  std::uint64_t U64(const char* what) { return Little<std::uint64_t>(what); }
  std::int64_t I64(const char* what) {
    return std::bit_cast<std::int64_t>(Little<std::uint64_t>(what));
  }
  double F64(const char* what) {
    return std::bit_cast<double>(Little<std::uint64_t>(what));
  }
  std::span<const std::uint8_t> Bytes(std::size_t n, const char* what) {
    Require(n, what);
    auto out = in_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

 private:
  template <typename T>
  T Little(const char* what) {
    Require(sizeof(T), what);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(in_[pos_ + i]) << (8 * i);
    }
    pos_ += sizeof(T);
    return v;
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void WriteRecord(Writer& w, std::uint64_t frame_id, std::int64_t ts,
                 double lat, double lon, const DescriptorSet& descriptors) {
  if (descriptors.size() > UINT32_MAX) {
    throw Error(ErrorCode::kInvalidArgument, "too many descriptors in frame");
  }
  w.U64(frame_id);
  w.I64(ts);
  w.F64(lat);
  w.F64(lon);
  w.U32(static_cast<std::uint32_t>(descriptors.size()));
  for (float v : descriptors.values()) w.F32(v);
}

DescRecord ReadRecord(Reader& r) {
  DescRecord rec;
  r.Require(kRecordHeaderBytes, "frame header");
  rec.frame_id = r.U64("frame id");
  rec.timestamp_ns = r.I64("timestamp");
  rec.lat = r.F64("latitude");
  rec.lon = r.F64("longitude");
  const std::uint32_t k = r.U32("keypoint count");
  if (r.remaining() / kDescriptorBytes < k) {
    throw Error(ErrorCode::kTruncatedFile,
                "file truncated inside the descriptors of frame " +
                    std::to_string(rec.frame_id));
  }
  auto raw = r.Bytes(static_cast<std::size_t>(k) * kDescriptorBytes,
                     "descriptors");
  std::vector<float> values(static_cast<std::size_t>(k) * kDescriptorDim);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits = 0;
    for (std::size_t b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(raw[4 * i + b]) << (8 * b);
    }
    values[i] = std::bit_cast<float>(bits);
  }
  rec.descriptors = DescriptorSet(std::move(values));
  return rec;
}

void RequireFullyConsumed(const Reader& r) {
  if (r.remaining() != 0) {
    throw Error(ErrorCode::kCorruptFile,
                std::to_string(r.remaining()) + " trailing bytes after data");
  }
}

std::vector<std::uint8_t> ReadAll(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kUnreadableFile,
                "cannot open " + path.string() + " for reading");
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw Error(ErrorCode::kUnreadableFile, "read error on " + path.string());
  }
  return bytes;
}

void WriteAll(const std::filesystem::path& path,
              const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error(ErrorCode::kIo, "write error on " + path.string());
  }
}

}  // namespace

std::vector<std::uint8_t> EncodeDatabase(const Database& db) {
  if (db.size() > UINT32_MAX) {
    throw Error(ErrorCode::kInvalidArgument, "too many frames for VLDB");
  }
  std::vector<std::uint8_t> out;
  Writer w(out);
  w.Bytes(kMagic);
  w.U32(kVldbVersion);
  w.U32(static_cast<std::uint32_t>(db.size()));
  for (const GeoFrame& f : db.frames()) {
    WriteRecord(w, f.frame_id, f.timestamp_ns, f.geotag.lat(), f.geotag.lon(),
                f.descriptors);
  }
  return out;
}

Database DecodeDatabase(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (r.remaining() < kMagic.size() ||
      !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw Error(ErrorCode::kBadMagic, "not a VLDB file (bad magic)");
  }
  r.Bytes(kMagic.size(), "magic");
  const std::uint32_t version = r.U32("version");
  if (version != kVldbVersion) {
    throw Error(ErrorCode::kUnsupportedVersion,
                "unsupported VLDB version " + std::to_string(version));
  }
  const std::uint32_t count = r.U32("frame count");
  std::vector<GeoFrame> frames;
  frames.reserve(std::min<std::size_t>(count, r.remaining() / kRecordHeaderBytes));
  for (std::uint32_t i = 0; i < count; ++i) {
    DescRecord rec = ReadRecord(r);
    if (!IsValidLatLon(rec.lat, rec.lon)) {
      throw Error(ErrorCode::kCorruptFile,
                  "frame " + std::to_string(rec.frame_id) +
                      " has an out-of-range geotag");
    }
    frames.push_back({rec.frame_id, rec.timestamp_ns,
                      GeoPoint(rec.lat, rec.lon), std::move(rec.descriptors)});
  }
  RequireFullyConsumed(r);
  return Database(std::move(frames));
}

void SaveDatabase(const Database& db, const std::filesystem::path& path) {
  WriteAll(path, EncodeDatabase(db));
}

Database LoadDatabase(const std::filesystem::path& path) {
  return DecodeDatabase(ReadAll(path));
}

std::vector<std::uint8_t> EncodeDescRecord(const DescRecord& record) {
  std::vector<std::uint8_t> out;
  Writer w(out);
  WriteRecord(w, record.frame_id, record.timestamp_ns, record.lat, record.lon,
              record.descriptors);
  return out;
}

DescRecord DecodeDescRecord(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  DescRecord rec = ReadRecord(r);
  RequireFullyConsumed(r);
  return rec;
}

void WriteDescFile(const std::filesystem::path& path,
                   const DescRecord& record) {
  WriteAll(path, EncodeDescRecord(record));
}

DescRecord ReadDescFile(const std::filesystem::path& path) {
  return DecodeDescRecord(ReadAll(path));
}

}  // namespace vloc
