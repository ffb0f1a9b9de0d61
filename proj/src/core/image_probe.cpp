// Header-level readers for JPEG/PNG dimensions and EXIF capture time.

#include <algorithm>
#include <array>
#include <cstring>
#include <string>

#include "crackinspect/error.hpp"
#include "crackinspect/image_io.hpp"

namespace crackinspect {

namespace {

class TiffReader {
 public:
  explicit TiffReader(std::span<const std::uint8_t> data) : data_(data) {}

  bool init() {
    if (data_.size() < 8) return false;
    if (data_[0] == 'I' && data_[1] == 'I') {
      little_ = true;
    } else if (data_[0] == 'M' && data_[1] == 'M') {
      little_ = false;
    } else {
      return false;
    }
    return u16(2) == 42;
  }

  std::uint32_t first_ifd() const { return u32(4); }

  std::uint16_t u16(std::size_t at) const {
    if (at + 2 > data_.size()) return 0;
    return little_ ? std::uint16_t(data_[at] | data_[at + 1] << 8)
                   : std::uint16_t(data_[at] << 8 | data_[at + 1]);
  }
  std::uint32_t u32(std::size_t at) const {
    if (at + 4 > data_.size()) return 0;
    return little_ ? std::uint32_t(data_[at]) | std::uint32_t(data_[at + 1]) << 8 |
                         std::uint32_t(data_[at + 2]) << 16 | std::uint32_t(data_[at + 3]) << 24
                   : std::uint32_t(data_[at]) << 24 | std::uint32_t(data_[at + 1]) << 16 |
                         std::uint32_t(data_[at + 2]) << 8 | std::uint32_t(data_[at + 3]);
  }

  struct Entry {
    std::uint16_t tag;
    std::uint16_t type;
    std::uint32_t count;
    std::size_t value_at;  // offset of the 4-byte value field
  };

  std::optional<Entry> find(std::uint32_t ifd, std::uint16_t tag) const {
    if (ifd == 0 || ifd + 2 > data_.size()) return std::nullopt;
    const std::uint16_t n = u16(ifd);
    for (std::uint16_t k = 0; k < n; ++k) {
      const std::size_t at = ifd + 2 + std::size_t{12} * k;
      if (at + 12 > data_.size()) break;
      if (u16(at) == tag) return Entry{tag, u16(at + 2), u32(at + 4), at + 8};
    }
    return std::nullopt;
  }

  std::optional<std::string> ascii(const Entry& e) const {
    if (e.type != 2 || e.count == 0) return std::nullopt;
    const std::size_t start = e.count <= 4 ? e.value_at : u32(e.value_at);
    if (start + e.count > data_.size()) return std::nullopt;
    std::string s(reinterpret_cast<const char*>(data_.data() + start), e.count);
    s.erase(std::find(s.begin(), s.end(), '\0'), s.end());
    while (!s.empty() && (s.back() == ' ' || s.back() == '\0')) s.pop_back();
    if (s.empty()) return std::nullopt;
    return s;
  }

 private:
  std::span<const std::uint8_t> data_;
  bool little_ = true;
};

constexpr std::uint16_t kTagDateTime = 0x0132;
constexpr std::uint16_t kTagExifIfd = 0x8769;
constexpr std::uint16_t kTagDateTimeOriginal = 0x9003;

std::uint32_t be32(std::span<const std::uint8_t> b, std::size_t at) {
  return std::uint32_t(b[at]) << 24 | std::uint32_t(b[at + 1]) << 16 |
         std::uint32_t(b[at + 2]) << 8 | std::uint32_t(b[at + 3]);
}

bool is_sof(std::uint8_t marker) {
  return marker >= 0xC0 && marker <= 0xCF && marker != 0xC4 && marker != 0xC8 && marker != 0xCC;
}

ImageInfo probe_jpeg(std::span<const std::uint8_t> b) {
  ImageInfo info;
  std::size_t at = 2;
  bool have_size = false;
  while (at + 4 <= b.size()) {
    if (b[at] != 0xFF) throw Error(ErrorCode::Io, "corrupt JPEG marker stream");
    std::uint8_t marker = b[at + 1];
    if (marker == 0xFF) {  // fill byte
      ++at;
      continue;
    }
    if (marker == 0xD8 || (marker >= 0xD0 && marker <= 0xD7) || marker == 0x01) {
      at += 2;
      continue;
    }
    if (marker == 0xDA || marker == 0xD9) break;  // start of scan / end of image
    const std::size_t len = std::size_t(b[at + 2]) << 8 | b[at + 3];
    if (len < 2 || at + 2 + len > b.size()) throw Error(ErrorCode::Io, "truncated JPEG segment");
    const auto body = b.subspan(at + 4, len - 2);
    if (marker == 0xE1 && body.size() > 6 && std::memcmp(body.data(), "Exif\0\0", 6) == 0 &&
        !info.captured_at) {
      info.captured_at = exif_capture_time(body.subspan(6));
    } else if (is_sof(marker) && body.size() >= 5) {
      info.height = int(body[1]) << 8 | body[2];
      info.width = int(body[3]) << 8 | body[4];
      have_size = true;
    }
    at += 2 + len;
  }
  if (!have_size || info.width <= 0 || info.height <= 0) {
    throw Error(ErrorCode::Io, "JPEG has no frame header");
  }
  return info;
}

ImageInfo probe_png(std::span<const std::uint8_t> b) {
  ImageInfo info;
  std::size_t at = 8;
  bool have_size = false;
  while (at + 12 <= b.size()) {
    const std::uint32_t len = be32(b, at);
    const std::string_view type(reinterpret_cast<const char*>(b.data() + at + 4), 4);
    if (at + 12 + std::size_t{len} > b.size()) throw Error(ErrorCode::Io, "truncated PNG chunk");
    const auto body = b.subspan(at + 8, len);
    if (type == "IHDR" && len >= 8) {
      info.width = static_cast<int>(be32(body, 0));
      info.height = static_cast<int>(be32(body, 4));
      have_size = true;
    } else if (type == "eXIf") {
      info.captured_at = exif_capture_time(body);
    } else if (type == "IDAT" || type == "IEND") {
      break;
    }
    at += 12 + len;
  }
  if (!have_size || info.width <= 0 || info.height <= 0) {
    throw Error(ErrorCode::Io, "PNG has no IHDR");
  }
  return info;
}

}  // namespace

std::optional<std::string> exif_capture_time(std::span<const std::uint8_t> tiff) {
  TiffReader r(tiff);
  if (!r.init()) return std::nullopt;
  const std::uint32_t ifd0 = r.first_ifd();
  if (auto ptr = r.find(ifd0, kTagExifIfd)) {
    if (auto e = r.find(r.u32(ptr->value_at), kTagDateTimeOriginal)) {
      if (auto s = r.ascii(*e)) return s;
    }
  }
  if (auto e = r.find(ifd0, kTagDateTime)) return r.ascii(*e);
  return std::nullopt;
}

ImageInfo probe_image_bytes(std::span<const std::uint8_t> bytes) {
  static constexpr std::array<std::uint8_t, 8> kPngSig = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (bytes.size() >= 8 && std::equal(kPngSig.begin(), kPngSig.end(), bytes.begin())) {
    return probe_png(bytes);
  }
  if (bytes.size() >= 4 && bytes[0] == 0xFF && bytes[1] == 0xD8) return probe_jpeg(bytes);
  throw Error(ErrorCode::Io, "not a JPEG or PNG file");
}

ImageInfo probe_image(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return probe_image_bytes(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace crackinspect
