#include "crackinspect/image_io.hpp"

#include <fstream>
#include <iterator>
#include <system_error>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "crackinspect/error.hpp"

namespace crackinspect {

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::Io, "read failed: " + path.string());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot replace " + path.string() + ": " + ec.message());
}

namespace {

GrayImage to_gray_image(const cv::Mat& m) {
  GrayImage out;
  out.width = m.cols;
  out.height = m.rows;
  out.pixels.resize(static_cast<std::size_t>(m.cols) * static_cast<std::size_t>(m.rows));
  for (int y = 0; y < m.rows; ++y) {
    const auto* row = m.ptr<std::uint8_t>(y);
    std::copy(row, row + m.cols, out.pixels.begin() + std::ptrdiff_t{y} * m.cols);
  }
  return out;
}

cv::Mat to_mat(const BinaryMask& mask) {
  cv::Mat m(mask.height(), mask.width(), CV_8UC1);
  for (int y = 0; y < mask.height(); ++y) {
    auto* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < mask.width(); ++x) row[x] = mask.get(x, y) ? 255 : 0;
  }
  return m;
}

std::vector<std::uint8_t> encode_png(const cv::Mat& m) {
  std::vector<std::uint8_t> out;
  if (!cv::imencode(".png", m, out)) throw Error(ErrorCode::Io, "PNG encoding failed");
  return out;
}

}  // namespace

GrayImage decode_gray(std::span<const std::uint8_t> bytes) {
  const cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8UC1,
                    const_cast<std::uint8_t*>(bytes.data()));
  const cv::Mat m = cv::imdecode(buf, cv::IMREAD_GRAYSCALE);
  if (m.empty()) throw Error(ErrorCode::Io, "cannot decode image");
  return to_gray_image(m);
}

GrayImage load_gray(const std::filesystem::path& path) {
  try {
    return decode_gray(read_file_bytes(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_mask_png(const BinaryMask& mask) { return encode_png(to_mat(mask)); }

BinaryMask decode_mask_png(std::span<const std::uint8_t> bytes) {
  const auto gray = decode_gray(bytes);
  BinaryMask mask(gray.width, gray.height);
  for (int y = 0; y < gray.height; ++y) {
    for (int x = 0; x < gray.width; ++x) {
      if (gray.at(x, y) != 0) mask.set(x, y);
    }
  }
  return mask;
}

void write_mask_png(const BinaryMask& mask, const std::filesystem::path& path) {
  write_file_bytes(path, encode_mask_png(mask));
}

BinaryMask read_mask_png(const std::filesystem::path& path) {
  try {
    return decode_mask_png(read_file_bytes(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> render_overlay_png(const std::filesystem::path& source, int width,
                                             int height, std::span<const OverlayLayer> layers) {
  cv::Mat canvas;
  if (!source.empty()) {
    std::error_code ec;
    if (std::filesystem::is_regular_file(source, ec)) canvas = cv::imread(source.string(), cv::IMREAD_COLOR);
  }
  if (canvas.empty() || canvas.cols != width || canvas.rows != height) {
    canvas = cv::Mat(height, width, CV_8UC3, cv::Scalar(128, 128, 128));
  }
  for (const auto& layer : layers) {
    if (layer.mask == nullptr || layer.mask->width() != width || layer.mask->height() != height) {
      continue;
    }
    for (int y = 0; y < height; ++y) {
      auto* row = canvas.ptr<cv::Vec3b>(y);
      for (int x = 0; x < width; ++x) {
        if (!layer.mask->get(x, y)) continue;
        // OpenCV stores BGR.
        for (int c = 0; c < 3; ++c) {
          const int src = row[x][c];
          const int dst = layer.color[2 - c];
          row[x][c] = static_cast<std::uint8_t>((src + dst + 1) / 2);
        }
      }
    }
  }
  return encode_png(canvas);
}

}  // namespace crackinspect
