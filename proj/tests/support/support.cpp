#include "support.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace testsupport {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> serial{0};
  path_ = fs::temp_directory_path() /
          (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(serial++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + file.string());
}

std::string read_text(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool pnpoly(const std::vector<crackinspect::Point>& poly, double x, double y) {
  bool c = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if (((a.y > y) != (b.y > y)) && (x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x)) c = !c;
  }
  return c;
}

int flood_fill_components(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<char> seen(static_cast<std::size_t>(w) * h, 0);
  int count = 0;
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.get(x, y) || seen[static_cast<std::size_t>(y) * w + x]) continue;
      ++count;
      stack.assign(1, {x, y});
      seen[static_cast<std::size_t>(y) * w + x] = 1;
      while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx;
            const int ny = cy + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            auto& s = seen[static_cast<std::size_t>(ny) * w + nx];
            if (s || !mask.get(nx, ny)) continue;
            s = 1;
            stack.emplace_back(nx, ny);
          }
        }
      }
    }
  }
  return count;
}

Counts brute_counts(const BinaryMask& a, const BinaryMask& b) {
  Counts c;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      const bool pa = a.get(x, y);
      const bool pb = b.get(x, y);
      c.inter += (pa && pb) ? 1 : 0;
      c.uni += (pa || pb) ? 1 : 0;
    }
  }
  return c;
}

bool has_2x2_block(const BinaryMask& m) {
  for (int y = 0; y + 1 < m.height(); ++y) {
    for (int x = 0; x + 1 < m.width(); ++x) {
      if (m.get(x, y) && m.get(x + 1, y) && m.get(x, y + 1) && m.get(x + 1, y + 1)) return true;
    }
  }
  return false;
}

BinaryMask from_rows(const std::vector<std::string>& rows) {
  const int h = static_cast<int>(rows.size());
  const int w = h == 0 ? 0 : static_cast<int>(rows[0].size());
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.set(x, y, rows[y][x] == '#' || rows[y][x] == '1');
  }
  return m;
}

std::string to_rows(const BinaryMask& mask) {
  std::string out;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) out += mask.get(x, y) ? '#' : '.';
    out += '\n';
  }
  return out;
}

BinaryMask random_noise(std::mt19937& rng, int w, int h, double density) {
  std::bernoulli_distribution on(density);
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.set(x, y, on(rng));
  }
  return m;
}

namespace {

double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double vx = bx - ax;
  const double vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - (ax + t * vx), py - (ay + t * vy));
}

}  // namespace

BinaryMask random_blob(std::mt19937& rng, int w, int h) {
  BinaryMask m(w, h);
  std::uniform_int_distribution<int> shapes(1, 4);
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_real_distribution<double> ux(0.0, w);
  std::uniform_real_distribution<double> uy(0.0, h);
  std::uniform_real_distribution<double> angle(0.0, M_PI);
  const double scale = std::min(w, h);
  std::uniform_real_distribution<double> radius(1.5, std::max(2.0, scale / 5.0));
  std::uniform_real_distribution<double> half_width(1.0, std::max(1.5, scale / 12.0));
  const int n = shapes(rng);
  for (int s = 0; s < n; ++s) {
    const int k = kind(rng);
    if (k == 0) {  // disc
      const double cx = ux(rng);
      const double cy = uy(rng);
      const double r = radius(rng);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (std::hypot(x + 0.5 - cx, y + 0.5 - cy) <= r) m.set(x, y);
        }
      }
    } else if (k == 1) {  // rotated ellipse
      const double cx = ux(rng);
      const double cy = uy(rng);
      const double a = radius(rng) * 1.5;
      const double b = std::max(1.2, radius(rng) / 2.0);
      const double t = angle(rng);
      const double c = std::cos(t);
      const double sn = std::sin(t);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const double dx = x + 0.5 - cx;
          const double dy = y + 0.5 - cy;
          const double u = dx * c + dy * sn;
          const double v = -dx * sn + dy * c;
          if ((u * u) / (a * a) + (v * v) / (b * b) <= 1.0) m.set(x, y);
        }
      }
    } else {  // thick segment with round caps
      const double ax = ux(rng);
      const double ay = uy(rng);
      const double bx = ux(rng);
      const double by = uy(rng);
      const double hw = half_width(rng);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (segment_distance(x + 0.5, y + 0.5, ax, ay, bx, by) <= hw) m.set(x, y);
        }
      }
    }
  }
  return m;
}

BinaryMask rotate90(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  BinaryMask out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask.get(x, y)) out.set(h - 1 - y, x);
    }
  }
  return out;
}

BinaryMask bar(int w, int h, int x0, int y0, int bw, int bh) {
  BinaryMask m(w, h);
  for (int y = y0; y < y0 + bh; ++y) {
    for (int x = x0; x < x0 + bw; ++x) m.set(x, y);
  }
  return m;
}

BinaryMask line(int w, int h, int x0, int y0, int x1, int y1) {
  BinaryMask m(w, h);
  const int dx = std::abs(x1 - x0);
  const int dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    m.set(x0, y0);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
  return m;
}

void write_gray_image(const fs::path& file, int w, int h, std::uint8_t gray) {
  cv::Mat img(h, w, CV_8UC1, cv::Scalar(gray));
  if (!cv::imwrite(file.string(), img)) throw std::runtime_error("imwrite failed");
}

namespace {

void put16(std::vector<std::uint8_t>& v, unsigned x) {
  v.push_back(x & 0xff);
  v.push_back((x >> 8) & 0xff);
}

void put32(std::vector<std::uint8_t>& v, unsigned x) {
  put16(v, x & 0xffff);
  put16(v, x >> 16);
}

}  // namespace

void write_jpeg_with_exif(const fs::path& file, int w, int h, const std::string& datetime) {
  std::vector<std::uint8_t> jpeg;
  cv::Mat img(h, w, CV_8UC3, cv::Scalar(120, 130, 140));
  cv::imencode(".jpg", img, jpeg);

  // Little-endian TIFF: IFD0 -> ExifIFD pointer -> DateTimeOriginal (ASCII, 20 bytes).
  std::vector<std::uint8_t> tiff = {'I', 'I', 42, 0};
  put32(tiff, 8);
  put16(tiff, 1);
  put16(tiff, 0x8769);
  put16(tiff, 4);  // LONG
  put32(tiff, 1);
  put32(tiff, 26);
  put32(tiff, 0);
  put16(tiff, 1);
  put16(tiff, 0x9003);
  put16(tiff, 2);  // ASCII
  put32(tiff, static_cast<unsigned>(datetime.size() + 1));
  put32(tiff, 44);
  put32(tiff, 0);
  tiff.insert(tiff.end(), datetime.begin(), datetime.end());
  tiff.push_back(0);

  std::vector<std::uint8_t> app1 = {0xFF, 0xE1, 0, 0, 'E', 'x', 'i', 'f', 0, 0};
  app1.insert(app1.end(), tiff.begin(), tiff.end());
  const std::size_t len = app1.size() - 2;
  app1[2] = static_cast<std::uint8_t>(len >> 8);
  app1[3] = static_cast<std::uint8_t>(len & 0xff);

  jpeg.insert(jpeg.begin() + 2, app1.begin(), app1.end());
  std::ofstream out(file, std::ios::binary);
  out.write(reinterpret_cast<const char*>(jpeg.data()), static_cast<std::streamsize>(jpeg.size()));
}

}  // namespace testsupport
