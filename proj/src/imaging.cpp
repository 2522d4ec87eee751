#include "proxstair/imaging.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

namespace proxstair {

namespace {

struct Cursor {
  const std::vector<std::uint8_t>& b;
  std::size_t pos = 0;

  bool eof() const { return pos >= b.size(); }
  int peek() const { return eof() ? -1 : b[pos]; }
  int get() { return eof() ? -1 : b[pos++]; }

  // skips whitespace and '#' comment lines
  void skip_space() {
    while (!eof()) {
      int c = peek();
      if (c == '#') {
        while (!eof() && get() != '\n') {
        }
      } else if (std::isspace(c)) {
        ++pos;
      } else {
        break;
      }
    }
  }

  int read_uint() {
    skip_space();
    if (eof() || !std::isdigit(peek()))
      throw Error(ErrorCode::Format, "pgm: expected integer");
    long val = 0;
    while (!eof() && std::isdigit(peek())) {
      val = val * 10 + (get() - '0');
      if (val > 1 << 30) throw Error(ErrorCode::Format, "pgm: integer overflow");
    }
    return static_cast<int>(val);
  }
};

}  // namespace

GrayImage read_pgm(const std::vector<std::uint8_t>& bytes) {
  Cursor cur{bytes};
  if (bytes.size() < 2) throw Error(ErrorCode::Format, "pgm: truncated header");
  char m0 = static_cast<char>(cur.get());
  char m1 = static_cast<char>(cur.get());
  bool binary;
  if (m0 == 'P' && m1 == '5')
    binary = true;
  else if (m0 == 'P' && m1 == '2')
    binary = false;
  else
    throw Error(ErrorCode::Format, "pgm: bad magic, expected P2 or P5");

  int cols = cur.read_uint();
  int rows = cur.read_uint();
  int maxval = cur.read_uint();
  if (cols < 1 || rows < 1) throw Error(ErrorCode::Format, "pgm: bad dimensions");
  if (maxval < 1 || maxval > 255)
    throw Error(ErrorCode::Format, "pgm: maxval must be in [1, 255]");

  GrayImage img(rows, cols);
  if (binary) {
    // single whitespace byte after maxval
    cur.get();
    if (bytes.size() - cur.pos < img.size())
      throw Error(ErrorCode::Format, "pgm: truncated pixel data");
    for (std::size_t i = 0; i < img.size(); ++i)
      img.v[i] = static_cast<double>(bytes[cur.pos + i]);
  } else {
    for (std::size_t i = 0; i < img.size(); ++i) {
      int val = cur.read_uint();
      if (val > maxval) throw Error(ErrorCode::Format, "pgm: sample exceeds maxval");
      img.v[i] = static_cast<double>(val);
    }
  }
  return img;
}

std::vector<std::uint8_t> write_pgm(const GrayImage& img) {
  char header[64];
  int len = std::snprintf(header, sizeof(header), "P5\n%d %d\n255\n", img.cols,
                          img.rows);
  std::vector<std::uint8_t> out(header, header + len);
  out.reserve(out.size() + img.size());
  for (double p : img.v) {
    double r = std::round(p);  // rounds half away from zero
    r = std::min(255.0, std::max(0.0, r));
    out.push_back(static_cast<std::uint8_t>(r));
  }
  return out;
}

GrayImage read_pgm_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Format, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return read_pgm(bytes);
}

void write_pgm_file(const std::string& path, const GrayImage& img) {
  auto bytes = write_pgm(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Format, "cannot open " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

namespace detail {

namespace {
std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

double counter_gaussian(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t state = seed ^ (counter * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
  std::uint64_t a = splitmix64(state);
  std::uint64_t b = splitmix64(state);
  // u1 in (0, 1], u2 in [0, 1)
  double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
  double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace detail

GrayImage add_gaussian_noise(const GrayImage& img, double sigma,
                             std::uint64_t seed) {
  if (sigma < 0) throw Error(ErrorCode::InvalidArgument, "sigma must be >= 0");
  if (sigma == 0) return img;
  GrayImage out = img;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double noisy = img.v[i] + sigma * detail::counter_gaussian(seed, i);
    out.v[i] = std::min(255.0, std::max(0.0, noisy));
  }
  return out;
}

}  // namespace proxstair
