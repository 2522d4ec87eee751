#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "proxstair/errors.hpp"

namespace proxstair {

/// Grayscale image with real-valued intensities (natural range 0..255,
/// not clamped internally). Row-major storage.
struct GrayImage {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  GrayImage() = default;
  GrayImage(int r, int c, double fill = 0.0)
      : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, fill) {}

  double& at(int i, int j) { return v[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const { return v[static_cast<std::size_t>(i) * cols + j]; }
  std::size_t size() const { return v.size(); }
};

/// Reads PGM (P2 ASCII or P5 binary, maxval <= 255, '#' comments allowed).
GrayImage read_pgm(const std::vector<std::uint8_t>& bytes);

/// Writes binary P5; values rounded half away from zero, then clamped to
/// [0, 255]. Bit-exact inverse of read_pgm on integer-valued images.
std::vector<std::uint8_t> write_pgm(const GrayImage& img);

GrayImage read_pgm_file(const std::string& path);
void write_pgm_file(const std::string& path, const GrayImage& img);

/// Adds i.i.d. zero-mean Gaussian noise (standard deviation sigma) and clamps
/// to [0, 255]. The generator is counter-based (splitmix64 keyed on seed and
/// pixel index, Box-Muller transform), so the result depends only on
/// (seed, shape, sigma).
GrayImage add_gaussian_noise(const GrayImage& img, double sigma,
                             std::uint64_t seed);

namespace detail {
/// Standard normal draw for a given (seed, counter) pair.
double counter_gaussian(std::uint64_t seed, std::uint64_t counter);
}  // namespace detail

}  // namespace proxstair
