#include "sigex/sonogen/fft.hpp"

#include <numbers>
#include <stdexcept>
#include <string>

namespace sigex::sonogen {
namespace {

// Transforms `data` (stride `stride`, length n) into `out`; `scratch` has room for n values.
void radix2(const Complex* data, std::size_t stride, std::size_t n, Complex* out,
            Complex* scratch, double sign) {
  if (n == 1) {
    out[0] = data[0];
    return;
  }
  const std::size_t half = n / 2;
  // Even subsequence into out[0..half), odd into out[half..n).
  radix2(data, stride * 2, half, scratch, out, sign);
  radix2(data + stride, stride * 2, half, scratch + half, out + half, sign);
  for (std::size_t k = 0; k < half; ++k) {
    const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) /
                         static_cast<double>(n);
    const Complex twiddle = std::polar(1.0, angle) * scratch[half + k];
    out[k] = scratch[k] + twiddle;
    out[k + half] = scratch[k] - twiddle;
  }
}

std::vector<Complex> transform(std::span<const Complex> input, double sign) {
  if (!is_power_of_two(input.size()))
    throw std::length_error("dft: frame length " + std::to_string(input.size()) +
                            " is not a power of two");
  std::vector<Complex> out(input.size());
  std::vector<Complex> scratch(input.size());
  radix2(input.data(), 1, input.size(), out.data(), scratch.data(), sign);
  return out;
}

}  // namespace

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::vector<Complex> dft(std::span<const Complex> frame) { return transform(frame, -1.0); }

std::vector<Complex> dft(std::span<const double> frame) {
  std::vector<Complex> buf(frame.begin(), frame.end());
  return transform(buf, -1.0);
}

std::vector<Complex> idft(std::span<const Complex> spectrum) {
  auto out = transform(spectrum, 1.0);
  const double scale = 1.0 / static_cast<double>(out.size());
  for (auto& v : out) v *= scale;
  return out;
}

}  // namespace sigex::sonogen
