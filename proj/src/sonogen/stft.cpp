#include "sigex/sonogen/stft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "sigex/sonogen/fft.hpp"

namespace sigex::sonogen {

std::vector<double> make_window(Window w, int n) {
  std::vector<double> win(static_cast<std::size_t>(n), 1.0);
  if (w == Window::Hann) {
    // Periodic Hann: exact bin-centred sinusoids leak only into the two neighbours.
    for (int i = 0; i < n; ++i)
      win[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  }
  return win;
}

Grid stft_magnitude(const TimeSeries& x, const StftParams& params) {
  x.validate();
  const auto n = static_cast<std::size_t>(params.fft_size);
  if (!is_power_of_two(n))
    throw std::length_error("stft: fft_size " + std::to_string(n) + " is not a power of two");
  if (params.hop <= 0 || params.hop > params.fft_size)
    throw std::invalid_argument("stft: hop must be in [1, fft_size]");
  if (x.samples.size() < n)
    throw std::length_error("stft: signal has " + std::to_string(x.samples.size()) +
                            " samples; at least " + std::to_string(n) + " required");

  const int frames = static_cast<int>((x.samples.size() - n) / params.hop) + 1;
  const int bins = params.fft_size / 2 + 1;
  const auto window = make_window(params.window, params.fft_size);
  Grid mag(bins, frames);
  std::vector<double> frame(n);
  for (int f = 0; f < frames; ++f) {
    const std::size_t offset = static_cast<std::size_t>(f) * params.hop;
    for (std::size_t i = 0; i < n; ++i) frame[i] = x.samples[offset + i] * window[i];
    const auto spectrum = dft(frame);
    for (int b = 0; b < bins; ++b) mag(b, f) = std::abs(spectrum[b]);
  }
  return mag;
}

Grid db_normalize(const Grid& magnitude) {
  Grid db(magnitude.rows(), magnitude.cols());
  auto src = magnitude.cells();
  auto dst = db.cells();
  for (std::size_t i = 0; i < src.size(); ++i)
    dst[i] = std::max(kDbFloor, 20.0 * std::log10(src[i] + kDbEpsilon));
  return minmax_normalize(db, 0.5);
}

Spectrogram stft(const TimeSeries& x, const StftParams& params) {
  return {db_normalize(stft_magnitude(x, params)), params.fft_size, params.hop,
          params.sample_rate, 0};
}

Spectrogram render_image(const TimeSeries& x, const ImageGeometry& geometry) {
  const Grid full = stft_magnitude(x, geometry.stft);
  if (geometry.first_bin + geometry.rows > full.rows())
    throw std::invalid_argument("render_image: requested bins exceed fft_size/2 + 1");
  if (geometry.cols > full.cols())
    throw std::length_error("render_image: signal has " + std::to_string(x.samples.size()) +
                            " samples; at least " + std::to_string(geometry.signal_length()) +
                            " required for " + std::to_string(geometry.cols) + " frames");
  Grid crop(geometry.rows, geometry.cols);
  for (int r = 0; r < geometry.rows; ++r)
    for (int c = 0; c < geometry.cols; ++c) crop(r, c) = full(geometry.first_bin + r, c);
  return {db_normalize(crop), geometry.stft.fft_size, geometry.stft.hop,
          geometry.stft.sample_rate, geometry.first_bin};
}

}  // namespace sigex::sonogen
