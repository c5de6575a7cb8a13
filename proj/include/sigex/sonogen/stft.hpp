#pragma once

#include "sigex/sonogen/types.hpp"

namespace sigex::sonogen {

inline constexpr double kDbEpsilon = 1e-10;
inline constexpr double kDbFloor = -80.0;

std::vector<double> make_window(Window w, int n);

/// Linear |DFT| of each windowed frame: rows = fft_size/2 + 1 bins, cols =
/// floor((len - fft_size)/hop) + 1 frames.
Grid stft_magnitude(const TimeSeries& x, const StftParams& params);

/// 20 log10(mag + eps) floored at -80 dB, then min-max normalized over the
/// whole grid. A flat grid becomes all 0.5.
Grid db_normalize(const Grid& magnitude);

Spectrogram stft(const TimeSeries& x, const StftParams& params);

/// Corpus image: STFT magnitude cropped to the geometry's bins and first
/// frames, then log-scaled and normalized.
Spectrogram render_image(const TimeSeries& x, const ImageGeometry& geometry);

}  // namespace sigex::sonogen
