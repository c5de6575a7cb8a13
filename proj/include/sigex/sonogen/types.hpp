#pragma once

#include <string>
#include <vector>

#include "sigex/core/grid.hpp"

namespace sigex::sonogen {

struct TimeSeries {
  std::vector<double> samples;
  int sample_rate = 0;

  /// Throws std::invalid_argument on empty, non-finite, or bad rate.
  void validate() const;
  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

struct Harmonic {
  int multiple = 1;
  double amplitude = 1.0;
};

/// A narrowband source line plus its harmonics, optionally frequency-modulated.
struct TonalTrack {
  double base_freq = 0.0;  // Hz
  std::vector<Harmonic> harmonics{{1, 1.0}};
  double fm_depth = 0.0;  // Hz, applied to the fundamental
  double fm_rate = 0.0;   // Hz
  double start_time = 0.0;
  double end_time = 1e9;

  /// Highest instantaneous frequency reached by any harmonic.
  double max_frequency() const;
  void validate(int sample_rate) const;
};

struct ClassSpec {
  int class_id = 0;
  std::string name;
  std::vector<TonalTrack> tracks;
};

enum class Window { Hann, Rectangular };

struct StftParams {
  int fft_size = 128;
  int hop = 64;
  int sample_rate = 4096;
  Window window = Window::Hann;
};

/// Normalized magnitude image. Row r holds FFT bin `first_bin + r`; a raw
/// stft() result keeps every bin (first_bin 0, fft_size/2 + 1 rows).
struct Spectrogram {
  Grid grid;
  int fft_size = 0;
  int hop = 0;
  int sample_rate = 0;
  int first_bin = 0;
};

struct GroundTruthMask {
  Grid grid;
  int class_id = 0;
};

/// Geometry of the corpus image cut out of a full STFT.
struct ImageGeometry {
  StftParams stft;
  int rows = 64;       // bins kept
  int cols = 64;       // frames kept
  int first_bin = 1;   // DC dropped

  /// Number of samples that yields exactly `cols` frames.
  std::size_t signal_length() const {
    return static_cast<std::size_t>(stft.fft_size) + static_cast<std::size_t>(cols - 1) * stft.hop;
  }
  double duration() const { return static_cast<double>(signal_length()) / stft.sample_rate; }
};

}  // namespace sigex::sonogen
