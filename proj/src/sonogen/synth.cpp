#include "sigex/sonogen/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace sigex::sonogen {

void TimeSeries::validate() const {
  if (sample_rate <= 0) throw std::invalid_argument("TimeSeries: sample_rate must be positive");
  if (samples.empty()) throw std::invalid_argument("TimeSeries: no samples");
  for (double s : samples)
    if (!std::isfinite(s)) throw std::invalid_argument("TimeSeries: non-finite sample");
}

double TonalTrack::max_frequency() const {
  int top = 0;
  for (const auto& h : harmonics) top = std::max(top, h.multiple);
  return top * (base_freq + fm_depth);
}

void TonalTrack::validate(int sample_rate) const {
  if (base_freq <= 0.0) throw std::invalid_argument("TonalTrack: base_freq must be positive");
  if (start_time >= end_time) throw std::invalid_argument("TonalTrack: start_time >= end_time");
  if (fm_depth < 0.0 || fm_rate < 0.0) throw std::invalid_argument("TonalTrack: negative FM");
  for (const auto& h : harmonics)
    if (h.multiple < 1) throw std::invalid_argument("TonalTrack: harmonic multiple < 1");
  const double nyquist = sample_rate / 2.0;
  if (max_frequency() >= nyquist)
    throw std::invalid_argument("TonalTrack: frequency " + std::to_string(max_frequency()) +
                                " Hz is at or above Nyquist " + std::to_string(nyquist) + " Hz");
}

namespace {

void add_track(std::vector<double>& out, const TonalTrack& track, double gain, int sample_rate,
               std::mt19937_64& rng) {
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
  const double two_pi = 2.0 * std::numbers::pi;
  for (const auto& h : track.harmonics) {
    const double phase0 = phase_dist(rng);
    if (h.amplitude == 0.0) continue;
    for (std::size_t n = 0; n < out.size(); ++n) {
      const double t = static_cast<double>(n) / sample_rate;
      if (t < track.start_time || t >= track.end_time) continue;
      // Integrated instantaneous phase of f(t) = m (f0 + depth sin(2 pi rate t)).
      double phase = two_pi * track.base_freq * t;
      if (track.fm_depth > 0.0 && track.fm_rate > 0.0)
        phase += track.fm_depth / track.fm_rate * (1.0 - std::cos(two_pi * track.fm_rate * t));
      out[n] += gain * h.amplitude * std::sin(h.multiple * phase + phase0);
    }
  }
}

}  // namespace

TimeSeries synth_signal(const ClassSpec& spec, double duration, double noise_level,
                        const std::vector<ClassSpec>& interference, std::uint64_t seed,
                        const SynthOptions& options) {
  if (duration <= 0.0) throw std::invalid_argument("synth_signal: duration must be positive");
  if (noise_level < 0.0 || noise_level > 1.0)
    throw std::invalid_argument("synth_signal: noise_level must be in [0,1]");
  for (const auto& t : spec.tracks) t.validate(options.sample_rate);
  for (const auto& other : interference)
    for (const auto& t : other.tracks) t.validate(options.sample_rate);

  const auto length = static_cast<std::size_t>(std::llround(duration * options.sample_rate));
  TimeSeries x{std::vector<double>(std::max<std::size_t>(length, 1), 0.0), options.sample_rate};
  std::mt19937_64 rng(seed);
  for (const auto& t : spec.tracks) add_track(x.samples, t, 1.0, options.sample_rate, rng);
  for (const auto& other : interference)
    for (const auto& t : other.tracks)
      add_track(x.samples, t, options.interference_gain, options.sample_rate, rng);
  if (noise_level > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_level * options.noise_scale);
    for (double& s : x.samples) s += noise(rng);
  }
  return x;
}

GroundTruthMask ground_truth_mask(const ClassSpec& spec, const ImageGeometry& geometry) {
  GroundTruthMask mask{Grid(geometry.rows, geometry.cols, 0.0), spec.class_id};
  const auto& p = geometry.stft;
  const double bin_hz = static_cast<double>(p.sample_rate) / p.fft_size;
  const double two_pi = 2.0 * std::numbers::pi;
  for (const auto& track : spec.tracks) {
    for (int frame = 0; frame < geometry.cols; ++frame) {
      const double t = (static_cast<double>(frame) * p.hop + p.fft_size / 2.0) / p.sample_rate;
      if (t < track.start_time || t >= track.end_time) continue;
      const double f0 = track.base_freq + track.fm_depth * std::sin(two_pi * track.fm_rate * t);
      for (const auto& h : track.harmonics) {
        if (h.amplitude == 0.0) continue;
        const int centre = static_cast<int>(std::lround(h.multiple * f0 / bin_hz));
        for (int b = centre - kMaskHalfWidth; b <= centre + kMaskHalfWidth; ++b) {
          const int row = b - geometry.first_bin;
          if (row >= 0 && row < geometry.rows) mask.grid(row, frame) = 1.0;
        }
      }
    }
  }
  return mask;
}

}  // namespace sigex::sonogen
