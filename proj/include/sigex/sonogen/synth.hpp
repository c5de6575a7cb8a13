#pragma once

#include <cstdint>
#include <vector>

#include "sigex/sonogen/types.hpp"

namespace sigex::sonogen {

struct SynthOptions {
  int sample_rate = 4096;
  /// Gaussian noise standard deviation at noise_level 1.
  double noise_scale = 1.0;
  /// Amplitude factor applied to interfering classes' tracks.
  double interference_gain = 0.35;
};

/// Sum of the class's tracks and attenuated interference tracks plus
/// Gaussian noise of std noise_level * noise_scale. Pure in (arguments, seed).
TimeSeries synth_signal(const ClassSpec& spec, double duration, double noise_level,
                        const std::vector<ClassSpec>& interference, std::uint64_t seed,
                        const SynthOptions& options = {});

/// Marks every (bin, frame) within +/-1 bin of an active harmonic of any
/// track. Frames are timed at their centres; harmonics with zero amplitude
/// are ignored.
GroundTruthMask ground_truth_mask(const ClassSpec& spec, const ImageGeometry& geometry);

inline constexpr int kMaskHalfWidth = 1;

}  // namespace sigex::sonogen
