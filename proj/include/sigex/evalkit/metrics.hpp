#pragma once

#include <vector>

#include "sigex/core/grid.hpp"
#include "sigex/maskforge/maskforge.hpp"

namespace sigex::evalkit {

struct ExtractionMetrics {
  double removed_noise_pct = 0.0;
  double overwritten_tones_pct = 0.0;
  int intersecting_regions = 0;
};

// All three work on the retained-cell indicator (1 = kept), so the white
// encoding of the background never matters.

/// 100 * whitened cells outside gt / cells outside gt. Throws when gt covers everything.
double removed_noise_pct(const Grid& retained, const Grid& gt);

/// 100 * whitened cells inside gt / gt cells. Throws on an empty gt.
double overwritten_tones_pct(const Grid& retained, const Grid& gt);

/// 4-connected components of retained cells touching any other-class mask.
int intersecting_regions(const Grid& retained, const std::vector<Grid>& other_gts);

/// Labels 4-connected components of cells > 0.5 from 1 upward; 0 elsewhere.
/// Returns the component count.
int label_components(const Grid& binary, std::vector<int>& labels);

ExtractionMetrics evaluate(const maskforge::SignatureImage& sig, const Grid& gt,
                           const std::vector<Grid>& other_gts);

}  // namespace sigex::evalkit
