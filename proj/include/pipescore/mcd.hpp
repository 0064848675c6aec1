#pragma once

#include "pipescore/mfcc.hpp"

namespace pipescore {

enum class McdAlign { None, Dtw };

// Mean mel-cepstral distortion in dB:
//   MCD_t = (10/ln 10) * sqrt(2 * sum_d (c_d - c'_d)^2)
// averaged over frames. With align=None the sequences must agree in frame
// count to within 2 frames (trimmed to the shorter). With align=Dtw frames are
// paired by dynamic time warping over Euclidean cepstral distance.
double mcd(const CepstraSequence& reference, const CepstraSequence& processed,
           McdAlign align = McdAlign::None);

}  // namespace pipescore
