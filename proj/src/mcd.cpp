#include "pipescore/mcd.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

#include "pipescore/errors.hpp"
#include "pipescore/sum.hpp"

namespace pipescore {

namespace {

const double kMcdScale = 10.0 / std::log(10.0);

double frame_sq_dist(const std::array<double, kCepstralCoeffs>& a,
                     const std::array<double, kCepstralCoeffs>& b) {
  double acc = 0.0;
  for (int d = 0; d < kCepstralCoeffs; ++d) {
    const double diff = a[static_cast<size_t>(d)] - b[static_cast<size_t>(d)];
    acc += diff * diff;
  }
  return acc;
}

double mcd_of_sq(double sq) { return kMcdScale * std::sqrt(2.0 * sq); }

}  // namespace

double mcd(const CepstraSequence& reference, const CepstraSequence& processed, McdAlign align) {
  if (!(reference.plan == processed.plan) || reference.sample_rate != processed.sample_rate) {
    throw ValidationError("mcd requires identical frame plans and sample rates");
  }
  const size_t nr = reference.frame_count();
  const size_t np = processed.frame_count();
  if (nr == 0 || np == 0) throw DataError("mcd: empty cepstra overlap");

  if (align == McdAlign::None) {
    const size_t diff = nr > np ? nr - np : np - nr;
    if (diff > 2) {
      throw DataError("mcd align=none: frame counts differ by " + std::to_string(diff) +
                      " (> 2); use dtw alignment");
    }
    const size_t n = std::min(nr, np);
    return pairwise_sum(n,
                        [&](size_t t) {
                          return mcd_of_sq(frame_sq_dist(reference.coeffs[t], processed.coeffs[t]));
                        }) /
           static_cast<double>(n);
  }

  // DTW over Euclidean cepstral distance; average per-frame MCD on the path.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> cost(nr + 1, std::vector<double>(np + 1, kInf));
  cost[0][0] = 0.0;
  for (size_t i = 1; i <= nr; ++i) {
    for (size_t j = 1; j <= np; ++j) {
      const double d = std::sqrt(frame_sq_dist(reference.coeffs[i - 1], processed.coeffs[j - 1]));
      cost[i][j] = d + std::min({cost[i - 1][j - 1], cost[i - 1][j], cost[i][j - 1]});
    }
  }
  // Backtrack to collect the aligned pairs.
  std::vector<std::pair<size_t, size_t>> path;
  size_t i = nr, j = np;
  while (i > 0 && j > 0) {
    path.emplace_back(i - 1, j - 1);
    const double diag = cost[i - 1][j - 1];
    const double up = cost[i - 1][j];
    const double left = cost[i][j - 1];
    if (diag <= up && diag <= left) {
      --i;
      --j;
    } else if (up <= left) {
      --i;
    } else {
      --j;
    }
  }
  return pairwise_sum(path.size(),
                      [&](size_t k) {
                        return mcd_of_sq(
                            frame_sq_dist(reference.coeffs[path[k].first], processed.coeffs[path[k].second]));
                      }) /
         static_cast<double>(path.size());
}

}  // namespace pipescore
