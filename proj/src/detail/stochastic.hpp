#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "aliased_ac/error.hpp"
#include "aliased_ac/types.hpp"

namespace aliased_ac::detail {

/// Checks that row[0..n) is a probability vector within kSimplexTolerance and
/// renormalizes it in place. Throws ValidationError naming the row otherwise.
inline void normalize_simplex(double* row, int n, const std::string& name) {
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!(row[i] >= 0.0) || !std::isfinite(row[i])) {
      std::ostringstream msg;
      msg << name << " has invalid entry " << row[i] << " at index " << i;
      throw ValidationError(msg.str());
    }
    total += row[i];
  }
  if (std::abs(total - 1.0) > kSimplexTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << name << " sums to " << total << ", expected 1";
    throw ValidationError(msg.str());
  }
  // rows already within rounding of 1 are kept as written so that a
  // serialized model loads back bit for bit
  if (std::abs(total - 1.0) <= 4.0 * n * std::numeric_limits<double>::epsilon()) return;
  for (int i = 0; i < n; ++i) row[i] /= total;
}

inline bool is_one_hot(const double* row, int n) {
  int ones = 0;
  for (int i = 0; i < n; ++i) {
    if (row[i] == 1.0) {
      ++ones;
    } else if (row[i] != 0.0) {
      return false;
    }
  }
  return ones == 1;
}

}  // namespace aliased_ac::detail
