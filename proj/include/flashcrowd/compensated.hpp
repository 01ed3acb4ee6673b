#pragma once

#include <cmath>

namespace flashcrowd {

// Kahan-Neumaier running sum; the result is a pure function of the addend
// order, which the campaign reducer relies on for reproducibility.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

}  // namespace flashcrowd
