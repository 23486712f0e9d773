// promdec/logmath.hpp

// Copyright 2026 The promdec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>

namespace promdec {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();
inline constexpr double kLn10 = std::numbers::ln10;

inline double log_add(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

template <typename T>
double logsumexp(std::span<const T> xs) {
  double m = kLogZero;
  for (T x : xs) m = std::max(m, static_cast<double>(x));
  if (m == kLogZero || !std::isfinite(m)) return m;
  double s = 0.0;
  for (T x : xs) s += std::exp(static_cast<double>(x) - m);
  return m + std::log(s);
}

}  // namespace promdec
