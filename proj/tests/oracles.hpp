// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

// Independent reference implementations used as test oracles.  They use
// plain loops over std::vector, share no code with the library and favour
// the textbook formula over numerical care wherever inputs are small.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

inline double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

inline Matrix cosine(const Matrix& z1, const Matrix& z2) {
  Matrix s(z1.size(), std::vector<double>(z2.size()));
  for (std::size_t i = 0; i < z1.size(); ++i) {
    for (std::size_t j = 0; j < z2.size(); ++j) s[i][j] = dot(z1[i], z2[j]) / (norm(z1[i]) * norm(z2[j]));
  }
  return s;
}

// −(1/N) Σ_i log[ exp(S_ii/τ) / ((1/N) Σ_k exp(S_ik/τ)) ], written directly.
// Entries are bounded by 1/τ, so exp cannot overflow for the τ used in tests.
inline double contrast(const Matrix& s, double tau) {
  const double n = static_cast<double>(s.size());
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double denom = 0.0;
    for (double v : s[i]) denom += std::exp(v / tau);
    total += std::log(std::exp(s[i][i] / tau) / (denom / n));
  }
  return -total / n;
}

inline double penalty(const Matrix& z1, const Matrix& z2) {
  double total = 0.0;
  for (std::size_t i = 0; i < z1.size(); ++i) {
    for (std::size_t k = 0; k < z1[i].size(); ++k) total += (z1[i][k] - z2[i][k]) * (z1[i][k] - z2[i][k]);
  }
  return total / static_cast<double>(z1.size());
}

struct Terms {
  double alignment;
  double uniformity;
};

inline Terms decomposition(const Matrix& s, double tau) {
  const double n = static_cast<double>(s.size());
  Terms t{0.0, 0.0};
  for (std::size_t i = 0; i < s.size(); ++i) {
    t.alignment += s[i][i] / tau;
    double m = 0.0;
    for (double v : s[i]) m += std::exp(v / tau);
    t.uniformity += std::log(m / n);
  }
  t.alignment /= n;
  t.uniformity /= n;
  return t;
}

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

inline double alignment(const Matrix& u1, const Matrix& u2) {
  double s = 0.0;
  for (std::size_t i = 0; i < u1.size(); ++i) s += sq_dist(u1[i], u2[i]);
  return s / static_cast<double>(u1.size());
}

inline double uniformity(const Matrix& u) {
  double s = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (std::size_t j = 0; j < u.size(); ++j) {
      if (i == j) continue;
      s += std::exp(-2.0 * sq_dist(u[i], u[j]));
      ++pairs;
    }
  }
  return std::log(s / static_cast<double>(pairs));
}

// Average ranks by exhaustive counting: rank = 1 + #smaller + (#equal − 1)/2.
inline std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double smaller = 0.0, equal = 0.0;
    for (double v : x) {
      if (v < x[i]) smaller += 1.0;
      if (v == x[i]) equal += 1.0;
    }
    r[i] = 1.0 + smaller + (equal - 1.0) / 2.0;
  }
  return r;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(ranks(x), ranks(y));
}

// Adam, one scalar coordinate at a time.
struct ScalarAdam {
  double m = 0.0, v = 0.0;
  int t = 0;
  double step(double theta, double g, double lr) {
    ++t;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mhat = m / (1.0 - std::pow(0.9, t));
    const double vhat = v / (1.0 - std::pow(0.999, t));
    return theta - lr * mhat / (std::sqrt(vhat) + 1e-8);
  }
};

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, std::vector<double>(cols));
  for (auto& r : m) {
    for (auto& v : r) v = u(rng);
  }
  return m;
}

inline Matrix normalized(Matrix m) {
  for (auto& r : m) {
    const double n = norm(r);
    for (auto& v : r) v /= n;
  }
  return m;
}

}  // namespace oracle
