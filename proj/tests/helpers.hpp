// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <random>

#include "symtensor/dense_oracle.hpp"
#include "symtensor/su2.hpp"
#include "symtensor/sym_tensor.hpp"

namespace symtensor::testing {

/// F by brute-force contraction of the two three-spin coupling tensors,
/// summed over all projections (the independent oracle for recoupling_f).
inline double f_by_cg_contraction(int a, int b, int c, int d, int e, int f) {
  double s = 0;
  const Spin ja(a), jb(b), jc(c), jd(d), je(e), jf(f);
  for (int tma = -a; tma <= a; tma += 2)
    for (int tmb = -b; tmb <= b; tmb += 2)
      for (int tmc = -c; tmc <= c; tmc += 2) {
        const int tme = tma + tmb, tmf = tmb + tmc, tmd = tma + tmb + tmc;
        if (std::abs(tme) > e || std::abs(tmf) > f || std::abs(tmd) > d) continue;
        if ((tme - e) % 2 != 0 || (tmf - f) % 2 != 0 || (tmd - d) % 2 != 0) continue;
        s += cg_coefficient(ja, SpinProjection(tma), jb, SpinProjection(tmb), je,
                            SpinProjection(tme)) *
             cg_coefficient(je, SpinProjection(tme), jc, SpinProjection(tmc), jd,
                            SpinProjection(tmd)) *
             cg_coefficient(jb, SpinProjection(tmb), jc, SpinProjection(tmc), jf,
                            SpinProjection(tmf)) *
             cg_coefficient(ja, SpinProjection(tma), jf, SpinProjection(tmf), jd,
                            SpinProjection(tmd));
      }
  return s / (d + 1);
}

/// Random SU(2) space with spins up to max_twice_j and degeneracies up to
/// max_deg (at least one sector).
inline RepSpace random_su2_space(std::mt19937_64& rng, int max_twice_j, int max_deg) {
  std::vector<RepSpace::Sector> secs;
  for (int c = 0; c <= max_twice_j; ++c)
    if (rng() % 2) secs.push_back({c, 1 + static_cast<int>(rng() % max_deg)});
  if (secs.empty()) secs.push_back({static_cast<int>(rng() % (max_twice_j + 1)), 1});
  return RepSpace(su2_system(), secs);
}

inline std::vector<int> random_perm(std::mt19937_64& rng, int k) {
  std::vector<int> p(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) p[static_cast<std::size_t>(i)] = i;
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

inline double dense_diff(const DenseTensorD& a, const DenseTensorD& b) {
  return (a - b).norm();
}

}  // namespace symtensor::testing
