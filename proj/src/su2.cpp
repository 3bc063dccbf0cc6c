// SPDX-License-Identifier: Apache-2.0
#include "symtensor/su2.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>

namespace symtensor {

namespace {

// Factorials of n/1 for n up to 170 in long double; spins here stay small
// (j <= ~8), so arguments never leave the exact range of the 64-bit mantissa.
const std::array<long double, 171>& factorials() {
  static const std::array<long double, 171> table = [] {
    std::array<long double, 171> t{};
    t[0] = 1.0L;
    for (int n = 1; n <= 170; ++n) t[n] = t[n - 1] * n;
    return t;
  }();
  return table;
}

long double fact(int n) {
  if (n < 0) throw std::logic_error("factorial of negative integer");
  return factorials()[static_cast<std::size_t>(n)];
}

// Triangle coefficient Delta(abc) = (a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)!,
// arguments in twice-spin units (all combinations below are even).
long double triangle_coeff(int ta, int tb, int tc) {
  return fact((ta + tb - tc) / 2) * fact((ta - tb + tc) / 2) *
         fact((-ta + tb + tc) / 2) / fact((ta + tb + tc) / 2 + 1);
}

std::atomic<long> g_cg_blocks_computed{0};
std::atomic<long> g_f_values_computed{0};

}  // namespace

bool triangle_ok(Spin ja, Spin jb, Spin jc) {
  if ((ja.twice_j + jb.twice_j + jc.twice_j) % 2 != 0) return false;
  return jc.twice_j >= std::abs(ja.twice_j - jb.twice_j) &&
         jc.twice_j <= ja.twice_j + jb.twice_j;
}

double cg_coefficient(Spin ja, SpinProjection ma, Spin jb, SpinProjection mb,
                      Spin jc, SpinProjection mc) {
  if (!ma.valid_for(ja) || !mb.valid_for(jb) || !mc.valid_for(jc))
    throw std::invalid_argument("cg_coefficient: projection invalid for its spin");
  if (!triangle_ok(ja, jb, jc)) return 0.0;
  if (ma.twice_m + mb.twice_m != mc.twice_m) return 0.0;

  const int tja = ja.twice_j, tjb = jb.twice_j, tjc = jc.twice_j;
  const int tma = ma.twice_m, tmb = mb.twice_m, tmc = mc.twice_m;

  // Racah's closed form. All factorial arguments are integers because the
  // triple passed the triangle test.
  const long double pre =
      std::sqrt(static_cast<long double>(tjc + 1) * triangle_coeff(tja, tjb, tjc) *
                fact((tjc + tmc) / 2) * fact((tjc - tmc) / 2) *
                fact((tja - tma) / 2) * fact((tja + tma) / 2) *
                fact((tjb - tmb) / 2) * fact((tjb + tmb) / 2));

  // Summation index k bounds, in integer (not twice) units.
  const int k_min = std::max({0, (tjb - tjc - tma) / 2, (tja - tjc + tmb) / 2});
  const int k_max = std::min({(tja + tjb - tjc) / 2, (tja - tma) / 2, (tjb + tmb) / 2});

  long double sum = 0.0L;
  for (int k = k_min; k <= k_max; ++k) {
    const long double denom = fact(k) * fact((tja + tjb - tjc) / 2 - k) *
                              fact((tja - tma) / 2 - k) * fact((tjb + tmb) / 2 - k) *
                              fact((tjc - tjb + tma) / 2 + k) *
                              fact((tjc - tja - tmb) / 2 + k);
    sum += ((k % 2 == 0) ? 1.0L : -1.0L) / denom;
  }
  return static_cast<double>(pre * sum);
}

const CGBlock& cg_block(Spin ja, Spin jb, Spin jc) {
  static std::map<std::array<int, 3>, CGBlock> cache;
  static std::shared_mutex mtx;
  const std::array<int, 3> key{ja.twice_j, jb.twice_j, jc.twice_j};
  {
    std::shared_lock lock(mtx);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  CGBlock blk;
  blk.ja = ja;
  blk.jb = jb;
  blk.jc = jc;
  blk.data.assign(static_cast<std::size_t>(ja.dim()) * jb.dim() * jc.dim(), 0.0);
  if (triangle_ok(ja, jb, jc)) {
    for (int ia = 0; ia < ja.dim(); ++ia)
      for (int ib = 0; ib < jb.dim(); ++ib) {
        const int tma = 2 * ia - ja.twice_j;
        const int tmb = 2 * ib - jb.twice_j;
        const int tmc = tma + tmb;
        if (std::abs(tmc) > jc.twice_j) continue;
        const int ic = (tmc + jc.twice_j) / 2;
        blk.data[static_cast<std::size_t>((ia * jb.dim() + ib) * jc.dim() + ic)] =
            cg_coefficient(ja, SpinProjection(tma), jb, SpinProjection(tmb), jc,
                           SpinProjection(tmc));
      }
  }
  std::unique_lock lock(mtx);
  auto [it, inserted] = cache.emplace(key, std::move(blk));
  if (inserted) g_cg_blocks_computed.fetch_add(1, std::memory_order_relaxed);
  return it->second;
}

Eigen::MatrixXd omega(Spin j) {
  const int d = j.dim();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, d);
  const double s = 1.0 / std::sqrt(static_cast<double>(d));
  for (int i = 0; i < d; ++i) {
    const int tm = 2 * i - j.twice_j;            // 2m for the row
    const int irev = (-tm + j.twice_j) / 2;      // column index of -m
    const int e = (j.twice_j - tm) / 2;          // j - m, an integer
    w(i, irev) = ((e % 2 == 0) ? s : -s);
  }
  return w;
}

Eigen::MatrixXd cup(Spin j) { return std::sqrt(static_cast<double>(j.dim())) * omega(j); }

Eigen::MatrixXd cap(Spin j) {
  const double sign = (j.twice_j % 2 == 0) ? 1.0 : -1.0;
  return sign * std::sqrt(static_cast<double>(j.dim())) * omega(j);
}

double wigner6j(Spin j1, Spin j2, Spin j3, Spin j4, Spin j5, Spin j6) {
  if (!triangle_ok(j1, j2, j3) || !triangle_ok(j1, j5, j6) ||
      !triangle_ok(j4, j2, j6) || !triangle_ok(j4, j5, j3))
    return 0.0;
  const int t1 = j1.twice_j, t2 = j2.twice_j, t3 = j3.twice_j;
  const int t4 = j4.twice_j, t5 = j5.twice_j, t6 = j6.twice_j;

  const long double pre = std::sqrt(
      triangle_coeff(t1, t2, t3) * triangle_coeff(t1, t5, t6) *
      triangle_coeff(t4, t2, t6) * triangle_coeff(t4, t5, t3));

  // Sum over t with all seven factorial arguments non-negative.
  const int a1 = (t1 + t2 + t3) / 2, a2 = (t1 + t5 + t6) / 2;
  const int a3 = (t4 + t2 + t6) / 2, a4 = (t4 + t5 + t3) / 2;
  const int b1 = (t1 + t2 + t4 + t5) / 2, b2 = (t2 + t3 + t5 + t6) / 2,
            b3 = (t3 + t1 + t6 + t4) / 2;
  const int t_min = std::max({a1, a2, a3, a4});
  const int t_max = std::min({b1, b2, b3});

  long double sum = 0.0L;
  for (int t = t_min; t <= t_max; ++t) {
    const long double num = fact(t + 1);
    const long double denom = fact(t - a1) * fact(t - a2) * fact(t - a3) *
                              fact(t - a4) * fact(b1 - t) * fact(b2 - t) * fact(b3 - t);
    sum += ((t % 2 == 0) ? 1.0L : -1.0L) * num / denom;
  }
  return static_cast<double>(pre * sum);
}

double recoupling_f(Spin ja, Spin jb, Spin jc, Spin jd, Spin je, Spin jf) {
  static std::map<std::array<int, 6>, double> cache;
  static std::shared_mutex mtx;
  const std::array<int, 6> key{ja.twice_j, jb.twice_j, jc.twice_j,
                               jd.twice_j, je.twice_j, jf.twice_j};
  {
    std::shared_lock lock(mtx);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  double value = 0.0;
  if (triangle_ok(ja, jb, je) && triangle_ok(je, jc, jd) &&
      triangle_ok(jb, jc, jf) && triangle_ok(ja, jf, jd)) {
    const int phase_tw = (ja.twice_j + jb.twice_j + jc.twice_j + jd.twice_j) / 2;
    const double sign = (phase_tw % 2 == 0) ? 1.0 : -1.0;
    value = sign * std::sqrt(static_cast<double>(je.dim()) * jf.dim()) *
            wigner6j(ja, jb, je, jc, jd, jf);
  }
  std::unique_lock lock(mtx);
  auto [it, inserted] = cache.emplace(key, value);
  if (inserted) g_f_values_computed.fetch_add(1, std::memory_order_relaxed);
  return it->second;
}

double swap_r(Spin ja, Spin jb, Spin jc) {
  if (!triangle_ok(ja, jb, jc))
    throw std::invalid_argument("swap_r: incompatible spin triple");
  const int e = (ja.twice_j + jb.twice_j - jc.twice_j) / 2;
  return (e % 2 == 0) ? 1.0 : -1.0;
}

Generators generators(Spin j) {
  const int d = j.dim();
  Eigen::MatrixXcd jp = Eigen::MatrixXcd::Zero(d, d);
  Eigen::MatrixXcd jz = Eigen::MatrixXcd::Zero(d, d);
  const double jj = 0.5 * j.twice_j;
  for (int i = 0; i < d; ++i) {
    const double m = -jj + i;
    jz(i, i) = m;
    if (i + 1 < d) jp(i + 1, i) = std::sqrt(jj * (jj + 1) - m * (m + 1));
  }
  const Eigen::MatrixXcd jm = jp.adjoint();
  Generators g;
  g.jx = 0.5 * (jp + jm);
  g.jy = std::complex<double>(0, -0.5) * (jp - jm);
  g.jz = jz;
  return g;
}

RealGenerators real_generators(Spin j) {
  const int d = j.dim();
  Eigen::MatrixXd jp = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd jz = Eigen::MatrixXd::Zero(d, d);
  const double jj = 0.5 * j.twice_j;
  for (int i = 0; i < d; ++i) {
    const double m = -jj + i;
    jz(i, i) = m;
    if (i + 1 < d) jp(i + 1, i) = std::sqrt(jj * (jj + 1) - m * (m + 1));
  }
  RealGenerators g;
  g.jx = 0.5 * (jp + jp.transpose());
  g.ijy = 0.5 * (jp - jp.transpose());  // i*Jy = (J+ - J-)/2
  g.jz = jz;
  return g;
}

namespace detail {
long cg_blocks_computed() { return g_cg_blocks_computed.load(); }
long f_values_computed() { return g_f_values_computed.load(); }
}  // namespace detail

}  // namespace symtensor
