// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace symtensor {

/// Desk-scale guard: dense realizations refuse to exceed this many entries.
long dense_entry_limit();
void set_dense_entry_limit(long limit);

/// A plain multidimensional array, row-major, templated on the scalar.
/// This is the independent-oracle side of the engine; it is deliberately naive.
template <class S>
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(std::vector<int> dims) : dims_(std::move(dims)) {
    long n = 1;
    for (int d : dims_) {
      if (d <= 0) throw std::invalid_argument("DenseTensor: dims must be positive");
      n *= d;
      if (n > dense_entry_limit())
        throw std::invalid_argument("DenseTensor: size above the dense oracle limit");
    }
    data_.assign(static_cast<std::size_t>(n), S(0));
  }

  const std::vector<int>& dims() const { return dims_; }
  int rank() const { return static_cast<int>(dims_.size()); }
  long size() const { return static_cast<long>(data_.size()); }
  std::vector<S>& data() { return data_; }
  const std::vector<S>& data() const { return data_; }

  S& operator[](long i) { return data_[static_cast<std::size_t>(i)]; }
  const S& operator[](long i) const { return data_[static_cast<std::size_t>(i)]; }

  long flat_index(const std::vector<int>& idx) const {
    long f = 0;
    for (int l = 0; l < rank(); ++l) f = f * dims_[static_cast<std::size_t>(l)] + idx[static_cast<std::size_t>(l)];
    return f;
  }
  S& at(const std::vector<int>& idx) { return data_[static_cast<std::size_t>(flat_index(idx))]; }
  const S& at(const std::vector<int>& idx) const {
    return data_[static_cast<std::size_t>(flat_index(idx))];
  }

  double norm() const {
    double s = 0;
    for (const auto& v : data_) s += std::norm(std::complex<double>(v));
    return std::sqrt(s);
  }

 private:
  std::vector<int> dims_;
  std::vector<S> data_;
};

using DenseTensorD = DenseTensor<double>;
using DenseTensorC = DenseTensor<std::complex<double>>;

namespace dense_detail {
inline void advance(std::vector<int>& idx, const std::vector<int>& dims) {
  for (int l = static_cast<int>(dims.size()) - 1; l >= 0; --l) {
    if (++idx[static_cast<std::size_t>(l)] < dims[static_cast<std::size_t>(l)]) return;
    idx[static_cast<std::size_t>(l)] = 0;
  }
}
}  // namespace dense_detail

/// out position l takes the input index perm[l] (gather convention).
template <class S>
DenseTensor<S> dense_permute(const DenseTensor<S>& t, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != t.rank())
    throw std::invalid_argument("dense_permute: permutation length mismatch");
  std::vector<int> seen(perm.size(), 0);
  std::vector<int> odims(perm.size());
  for (std::size_t l = 0; l < perm.size(); ++l) {
    const int p = perm[l];
    if (p < 0 || p >= t.rank() || seen[static_cast<std::size_t>(p)]++)
      throw std::invalid_argument("dense_permute: not a permutation");
    odims[l] = t.dims()[static_cast<std::size_t>(p)];
  }
  DenseTensor<S> out(odims);
  if (t.size() == 0) return out;
  std::vector<int> oidx(perm.size(), 0), iidx(perm.size(), 0);
  for (long f = 0; f < out.size(); ++f) {
    for (std::size_t l = 0; l < perm.size(); ++l)
      iidx[static_cast<std::size_t>(perm[l])] = oidx[l];
    out[f] = t.at(iidx);
    dense_detail::advance(oidx, odims);
  }
  return out;
}

/// Plain row-major fuse of adjacent legs (leg, leg+1) into one leg of size
/// |a|*|b|; pure index arithmetic.
template <class S>
DenseTensor<S> dense_fuse_plain(const DenseTensor<S>& t, int leg) {
  if (leg < 0 || leg + 1 >= t.rank()) throw std::invalid_argument("dense_fuse_plain: bad leg");
  std::vector<int> odims;
  for (int l = 0; l < t.rank(); ++l) {
    if (l == leg)
      odims.push_back(t.dims()[static_cast<std::size_t>(l)] * t.dims()[static_cast<std::size_t>(l + 1)]);
    else if (l != leg + 1)
      odims.push_back(t.dims()[static_cast<std::size_t>(l)]);
  }
  DenseTensor<S> out(odims);
  out.data() = t.data();  // row-major layout is unchanged
  return out;
}

/// Inverse of dense_fuse_plain.
template <class S>
DenseTensor<S> dense_split_plain(const DenseTensor<S>& t, int leg, int d1, int d2) {
  if (leg < 0 || leg >= t.rank()) throw std::invalid_argument("dense_split_plain: bad leg");
  if (t.dims()[static_cast<std::size_t>(leg)] != d1 * d2)
    throw std::invalid_argument("dense_split_plain: sizes do not factor the leg");
  std::vector<int> odims;
  for (int l = 0; l < t.rank(); ++l) {
    if (l == leg) {
      odims.push_back(d1);
      odims.push_back(d2);
    } else {
      odims.push_back(t.dims()[static_cast<std::size_t>(l)]);
    }
  }
  DenseTensor<S> out(odims);
  out.data() = t.data();
  return out;
}

/// Contract over index pairs (a_leg, b_leg) via permute + reshape + GEMM,
/// i.e. the five-step pipeline on plain arrays.
template <class S>
DenseTensor<S> dense_contract(const DenseTensor<S>& a, const DenseTensor<S>& b,
                              const std::vector<std::pair<int, int>>& pairs) {
  std::vector<int> a_con, b_con;
  for (const auto& [x, y] : pairs) {
    a_con.push_back(x);
    b_con.push_back(y);
    if (a.dims()[static_cast<std::size_t>(x)] != b.dims()[static_cast<std::size_t>(y)])
      throw std::invalid_argument("dense_contract: contracted sizes differ");
  }
  std::vector<int> a_free, b_free;
  for (int l = 0; l < a.rank(); ++l)
    if (std::find(a_con.begin(), a_con.end(), l) == a_con.end()) a_free.push_back(l);
  for (int l = 0; l < b.rank(); ++l)
    if (std::find(b_con.begin(), b_con.end(), l) == b_con.end()) b_free.push_back(l);

  std::vector<int> pa = a_free, pb = b_con;
  pa.insert(pa.end(), a_con.begin(), a_con.end());
  pb.insert(pb.end(), b_free.begin(), b_free.end());
  const DenseTensor<S> ap = dense_permute(a, pa);
  const DenseTensor<S> bp = dense_permute(b, pb);

  long m = 1, k = 1, n = 1;
  for (int l : a_free) m *= a.dims()[static_cast<std::size_t>(l)];
  for (int l : a_con) k *= a.dims()[static_cast<std::size_t>(l)];
  for (int l : b_free) n *= b.dims()[static_cast<std::size_t>(l)];

  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const Mat> ma(ap.data().data(), m, k);
  Eigen::Map<const Mat> mb(bp.data().data(), k, n);
  Mat mc = ma * mb;

  std::vector<int> odims;
  for (int l : a_free) odims.push_back(a.dims()[static_cast<std::size_t>(l)]);
  for (int l : b_free) odims.push_back(b.dims()[static_cast<std::size_t>(l)]);
  if (odims.empty()) odims.push_back(1);  // scalar carried as a 1-dim tensor
  DenseTensor<S> out(odims);
  Eigen::Map<Mat>(out.data().data(), m, n) = mc;
  return out;
}

/// Direct nested-loop contraction; the self-consistency oracle for
/// dense_contract on tiny tensors.
template <class S>
DenseTensor<S> dense_contract_naive(const DenseTensor<S>& a, const DenseTensor<S>& b,
                                    const std::vector<std::pair<int, int>>& pairs) {
  std::vector<int> a_con, b_con;
  for (const auto& [x, y] : pairs) {
    a_con.push_back(x);
    b_con.push_back(y);
  }
  std::vector<int> a_free, b_free;
  for (int l = 0; l < a.rank(); ++l)
    if (std::find(a_con.begin(), a_con.end(), l) == a_con.end()) a_free.push_back(l);
  for (int l = 0; l < b.rank(); ++l)
    if (std::find(b_con.begin(), b_con.end(), l) == b_con.end()) b_free.push_back(l);

  std::vector<int> odims, cdims;
  for (int l : a_free) odims.push_back(a.dims()[static_cast<std::size_t>(l)]);
  for (int l : b_free) odims.push_back(b.dims()[static_cast<std::size_t>(l)]);
  for (int l : a_con) cdims.push_back(a.dims()[static_cast<std::size_t>(l)]);
  if (odims.empty()) odims.push_back(1);
  DenseTensor<S> out(odims);

  std::vector<int> oidx(static_cast<std::size_t>(a_free.size() + b_free.size()), 0);
  std::vector<int> aidx(static_cast<std::size_t>(a.rank()), 0);
  std::vector<int> bidx(static_cast<std::size_t>(b.rank()), 0);
  const long on = out.size();
  for (long f = 0; f < on; ++f) {
    for (std::size_t l = 0; l < a_free.size(); ++l)
      aidx[static_cast<std::size_t>(a_free[l])] = oidx[l];
    for (std::size_t l = 0; l < b_free.size(); ++l)
      bidx[static_cast<std::size_t>(b_free[l])] = oidx[a_free.size() + l];
    S acc(0);
    std::vector<int> cidx(cdims.size(), 0);
    long cn = 1;
    for (int d : cdims) cn *= d;
    for (long cf = 0; cf < cn; ++cf) {
      for (std::size_t l = 0; l < a_con.size(); ++l) {
        aidx[static_cast<std::size_t>(a_con[l])] = cidx[l];
        bidx[static_cast<std::size_t>(b_con[l])] = cidx[l];
      }
      acc += a.at(aidx) * b.at(bidx);
      dense_detail::advance(cidx, cdims);
    }
    out[f] = acc;
    if (!oidx.empty()) dense_detail::advance(oidx, odims);
  }
  return out;
}

/// out[..., new, ...] = sum_old M(old, new) * t[..., old, ...]; contracts the
/// leg against the ROW index of M (duality attachments use this orientation).
template <class S, class Mat>
DenseTensor<S> dense_apply_rows(const DenseTensor<S>& t, const Mat& m, int leg) {
  if (t.dims()[static_cast<std::size_t>(leg)] != m.rows())
    throw std::invalid_argument("dense_apply_rows: leg size != rows");
  std::vector<int> odims = t.dims();
  odims[static_cast<std::size_t>(leg)] = static_cast<int>(m.cols());
  DenseTensor<S> out(odims);
  long outer = 1, inner = 1;
  for (int l = 0; l < leg; ++l) outer *= t.dims()[static_cast<std::size_t>(l)];
  for (int l = leg + 1; l < t.rank(); ++l) inner *= t.dims()[static_cast<std::size_t>(l)];
  const long dr = m.rows(), dc = m.cols();
  for (long o = 0; o < outer; ++o)
    for (long r = 0; r < dr; ++r)
      for (long c = 0; c < dc; ++c) {
        const S w = S(m(r, c));
        if (w == S(0)) continue;
        const long src = (o * dr + r) * inner;
        const long dst = (o * dc + c) * inner;
        for (long i = 0; i < inner; ++i) out[dst + i] += w * t[src + i];
      }
  return out;
}

/// out[..., i', ...] = sum_i M(i', i) * t[..., i, ...]; operator action on a leg.
template <class S, class Mat>
DenseTensor<S> dense_apply_op(const DenseTensor<S>& t, const Mat& m, int leg) {
  return dense_apply_rows(t, m.transpose().eval(), leg);
}

template <class S>
DenseTensor<S> operator+(const DenseTensor<S>& a, const DenseTensor<S>& b) {
  if (a.dims() != b.dims()) throw std::invalid_argument("DenseTensor +: shape mismatch");
  DenseTensor<S> out = a;
  for (long i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

template <class S>
DenseTensor<S> operator-(const DenseTensor<S>& a, const DenseTensor<S>& b) {
  if (a.dims() != b.dims()) throw std::invalid_argument("DenseTensor -: shape mismatch");
  DenseTensor<S> out = a;
  for (long i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

template <class S>
DenseTensor<S> operator*(S s, const DenseTensor<S>& a) {
  DenseTensor<S> out = a;
  for (long i = 0; i < out.size(); ++i) out[i] *= s;
  return out;
}

}  // namespace symtensor
