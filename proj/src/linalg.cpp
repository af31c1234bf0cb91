// Copyright 2026 the opsystk authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "opsystk/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace opsystk::linalg {

// ---------------------------------------------------------------------------
// RMat
// ---------------------------------------------------------------------------

RMat RMat::identity(int n) {
  RMat m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

RMat RMat::transpose() const {
  RMat t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
  return t;
}

RMat RMat::operator*(const RMat& rhs) const {
  RMat out(rows_, rhs.cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int k = 0; k < cols_; ++k) {
      const double v = at(i, k);
      if (v == 0.0) continue;
      for (int j = 0; j < rhs.cols_; ++j) out.at(i, j) += v * rhs.at(k, j);
    }
  }
  return out;
}

RMat RMat::operator+(const RMat& rhs) const {
  RMat out = *this;
  out += rhs;
  return out;
}

RMat RMat::operator-(const RMat& rhs) const {
  RMat out = *this;
  out -= rhs;
  return out;
}

RMat RMat::operator*(double s) const {
  RMat out = *this;
  for (double& v : out.a_) v *= s;
  return out;
}

RMat& RMat::operator+=(const RMat& rhs) {
  for (size_t i = 0; i < a_.size(); ++i) a_[i] += rhs.a_[i];
  return *this;
}

RMat& RMat::operator-=(const RMat& rhs) {
  for (size_t i = 0; i < a_.size(); ++i) a_[i] -= rhs.a_[i];
  return *this;
}

double RMat::frob_norm() const {
  double s = 0.0;
  for (double v : a_) s += v * v;
  return std::sqrt(s);
}

double RMat::trace() const {
  double s = 0.0;
  for (int i = 0; i < rows_; ++i) s += at(i, i);
  return s;
}

void RMat::symmetrize() {
  for (int i = 0; i < rows_; ++i)
    for (int j = i + 1; j < cols_; ++j) {
      const double v = 0.5 * (at(i, j) + at(j, i));
      at(i, j) = v;
      at(j, i) = v;
    }
}

double inner(const RMat& a, const RMat& b) {
  double s = 0.0;
  const auto& x = a.data();
  const auto& y = b.data();
  for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

// ---------------------------------------------------------------------------
// CMat
// ---------------------------------------------------------------------------

CMat CMat::identity(int n) {
  CMat m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

CMat CMat::adjoint() const {
  CMat t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t.at(j, i) = std::conj(at(i, j));
  return t;
}

CMat CMat::transpose() const {
  CMat t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
  return t;
}

CMat CMat::conj() const {
  CMat t(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t.at(i, j) = std::conj(at(i, j));
  return t;
}

CMat CMat::operator*(const CMat& rhs) const {
  CMat out(rows_, rhs.cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int k = 0; k < cols_; ++k) {
      const cplx v = at(i, k);
      if (v == cplx(0.0, 0.0)) continue;
      for (int j = 0; j < rhs.cols_; ++j) out.at(i, j) += v * rhs.at(k, j);
    }
  }
  return out;
}

CMat CMat::operator+(const CMat& rhs) const {
  CMat out = *this;
  out += rhs;
  return out;
}

CMat CMat::operator-(const CMat& rhs) const {
  CMat out = *this;
  out -= rhs;
  return out;
}

CMat CMat::operator*(cplx s) const {
  CMat out = *this;
  for (cplx& v : out.a_) v *= s;
  return out;
}

CMat CMat::operator*(double s) const { return (*this) * cplx(s, 0.0); }

CMat& CMat::operator+=(const CMat& rhs) {
  for (size_t i = 0; i < a_.size(); ++i) a_[i] += rhs.a_[i];
  return *this;
}

CMat& CMat::operator-=(const CMat& rhs) {
  for (size_t i = 0; i < a_.size(); ++i) a_[i] -= rhs.a_[i];
  return *this;
}

cplx CMat::trace() const {
  cplx s = 0.0;
  for (int i = 0; i < rows_ && i < cols_; ++i) s += at(i, i);
  return s;
}

double CMat::frob_norm() const {
  double s = 0.0;
  for (const cplx& v : a_) s += std::norm(v);
  return std::sqrt(s);
}

double CMat::max_abs() const {
  double s = 0.0;
  for (const cplx& v : a_) s = std::max(s, std::abs(v));
  return s;
}

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      const cplx v = a.at(i, j);
      if (v == cplx(0.0, 0.0)) continue;
      for (int k = 0; k < b.rows(); ++k)
        for (int l = 0; l < b.cols(); ++l)
          out.at(i * b.rows() + k, j * b.cols() + l) = v * b.at(k, l);
    }
  return out;
}

// ---------------------------------------------------------------------------
// HermMat
// ---------------------------------------------------------------------------

HermMat HermMat::hermitian_part(const CMat& a) {
  HermMat h(a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    h.m_.at(i, i) = cplx(a.at(i, i).real(), 0.0);
    for (int j = i + 1; j < a.cols(); ++j) {
      const cplx v = 0.5 * (a.at(i, j) + std::conj(a.at(j, i)));
      h.m_.at(i, j) = v;
      h.m_.at(j, i) = std::conj(v);
    }
  }
  return h;
}

HermMat HermMat::from_cmat(const CMat& a, double tol) {
  const double dev = (a - a.adjoint()).frob_norm();
  if (dev > tol * (1.0 + a.frob_norm()))
    throw Error("MALFORMED_INPUT", "matrix is not Hermitian (deviation " +
                                       std::to_string(dev) + ")");
  return hermitian_part(a);
}

HermMat HermMat::identity(int n) {
  HermMat h(n);
  for (int i = 0; i < n; ++i) h.m_.at(i, i) = 1.0;
  return h;
}

HermMat HermMat::diag(const std::vector<double>& d) {
  HermMat h(static_cast<int>(d.size()));
  for (size_t i = 0; i < d.size(); ++i) h.m_.at(i, i) = d[i];
  return h;
}

void HermMat::set(int i, int j, cplx v) {
  if (i == j) {
    m_.at(i, i) = cplx(v.real(), 0.0);
  } else {
    m_.at(i, j) = v;
    m_.at(j, i) = std::conj(v);
  }
}

HermMat HermMat::operator+(const HermMat& rhs) const {
  HermMat out = *this;
  out.m_ += rhs.m_;
  return out;
}

HermMat HermMat::operator-(const HermMat& rhs) const {
  HermMat out = *this;
  out.m_ -= rhs.m_;
  return out;
}

HermMat HermMat::operator*(double s) const {
  HermMat out = *this;
  out.m_ = out.m_ * s;
  return out;
}

HermMat& HermMat::operator+=(const HermMat& rhs) {
  m_ += rhs.m_;
  return *this;
}

double HermMat::trace() const { return m_.trace().real(); }

double HermMat::frob_norm() const { return m_.frob_norm(); }

bool HermMat::is_diagonal(double tol) const {
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j)
      if (i != j && std::abs(at(i, j)) > tol) return false;
  return true;
}

double inner(const HermMat& a, const HermMat& b) {
  // tr(ab) is real for Hermitian a, b.
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j)
      s += (std::conj(a.at(i, j)) * b.at(i, j)).real();
  return s;
}

HermMat kron(const HermMat& a, const HermMat& b) {
  return HermMat::hermitian_part(kron(a.mat(), b.mat()));
}

// ---------------------------------------------------------------------------
// Cyclic Jacobi
// ---------------------------------------------------------------------------

namespace {

double off_diag_norm(const RMat& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (i != j) s += a.at(i, j) * a.at(i, j);
  return std::sqrt(s);
}

}  // namespace

EigSym eig_sym(const RMat& a0, double tol) {
  const int n = a0.rows();
  RMat a = a0;
  a.symmetrize();
  RMat v = RMat::identity(n);
  const double scale = a.frob_norm();
  const double target = tol * (1.0 + scale);
  constexpr int kMaxSweeps = 100;

  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    if (off_diag_norm(a) <= target) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a.at(k, p), akq = a.at(k, q);
          a.at(k, p) = c * akp - s * akq;
          a.at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a.at(p, k), aqk = a.at(q, k);
          a.at(p, k) = c * apk - s * aqk;
          a.at(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v.at(k, p), vkq = v.at(k, q);
          v.at(k, p) = c * vkp - s * vkq;
          v.at(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (sweep == kMaxSweeps && off_diag_norm(a) > target)
    throw Error("CONVERGENCE_FAILURE",
                "Jacobi sweep cap hit, off-diagonal residual " +
                    std::to_string(off_diag_norm(a)));

  EigSym out;
  out.values.resize(n);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> d(n);
  for (int i = 0; i < n; ++i) d[i] = a.at(i, i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return d[x] < d[y]; });
  out.vectors = RMat(n, n);
  for (int j = 0; j < n; ++j) {
    out.values[j] = d[order[j]];
    for (int i = 0; i < n; ++i) out.vectors.at(i, j) = v.at(i, order[j]);
  }
  return out;
}

RMat realify(const HermMat& h) {
  const int n = h.dim();
  RMat m(2 * n, 2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const cplx v = h.at(i, j);
      m.at(i, j) = v.real();
      m.at(i, j + n) = -v.imag();
      m.at(i + n, j) = v.imag();
      m.at(i + n, j + n) = v.real();
    }
  return m;
}

HermMat derealify(const RMat& m) {
  const int n = m.rows() / 2;
  CMat c(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double re = 0.5 * (m.at(i, j) + m.at(i + n, j + n));
      const double im = 0.5 * (m.at(i + n, j) - m.at(i, j + n));
      c.at(i, j) = cplx(re, im);
    }
  return HermMat::hermitian_part(c);
}

EigHerm eig_herm(const HermMat& h, double tol) {
  const int n = h.dim();
  EigHerm out;
  if (n == 0) {
    out.vectors = CMat(0, 0);
    return out;
  }
  const EigSym rs = eig_sym(realify(h), tol);

  // Eigenvalues come doubled; collapse adjacent pairs.
  out.values.resize(n);
  for (int k = 0; k < n; ++k)
    out.values[k] = 0.5 * (rs.values[2 * k] + rs.values[2 * k + 1]);

  // Build complex eigenvectors: (x; y) -> x + iy, re-orthonormalized within
  // clusters of equal eigenvalues.
  out.vectors = CMat(n, n);
  const double cluster_tol = 1e-9 * (1.0 + h.frob_norm());
  int col = 0;
  int k = 0;
  while (k < n) {
    int k2 = k;
    while (k2 + 1 < n &&
           std::abs(out.values[k2 + 1] - out.values[k]) <= cluster_tol)
      ++k2;
    // Candidate complex vectors from the 2*(k2-k+1) real ones.
    std::vector<std::vector<cplx>> basis;
    for (int r = 2 * k; r <= 2 * k2 + 1; ++r) {
      std::vector<cplx> u(n);
      for (int i = 0; i < n; ++i)
        u[i] = cplx(rs.vectors.at(i, r), rs.vectors.at(i + n, r));
      // Gram-Schmidt against accepted vectors of this cluster.
      for (const auto& w : basis) {
        cplx dot = 0.0;
        for (int i = 0; i < n; ++i) dot += std::conj(w[i]) * u[i];
        for (int i = 0; i < n; ++i) u[i] -= dot * w[i];
      }
      double nrm = 0.0;
      for (int i = 0; i < n; ++i) nrm += std::norm(u[i]);
      nrm = std::sqrt(nrm);
      if (nrm > 1e-6) {
        for (int i = 0; i < n; ++i) u[i] /= nrm;
        basis.push_back(std::move(u));
        if (static_cast<int>(basis.size()) == k2 - k + 1) break;
      }
    }
    for (const auto& u : basis) {
      for (int i = 0; i < n; ++i) out.vectors.at(i, col) = u[i];
      ++col;
    }
    k = k2 + 1;
  }
  if (col != n)
    throw Error("CONVERGENCE_FAILURE",
                "eigenvector extraction produced a rank-deficient basis");
  return out;
}

double lambda_min(const RMat& sym) {
  return eig_sym(sym).values.front();
}

double lambda_min(const HermMat& h) {
  if (h.dim() == 0) return 0.0;
  if (h.is_diagonal()) {
    double m = h.at(0, 0).real();
    for (int i = 1; i < h.dim(); ++i) m = std::min(m, h.at(i, i).real());
    return m;
  }
  return eig_sym(realify(h)).values.front();
}

bool is_psd(const HermMat& h, double tol) { return lambda_min(h) >= -tol; }

std::vector<HermMat> orthonormalize(const std::vector<HermMat>& span,
                                    double rank_tol) {
  if (span.empty()) throw Error("EMPTY_SPAN", "orthonormalize of empty span");
  double scale = 0.0;
  for (const auto& s : span) scale = std::max(scale, s.frob_norm());
  if (scale == 0.0) return {};
  std::vector<HermMat> out;
  for (const auto& s : span) {
    HermMat u = s;
    for (int pass = 0; pass < 2; ++pass)  // re-orthogonalize once
      for (const auto& w : out) u += w * (-inner(w, u));
    const double nrm = u.frob_norm();
    if (nrm > rank_tol * scale * 10.0 && nrm > 1e-14)
      out.push_back(u * (1.0 / nrm));
  }
  return out;
}

Projection project_onto_span(const HermMat& h,
                             const std::vector<HermMat>& span) {
  const auto on = span.empty() ? std::vector<HermMat>{} : orthonormalize(span);
  HermMat proj(h.dim());
  for (const auto& w : on) proj += w * inner(w, h);
  Projection out;
  out.projection = proj;
  out.residual_norm = (h - proj).frob_norm();
  return out;
}

std::vector<HermMat> herm_basis(int d) {
  std::vector<HermMat> basis;
  const double r = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < d; ++i) {
    HermMat e(d);
    e.set(i, i, 1.0);
    basis.push_back(e);
  }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      HermMat re(d), im(d);
      re.set(i, j, cplx(r, 0.0));
      im.set(i, j, cplx(0.0, r));
      basis.push_back(re);
      basis.push_back(im);
    }
  return basis;
}

std::vector<double> solve_linear(RMat a, std::vector<double> b) {
  const int n = a.rows();
  std::vector<int> piv(n);
  std::iota(piv.begin(), piv.end(), 0);
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a.at(i, k)) > std::abs(a.at(p, k))) p = i;
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(a.at(k, j), a.at(p, j));
      std::swap(b[k], b[p]);
    }
    const double d = a.at(k, k);
    if (std::abs(d) < 1e-300)
      throw Error("SINGULAR_SYSTEM", "singular linear system");
    for (int i = k + 1; i < n; ++i) {
      const double f = a.at(i, k) / d;
      if (f == 0.0) continue;
      a.at(i, k) = 0.0;
      for (int j = k + 1; j < n; ++j) a.at(i, j) -= f * a.at(k, j);
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= a.at(i, j) * x[j];
    x[i] = s / a.at(i, i);
  }
  return x;
}

std::vector<double> coefficients_in_span(const HermMat& h,
                                         const std::vector<HermMat>& span,
                                         double* residual) {
  const int k = static_cast<int>(span.size());
  RMat gram(k, k);
  std::vector<double> rhs(k);
  for (int i = 0; i < k; ++i) {
    rhs[i] = inner(span[i], h);
    for (int j = 0; j < k; ++j) gram.at(i, j) = inner(span[i], span[j]);
  }
  // Tikhonov floor keeps near-dependent spans solvable.
  for (int i = 0; i < k; ++i) gram.at(i, i) += 1e-14;
  auto c = solve_linear(gram, rhs);
  if (residual) {
    HermMat rec(h.dim());
    for (int i = 0; i < k; ++i) rec += span[i] * c[i];
    *residual = (h - rec).frob_norm();
  }
  return c;
}

}  // namespace opsystk::linalg
