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

#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace opsystk {

using cplx = std::complex<double>;

// Error with a stable machine-readable code ("CONVERGENCE_FAILURE",
// "EMPTY_SPAN", "NOT_NULL", "CAP_EXCEEDED", "MALFORMED_INPUT", ...).
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

namespace linalg {

constexpr double kPsdTol = 1e-8;    // default tolerance for PSD checks
constexpr double kRankTol = 1e-10;  // relative rank tolerance

// ---------------------------------------------------------------------------
// Dense real matrix, row-major.
// ---------------------------------------------------------------------------
class RMat {
 public:
  RMat() : rows_(0), cols_(0) {}
  RMat(int rows, int cols) : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}

  static RMat identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& at(int i, int j) { return a_[i * cols_ + j]; }
  double at(int i, int j) const { return a_[i * cols_ + j]; }
  const std::vector<double>& data() const { return a_; }
  std::vector<double>& data() { return a_; }

  RMat transpose() const;
  RMat operator*(const RMat& rhs) const;
  RMat operator+(const RMat& rhs) const;
  RMat operator-(const RMat& rhs) const;
  RMat operator*(double s) const;
  RMat& operator+=(const RMat& rhs);
  RMat& operator-=(const RMat& rhs);

  double frob_norm() const;
  double trace() const;
  void symmetrize();

 private:
  int rows_, cols_;
  std::vector<double> a_;
};

double inner(const RMat& a, const RMat& b);  // tr(a^T b)

// ---------------------------------------------------------------------------
// Dense complex matrix, row-major.
// ---------------------------------------------------------------------------
class CMat {
 public:
  CMat() : rows_(0), cols_(0) {}
  CMat(int rows, int cols) : rows_(rows), cols_(cols), a_(rows * cols) {}

  static CMat identity(int n);
  static CMat zero(int rows, int cols) { return CMat(rows, cols); }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  cplx& at(int i, int j) { return a_[i * cols_ + j]; }
  const cplx& at(int i, int j) const { return a_[i * cols_ + j]; }

  CMat adjoint() const;
  CMat transpose() const;
  CMat conj() const;
  CMat operator*(const CMat& rhs) const;
  CMat operator+(const CMat& rhs) const;
  CMat operator-(const CMat& rhs) const;
  CMat operator*(cplx s) const;
  CMat operator*(double s) const;
  CMat& operator+=(const CMat& rhs);
  CMat& operator-=(const CMat& rhs);

  cplx trace() const;
  double frob_norm() const;
  double max_abs() const;

 private:
  int rows_, cols_;
  std::vector<cplx> a_;
};

CMat kron(const CMat& a, const CMat& b);

// ---------------------------------------------------------------------------
// Hermitian matrix. Construction symmetrizes, so the invariant
// entries[i][j] == conj(entries[j][i]) holds exactly.
// ---------------------------------------------------------------------------
class HermMat {
 public:
  HermMat() = default;
  explicit HermMat(int dim) : m_(dim, dim) {}
  // Hermitian part (A + A*)/2 of an arbitrary square matrix.
  static HermMat hermitian_part(const CMat& a);
  // Requires a to be Hermitian up to `tol`; symmetrizes the representation.
  static HermMat from_cmat(const CMat& a, double tol = 1e-9);
  static HermMat identity(int n);
  static HermMat diag(const std::vector<double>& d);

  int dim() const { return m_.rows(); }
  const CMat& mat() const { return m_; }
  const cplx& at(int i, int j) const { return m_.at(i, j); }
  // Sets entries (i,j) and (j,i) together.
  void set(int i, int j, cplx v);

  HermMat operator+(const HermMat& rhs) const;
  HermMat operator-(const HermMat& rhs) const;
  HermMat operator*(double s) const;
  HermMat& operator+=(const HermMat& rhs);

  double trace() const;
  double frob_norm() const;
  bool is_diagonal(double tol = 1e-12) const;

 private:
  CMat m_;
};

// Real Hilbert-Schmidt inner product Re tr(A* B) = tr(AB) for Hermitian A, B.
double inner(const HermMat& a, const HermMat& b);

HermMat kron(const HermMat& a, const HermMat& b);

// ---------------------------------------------------------------------------
// Eigendecompositions. Cyclic Jacobi with a deterministic sweep order and a
// 100-sweep cap; throws Error("CONVERGENCE_FAILURE") with the residual if the
// cap is hit.
// ---------------------------------------------------------------------------
struct EigSym {
  std::vector<double> values;  // ascending
  RMat vectors;                // columns are eigenvectors
};
EigSym eig_sym(const RMat& a, double tol = 1e-13);

struct EigHerm {
  std::vector<double> values;  // ascending
  CMat vectors;                // unitary, columns are eigenvectors
};
// Diagonalizes via cyclic Jacobi on the realified matrix; reconstruction
// error ||U diag(v) U* - H||_F <= tol*(1+||H||_F).
EigHerm eig_herm(const HermMat& h, double tol = 1e-12);

double lambda_min(const HermMat& h);
double lambda_min(const RMat& sym);
bool is_psd(const HermMat& h, double tol = kPsdTol);

// [[A, -B], [B, A]] for H = A + iB; PSD of the output iff PSD of H, each
// eigenvalue doubled.
RMat realify(const HermMat& h);
// Inverse of realify up to averaging the two real copies (exact on the image).
HermMat derealify(const RMat& m);

// Gram-Schmidt under the trace inner product; near-dependent inputs dropped at
// `rank_tol` (relative). Throws Error("EMPTY_SPAN") on empty input.
std::vector<HermMat> orthonormalize(const std::vector<HermMat>& span,
                                    double rank_tol = kRankTol);

struct Projection {
  HermMat projection;
  double residual_norm;
};
Projection project_onto_span(const HermMat& h, const std::vector<HermMat>& span);

// Orthonormal Hermitian basis of M_d (real dimension d^2): diagonal units,
// then (e_ij+e_ji)/sqrt(2) and i(e_ij-e_ji)/sqrt(2) in row order.
std::vector<HermMat> herm_basis(int d);

// Solves a x = b by LU with partial pivoting; a is square.
std::vector<double> solve_linear(RMat a, std::vector<double> b);

// Least-norm coefficients c with sum_k c_k span_k ~= h (via Gram solve);
// returns residual in *residual.
std::vector<double> coefficients_in_span(const HermMat& h,
                                         const std::vector<HermMat>& span,
                                         double* residual = nullptr);

}  // namespace linalg
}  // namespace opsystk
