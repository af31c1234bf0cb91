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

// Finite-dimensional operator systems: matrix systems inside M_n, quotients
// M_n/J by null-subspaces with Archimedeanized cones, their duals through the
// trace pairing e_ij <-> delta_ij/n, and Effros systems of dominated
// functionals.

#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "opsystk/linalg.hpp"
#include "opsystk/rng.hpp"
#include "opsystk/sdp.hpp"

namespace opsystk::opsys {

using linalg::CMat;
using linalg::HermMat;
using linalg::RMat;

enum class Membership { MEMBER, NON_MEMBER, UNDECIDED };
const char* to_string(Membership m);

// Shared verdict shape for every cone-membership oracle. `value` is a signed
// margin (>= -tol for members). NON_MEMBER verdicts carry a separating
// functional; its exact encoding is documented per oracle.
struct Verdict {
  Membership status = Membership::UNDECIDED;
  bool grounded = false;
  double value = 0.0;
  std::string route;
  std::vector<HermMat> psd_certificate;   // lift / Choi / decomposition data
  std::optional<HermMat> density;         // separating functional density
  std::vector<double> functional;         // separating functional coefficients
};

// ---------------------------------------------------------------------------
// Systems
// ---------------------------------------------------------------------------

// Unital self-adjoint subspace of M_n with the inherited PSD cones at every
// matrix level. `basis` is independent with basis[unit_index] == identity;
// `onb` spans the same subspace orthonormally.
struct MatrixSystem {
  int n = 0;
  std::vector<HermMat> basis;
  int unit_index = 0;
  bool abelian = false;
  std::vector<HermMat> onb;
  // Defining equality rows of the diagonal part, when the system was built as
  // a function system with integer data (exact LP layer hooks onto these).
  std::optional<std::vector<std::vector<long>>> weights;
  std::string name;

  int dim() const { return static_cast<int>(basis.size()); }
  const HermMat& unit() const { return basis[unit_index]; }
};

// *-closed subspace of M_n meeting the PSD cone only at 0, given by a
// Hermitian basis.
struct NullSubspace {
  int n = 0;
  std::vector<HermMat> basis;

  int dim() const { return static_cast<int>(basis.size()); }
};

// M_n/J with coset representatives in the trace-orthogonal complement of J.
// Positivity is the Archimedean closure of the pushed-forward PSD cones.
struct QuotientSystem {
  int n = 0;
  NullSubspace null;
  std::vector<HermMat> coset_basis;  // orthonormal; coset_basis[unit_index] ~ I+J
  int unit_index = 0;
  double unit_scale = 1.0;  // coset_basis[unit_index] * unit_scale represents I+J
  // Function-system quotient (J contains every off-diagonal direction):
  // diagonal null weights as integer vectors, enabling the exact LP path.
  std::optional<std::vector<std::vector<long>>> diag_null_weights;
  std::string name;

  int dim() const { return static_cast<int>(coset_basis.size()); }
  HermMat unit_representative() const {
    return coset_basis[unit_index] * unit_scale;
  }
};

using System = std::variant<MatrixSystem, QuotientSystem>;

int system_dim(const System& s);
int system_ambient(const System& s);
const std::string& system_name(const System& s);
bool system_abelian(const System& s);
// Basis element k as an ambient representative (basis element / coset rep).
const HermMat& system_basis_rep(const System& s, int k);
int system_unit_index(const System& s);
double system_unit_scale(const System& s);

// A self-adjoint element of M_m(S): Hermitian coefficient C_k in M_m per
// basis element, representing sum_k C_k (x) basis_k.
struct LevelElement {
  int level = 1;
  std::vector<HermMat> coeff;
};

// Self-adjoint functional on a system, f(basis_k) = coeffs[k].
struct Functional {
  std::vector<double> coeffs;
};

// Span of positive functionals dominated by a state f, with unit f.
struct EffrosSystem {
  Functional base;
  std::vector<Functional> span_basis;  // orthonormalized, base direction first
  // Raw dominated positives found by the search (0 <= g <= f each); the span
  // certificates re-check against these.
  std::vector<Functional> generators;
  bool certified = false;
  std::uint64_t seed = 0;

  int dim() const { return static_cast<int>(span_basis.size()); }
};

// ---------------------------------------------------------------------------
// The Farenick-Paulsen trace pairing: D in M_n corresponds to the functional
// x -> tr(D^T x)/n on M_n; positivity of the functional is PSD-ness of D.
// ---------------------------------------------------------------------------
double fp_pair(const HermMat& density, const HermMat& x);

// Pairing data for Q ~ R* between a quotient Q = M_n/J and its dual matrix
// system R (dual_of_quotient). <D+J, Y> = tr((W^{1/2} Y W^{1/2})^T D)/n where
// W is the faithful-state density; W = I whenever tr vanishes on J.
struct DualityPairing {
  int n = 0;
  HermMat w_half;  // W^{1/2}
  bool trivial = true;

  double pair(const HermMat& coset_rep, const HermMat& y) const;
};

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

MatrixSystem make_matrix_system(int n, const std::vector<CMat>& generators,
                                std::string name = "");
MatrixSystem make_full_matrix_system(int n);   // M_n
MatrixSystem make_linf(int n);                 // diagonal M_n
// Function system from integer equality rows on the diagonal.
MatrixSystem make_function_system(int n, std::vector<std::vector<long>> weights,
                                  std::string name = "");
MatrixSystem make_W(int two_n);  // Namioka-Phelps W_{2n}
MatrixSystem make_W23();         // 3(a1+a2) = 2(a3+a4+a5) in l5_inf

NullSubspace make_null_subspace(int n, const std::vector<CMat>& span);

struct NullCheck {
  bool is_null = false;
  // null: strictly positive witness orthogonal to the span;
  // not null: a PSD trace-one element of the span.
  HermMat certificate;
  double margin = 0.0;
};
NullCheck is_null_subspace(int n, const std::vector<HermMat>& span,
                           double tol = 1e-8);

QuotientSystem make_quotient(int n, NullSubspace null, std::string name = "");
// l_n^inf / span{weights}, represented as M_n/(J + offdiag).
QuotientSystem make_function_quotient(int n,
                                      std::vector<std::vector<long>> weights,
                                      std::string name = "");

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

constexpr double kDefaultTol = 1e-7;

// Concrete representative sum_k C_k (x) rep_k in M_{level*n}.
HermMat level_representative(const System& s, const LevelElement& x);

// Matrix system: exact ambient PSD test. Quotient: SDP value
// v = sup { t : rep + j >= t I, j in M_m(J) } with MEMBER iff v >= -tol;
// the dual optimum is attached as the separating functional on NON_MEMBER.
Verdict level_positive(const System& s, const LevelElement& x,
                       double tol = kDefaultTol);

// min f(r) over r in S+, tr r = 1 (empty only if S+ is trivial); MEMBER iff
// the minimum is >= -tol. Realizes positivity of a functional on S.
Verdict functional_positive(const MatrixSystem& s, const Functional& f,
                            double tol = kDefaultTol);

// R* ~ M_n/J with J the annihilator of R under the trace pairing; certified
// against R* on `certify_samples` random functionals.
QuotientSystem dual_of_matrix_system(const MatrixSystem& r,
                                     int certify_samples = 20,
                                     double tol = kDefaultTol);

struct QuotientDual {
  MatrixSystem system;      // (M_n/J)* embedded in M_n, unit = identity
  DualityPairing pairing;   // exact pairing with the quotient's cosets
};
QuotientDual dual_of_quotient(const QuotientSystem& q,
                              double tol = kDefaultTol);

// [f] = span{g : 0 <= g <= f} inside S*, unit f. Randomized span discovery
// (seeded), then certified maximal direction by direction.
EffrosSystem effros_system(const MatrixSystem& s, const Functional& f,
                           std::uint64_t seed = 0, double tol = kDefaultTol);

// Samples `samples` random elements per level and requires level_positive to
// agree through `map` (coefficients of B-basis per A-basis column) in both
// directions. The map must be unital and bijective.
bool iso_check(const System& a, const System& b, const RMat& map,
               const std::vector<int>& levels, int samples, double tol,
               Rng& rng);

// Coefficients of an ambient Hermitian matrix over the system's basis
// (must lie in the span up to `tol`).
std::vector<double> coefficients(const MatrixSystem& s, const HermMat& x,
                                 double tol = 1e-7);
std::vector<double> quotient_coefficients(const QuotientSystem& q,
                                          const HermMat& x);

// Membership of x in the system's span (no positivity).
bool in_span(const MatrixSystem& s, const HermMat& x, double tol = 1e-7);

// Random level element with Hermitian coefficients (entries ~ N(0,1)).
LevelElement random_level_element(const System& s, int level, Rng& rng);

// Orthonormal complement of an orthonormal family inside Hermitian M_n.
std::vector<HermMat> span_complement(int n, const std::vector<HermMat>& onb);

// M_m(S) as a matrix system in M_{m*n}.
MatrixSystem level_system(const MatrixSystem& s, int m);
// M_m(M_n/J) = (M_m (x) M_n) / (M_m (x) J) as a quotient of M_{m*n}.
QuotientSystem level_quotient(const QuotientSystem& q, int m);

}  // namespace opsystk::opsys
