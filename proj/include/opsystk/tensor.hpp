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

// Membership oracles for the minimal and maximal tensor cones, complete
// positivity, ucp extension and positive lifting. Every verdict carries a
// grounded flag: grounded answers are exact per the routing table, ungrounded
// ones come from truncated sandwich bounds and may stay UNDECIDED.
//
// Routing:
//   cp_check     (a) Choi SDP when the target is a matrix system (quotient
//                    sources handled exactly via J-annihilation),
//                (b) positivity coordinate LP when the target is abelian,
//                (c) level-truncated checks + counterexample search when the
//                    target is a quotient (MEMBER never grounded there).
//   min_member   (a) concrete PSD test for matrix (x) matrix,
//                (b) cp_check of the associated map when one side is a
//                    quotient (via its matrix-system dual),
//                (c) sampled ucp compressions for quotient (x) quotient.
//   max_member   (a) dual-cone SDP (cp maps into the dual) whenever one side
//                    is a quotient -- grounded,
//                (b) matrix (x) matrix: sandwich between the product-cone
//                    inner description and the min-cone outer bound.

#pragma once

#include <cstdint>
#include <vector>

#include "opsystk/opsys.hpp"

namespace opsystk::tensor {

using linalg::HermMat;
using linalg::RMat;
using opsys::LevelElement;
using opsys::MatrixSystem;
using opsys::Membership;
using opsys::QuotientSystem;
using opsys::System;
using opsys::Verdict;

constexpr double kDefaultTol = 1e-7;

// Self-adjoint element of M_m(S (x) T): Hermitian coefficient per pair of
// basis elements, x = sum_{k,l} coeff[k][l] (x) basisL_k (x) basisR_l.
struct TensorElement {
  System left;
  System right;
  int level = 1;
  std::vector<std::vector<HermMat>> coeff;
};

TensorElement flip(const TensorElement& x);

// Unit (x) unit.
TensorElement unit_element(const System& left, const System& right);

// Concrete ambient representative in M_{level * nL * nR}; for quotients the
// coset representatives are used.
HermMat tensor_representative(const TensorElement& x);

// Element of S (x) (M_n/J) from a concrete representative U in
// span(S) (x) M_n (the pushforward along id (x) q).
TensorElement pushforward(const MatrixSystem& s, const QuotientSystem& q,
                          const HermMat& u, int level = 1);
// Same for a matrix-system right factor.
TensorElement embed_concrete(const MatrixSystem& s, const MatrixSystem& t,
                             const HermMat& u, int level = 1);

// A linear map between systems given by its action on the source basis:
// images(i, k) is the i-th target coordinate of the image of source basis k.
struct CpMapCandidate {
  System source;
  System target;
  RMat images;
};

struct OracleConfig {
  double tol = kDefaultTol;
  int level_cap = 2;        // truncation level for ungrounded cp checks
  int samples = 24;         // sampling budget for sandwich modes
  int generator_cap = 0;    // 0: dim(S)*dim(T) default
  std::uint64_t seed = 1;
  bool force_choi = false;  // bypass the abelian fast path (cross-checking)
};

Verdict cp_check(const CpMapCandidate& phi, const OracleConfig& cfg = {});

Verdict min_member(const TensorElement& x, const OracleConfig& cfg = {});

Verdict max_member(const TensorElement& x, const OracleConfig& cfg = {});

// Does the ucp map phi: S1 -> R extend to a ucp map S2 -> R? S1's basis must
// lie in the span of S2. MEMBER attaches the extension's images on S2.
Verdict ucp_extension_exists(const MatrixSystem& s1, const MatrixSystem& s2,
                             const RMat& phi_images, const MatrixSystem& r,
                             const OracleConfig& cfg = {});

// Does x + eps(1 (x) 1) lift to a positive element of S (x) M_n along
// id (x) q? x is a level-1 element of S (x) (M_n/J), assumed min-positive.
Verdict positive_lift_exists(const MatrixSystem& s, const QuotientSystem& q,
                             const TensorElement& x, double eps,
                             const OracleConfig& cfg = {});

// Random elements of D_1^max: compressions X*(P (x) Q)X with P, Q positive
// at levels p, q <= cap. Max-members by construction; byte-reproducible.
std::vector<TensorElement> sample_max_generators(const System& left,
                                                 const System& right, int count,
                                                 std::uint64_t seed,
                                                 int pq_cap = 2);

// Random ucp map from `source` into M_p (Choi-SDP sampling with a seeded
// random objective). Returns the images of the source basis as p x p blocks.
std::vector<HermMat> sample_ucp(const System& source, int p, Rng& rng);

// Random ucp map into a matrix system (range constrained to span(R));
// returns target coordinates (dim(R) x dim(source)), empty on failure.
RMat sample_ucp_into(const System& source, const MatrixSystem& r, Rng& rng);

// Applies the map encoded by a Choi matrix on M_k (x) M_n to v in M_k.
HermMat apply_choi(const HermMat& choi, const HermMat& v, int k, int nn);

// The pin constraints <K, C> = rhs of the ucp-extension SDP, exposed so a
// Farkas dual can be re-verified algebraically (Z in span{K}, Z >= 0,
// <Z, C0> < 0 for an affine point C0).
std::vector<std::pair<HermMat, double>> extension_pins(
    const MatrixSystem& s1, const MatrixSystem& s2, const RMat& phi_images,
    const MatrixSystem& r);

// Applies (phi (x) psi) to x, where phi/psi are given by their images (ambient
// p x p / q x q blocks per basis element). Result is concrete in
// M_{level*p*q}.
HermMat apply_ucp_pair(const TensorElement& x, const std::vector<HermMat>& phi,
                       const std::vector<HermMat>& psi);

// Re-verifies a NON_MEMBER separating functional against `count` sampled
// generators of the cone (min or max per `max_cone`): nonnegative on all of
// them and below -tol on x.
bool recheck_separation(const TensorElement& x, const Verdict& v, bool max_cone,
                        int count, std::uint64_t seed, double tol = kDefaultTol);

// Value of the separating functional carried by `v` on element `y` of the
// same tensor pair (level 1).
double separating_value(const Verdict& v, const TensorElement& y);

}  // namespace opsystk::tensor
