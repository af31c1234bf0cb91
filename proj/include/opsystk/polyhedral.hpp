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

// Exact rational layer: double description for polyhedral cones in standard
// form and an exact Phase-I simplex for conic membership with Farkas
// certificates. This is the ground-truth oracle for the abelian systems, so it
// must not inherit floating error.

#pragma once

#include <gmpxx.h>

#include <vector>

#include "opsystk/linalg.hpp"

namespace opsystk::poly {

using Rat = mpq_class;
using RatVec = std::vector<Rat>;
using RatMat = std::vector<RatVec>;

constexpr int kExactDimCap = 12;

// Extreme rays of {a in R^n : L a = 0, a >= 0}, canonicalized to primitive
// integer vectors and sorted lexicographically. Throws
// Error("CAP_EXCEEDED") when n exceeds the exact-arithmetic cap.
std::vector<RatVec> extreme_rays(const RatMat& equalities, int n,
                                 int dim_cap = kExactDimCap);

struct ConicResult {
  bool member = false;
  RatVec lambda;  // member: x = sum lambda_k gens_k, lambda >= 0
  RatVec farkas;  // non-member: y with y.g <= 0 for every generator, y.x > 0
};

// Exact membership of x in cone(gens), all in R^n.
ConicResult conic_membership(const std::vector<RatVec>& gens, const RatVec& x);

// Basis of {a : L a = 0} as primitive integer vectors (exact kernel).
std::vector<RatVec> kernel_basis(const RatMat& equalities, int n);

RatVec tensor(const RatVec& a, const RatVec& b);
std::vector<double> to_double(const RatVec& v);
RatVec from_integers(const std::vector<long>& v);

}  // namespace opsystk::poly
