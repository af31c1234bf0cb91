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

#include <vector>

#include "opsystk/linalg.hpp"
#include "opsystk/rng.hpp"

namespace opsystk::testutil {

inline linalg::HermMat random_herm(Rng& rng, int n, double scale = 1.0) {
  linalg::CMat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      a.at(i, j) = cplx(rng.normal(), rng.normal()) * scale;
  return linalg::HermMat::hermitian_part(a);
}

inline linalg::HermMat random_psd(Rng& rng, int n, double scale = 1.0) {
  linalg::CMat g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      g.at(i, j) = cplx(rng.normal(), rng.normal()) * scale;
  return linalg::HermMat::hermitian_part(g * g.adjoint());
}

// Matrix unit e_ij as a CMat.
inline linalg::CMat unit(int n, int i, int j) {
  linalg::CMat m(n, n);
  m.at(i, j) = 1.0;
  return m;
}

}  // namespace opsystk::testutil
