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

#include "opsystk/polyhedral.hpp"

#include <algorithm>
#include <numeric>

namespace opsystk::poly {

namespace {

// Scale to a primitive integer vector (clears denominators, divides by the
// common gcd).
RatVec canonicalize_ray(const RatVec& v) {
  mpz_class lcm_den(1);
  for (const auto& x : v)
    if (x != 0) mpz_lcm(lcm_den.get_mpz_t(), lcm_den.get_mpz_t(),
                        x.get_den().get_mpz_t());
  std::vector<mpz_class> ints;
  ints.reserve(v.size());
  mpz_class g(0);
  for (const auto& x : v) {
    mpz_class z = x.get_num() * (lcm_den / x.get_den());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), z.get_mpz_t());
    ints.push_back(z);
  }
  RatVec out(v.size());
  for (size_t i = 0; i < v.size(); ++i)
    out[i] = (g == 0) ? Rat(0) : Rat(ints[i] / g);
  return out;
}

bool lex_less(const RatVec& a, const RatVec& b) {
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

std::vector<int> zero_set(const RatVec& r) {
  std::vector<int> z;
  for (size_t i = 0; i < r.size(); ++i)
    if (r[i] == 0) z.push_back(static_cast<int>(i));
  return z;
}

bool subset_of(const std::vector<int>& a, const std::vector<int>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

std::vector<RatVec> extreme_rays(const RatMat& equalities, int n, int dim_cap) {
  if (n > dim_cap)
    throw Error("CAP_EXCEEDED", "exact layer limited to dimension " +
                                    std::to_string(dim_cap));
  // Start from the nonnegative orthant and slice one hyperplane at a time.
  std::vector<RatVec> rays;
  for (int i = 0; i < n; ++i) {
    RatVec e(n, Rat(0));
    e[i] = 1;
    rays.push_back(e);
  }
  for (const auto& row : equalities) {
    std::vector<RatVec> zero, pos, neg;
    for (auto& r : rays) {
      Rat d(0);
      for (int i = 0; i < n; ++i) d += row[i] * r[i];
      if (d == 0)
        zero.push_back(r);
      else if (d > 0)
        pos.push_back(r);
      else
        neg.push_back(r);
    }
    std::vector<RatVec> next = zero;
    // Combinatorial adjacency: p and q are adjacent iff no other current ray's
    // zero set contains theirs (the cone is pointed, so this is exact).
    std::vector<std::vector<int>> zsets;
    for (const auto& r : rays) zsets.push_back(zero_set(r));
    for (const auto& p : pos) {
      Rat dp(0);
      for (int i = 0; i < n; ++i) dp += row[i] * p[i];
      const auto zp = zero_set(p);
      for (const auto& q : neg) {
        Rat dq(0);
        for (int i = 0; i < n; ++i) dq += row[i] * q[i];
        std::vector<int> common;
        const auto zq = zero_set(q);
        std::set_intersection(zp.begin(), zp.end(), zq.begin(), zq.end(),
                              std::back_inserter(common));
        bool adjacent = true;
        for (size_t k = 0; k < rays.size() && adjacent; ++k) {
          if (rays[k] == p || rays[k] == q) continue;
          if (subset_of(common, zsets[k])) adjacent = false;
        }
        if (!adjacent) continue;
        RatVec combo(n);
        for (int i = 0; i < n; ++i) combo[i] = dp * q[i] - dq * p[i];
        next.push_back(canonicalize_ray(combo));
      }
    }
    rays = std::move(next);
  }
  for (auto& r : rays) r = canonicalize_ray(r);
  std::sort(rays.begin(), rays.end(), lex_less);
  rays.erase(std::unique(rays.begin(), rays.end()), rays.end());
  return rays;
}

ConicResult conic_membership(const std::vector<RatVec>& gens, const RatVec& x) {
  const int m = static_cast<int>(x.size());
  const int k = static_cast<int>(gens.size());
  // Phase-I simplex, Bland's rule. Columns: k generators then m artificials.
  // Artificial column i is sign(x_i) e_i so the start basis is feasible.
  std::vector<int> sign(m, 1);
  for (int i = 0; i < m; ++i)
    if (x[i] < 0) sign[i] = -1;

  const int ncol = k + m;
  RatMat t(m, RatVec(ncol + 1, Rat(0)));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < k; ++j) t[i][j] = gens[j][i] * sign[i];
    t[i][k + i] = 1;
    t[i][ncol] = x[i] * sign[i];
  }
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = k + i;

  // Objective: minimize the sum of artificials; reduced costs on demand.
  auto reduced_cost = [&](int col) {
    Rat c = col >= k ? Rat(1) : Rat(0);
    for (int i = 0; i < m; ++i)
      if (basis[i] >= k) c -= t[i][col];
    return c;
  };

  for (int iter = 0; iter < 200000; ++iter) {
    int enter = -1;
    for (int j = 0; j < ncol; ++j) {
      if (reduced_cost(j) < 0) {
        enter = j;  // Bland: smallest index
        break;
      }
    }
    if (enter < 0) break;
    int leave = -1;
    Rat best_ratio;
    for (int i = 0; i < m; ++i) {
      if (t[i][enter] > 0) {
        Rat ratio = t[i][ncol] / t[i][enter];
        if (leave < 0 || ratio < best_ratio ||
            (ratio == best_ratio && basis[i] < basis[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
    }
    if (leave < 0)
      throw Error("LP_UNBOUNDED", "phase-I simplex cannot be unbounded");
    const Rat piv = t[leave][enter];
    for (int j = 0; j <= ncol; ++j) t[leave][j] /= piv;
    for (int i = 0; i < m; ++i) {
      if (i == leave || t[i][enter] == 0) continue;
      const Rat f = t[i][enter];
      for (int j = 0; j <= ncol; ++j) t[i][j] -= f * t[leave][j];
    }
    basis[leave] = enter;
  }

  Rat obj(0);
  for (int i = 0; i < m; ++i)
    if (basis[i] >= k) obj += t[i][ncol];

  ConicResult out;
  if (obj == 0) {
    out.member = true;
    out.lambda.assign(k, Rat(0));
    for (int i = 0; i < m; ++i)
      if (basis[i] < k) out.lambda[basis[i]] = t[i][ncol];
    return out;
  }
  out.member = false;
  // Farkas vector from the simplex multipliers: y^T = c_B^T B^{-1}; the
  // artificial columns hold B^{-1} up to the initial signs.
  out.farkas.assign(m, Rat(0));
  for (int j = 0; j < m; ++j) {
    Rat yj(0);
    for (int i = 0; i < m; ++i)
      if (basis[i] >= k) yj += t[i][k + j];
    out.farkas[j] = yj * sign[j];
  }
  return out;
}

std::vector<RatVec> kernel_basis(const RatMat& equalities, int n) {
  RatMat a = equalities;
  const int m = static_cast<int>(a.size());
  std::vector<int> pivot_col;
  int rank = 0;
  for (int c = 0; c < n && rank < m; ++c) {
    int p = -1;
    for (int i = rank; i < m; ++i)
      if (a[i][c] != 0) {
        p = i;
        break;
      }
    if (p < 0) continue;
    std::swap(a[rank], a[p]);
    const Rat d = a[rank][c];
    for (int j = 0; j < n; ++j) a[rank][j] /= d;
    for (int i = 0; i < m; ++i) {
      if (i == rank || a[i][c] == 0) continue;
      const Rat f = a[i][c];
      for (int j = 0; j < n; ++j) a[i][j] -= f * a[rank][j];
    }
    pivot_col.push_back(c);
    ++rank;
  }
  std::vector<bool> is_pivot(n, false);
  for (int c : pivot_col) is_pivot[c] = true;
  std::vector<RatVec> out;
  for (int c = 0; c < n; ++c) {
    if (is_pivot[c]) continue;
    RatVec v(n, Rat(0));
    v[c] = 1;
    for (int r = 0; r < rank; ++r) v[pivot_col[r]] = -a[r][c];
    out.push_back(canonicalize_ray(v));
  }
  return out;
}

RatVec tensor(const RatVec& a, const RatVec& b) {
  RatVec out;
  out.reserve(a.size() * b.size());
  for (const auto& x : a)
    for (const auto& y : b) out.push_back(x * y);
  return out;
}

std::vector<double> to_double(const RatVec& v) {
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i].get_d();
  return out;
}

RatVec from_integers(const std::vector<long>& v) {
  RatVec out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i];
  return out;
}

}  // namespace opsystk::poly
