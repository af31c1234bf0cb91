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

#include <cmath>

#include "doctest.h"
#include "opsystk/opsys.hpp"
#include "test_helpers.hpp"

using namespace opsystk;
using namespace opsystk::opsys;
using linalg::CMat;
using linalg::HermMat;
using linalg::inner;
using opsystk::testutil::random_herm;
using opsystk::testutil::random_psd;
using opsystk::testutil::unit;

namespace {

LevelElement scalar_element(const std::vector<double>& coeffs) {
  LevelElement x;
  x.level = 1;
  for (double c : coeffs) {
    HermMat h(1);
    h.set(0, 0, c);
    x.coeff.push_back(h);
  }
  return x;
}

LevelElement element_of(const System& s, const HermMat& ambient) {
  if (std::holds_alternative<MatrixSystem>(s))
    return scalar_element(coefficients(std::get<MatrixSystem>(s), ambient));
  return scalar_element(
      quotient_coefficients(std::get<QuotientSystem>(s), ambient));
}

}  // namespace

TEST_CASE("make_matrix_system dimensions and flags") {
  CHECK(make_matrix_system(2, {}).dim() == 1);

  auto s = make_matrix_system(2, {unit(2, 0, 1)});
  CHECK(s.dim() == 3);
  CHECK_FALSE(s.abelian);
  CHECK((s.unit() - HermMat::identity(2)).frob_norm() == 0.0);

  // Diagonal generators of W6 give a 5-dimensional abelian system.
  std::vector<CMat> gens;
  for (auto d : {std::vector<double>{1, 0, 0, 1, 0, 0},
                 std::vector<double>{0, 1, 0, 1, 0, 0},
                 std::vector<double>{0, 0, 1, 1, 0, 0},
                 std::vector<double>{1, 0, 0, 0, 1, 0},
                 std::vector<double>{1, 0, 0, 0, 0, 1}})
    gens.push_back(HermMat::diag(d).mat());
  auto w6 = make_matrix_system(6, gens);
  CHECK(w6.dim() == 5);
  CHECK(w6.abelian);
}

TEST_CASE("make_W and make_W23") {
  CHECK(make_W(2).dim() == 1);
  auto w6 = make_W(6);
  CHECK(w6.dim() == 5);
  CHECK(w6.abelian);
  CHECK(in_span(w6, HermMat::diag({1, 0, 0, 1, 0, 0})));
  CHECK_FALSE(in_span(w6, HermMat::diag({1, 0, 0, 0, 0, 0})));

  auto w4 = make_W(4);
  CHECK(w4.dim() == 3);

  auto w23 = make_W23();
  CHECK(w23.dim() == 4);
  // 3(2+0) = 2(1+1+1): in the span and positive.
  const HermMat probe = HermMat::diag({2, 0, 1, 1, 1});
  CHECK(in_span(w23, probe));
  auto v = level_positive(System(w23), element_of(System(w23), probe));
  CHECK(v.status == Membership::MEMBER);
  // The unit satisfies the constraint: 3(1+1) = 2(1+1+1).
  CHECK(in_span(w23, HermMat::identity(5)));
}

TEST_CASE("is_null_subspace") {
  // span{(1,1,1,-1,-1,-1)} in l6_inf.
  auto c1 = is_null_subspace(6, {HermMat::diag({1, 1, 1, -1, -1, -1})});
  CHECK(c1.is_null);
  CHECK(linalg::is_psd(c1.certificate));

  // span{e11} contains a positive element.
  HermMat e11(2);
  e11.set(0, 0, 1.0);
  auto c2 = is_null_subspace(2, {e11});
  CHECK_FALSE(c2.is_null);
  CHECK(std::abs(c2.certificate.trace() - 1.0) <= 1e-6);
  CHECK(linalg::lambda_min(c2.certificate) >= -1e-6);

  // span{e12+e21} is indefinite, hence null.
  HermMat x(2);
  x.set(0, 1, 1.0);
  auto c3 = is_null_subspace(2, {x});
  CHECK(c3.is_null);

  // Non-traceless null span: diag(1, -2).
  auto c4 = is_null_subspace(2, {HermMat::diag({1.0, -2.0})});
  CHECK(c4.is_null);
  // Witness is strictly positive and trace-orthogonal to the span.
  CHECK(linalg::lambda_min(c4.certificate) > 1e-3);
  CHECK(std::abs(inner(c4.certificate, HermMat::diag({1.0, -2.0}))) <= 1e-5);

  auto c5 = is_null_subspace(2, {HermMat::diag({1.0, 0.0})});
  CHECK_FALSE(c5.is_null);
}

TEST_CASE("make_quotient dimensions") {
  // J = {0}: quotient is M2 itself.
  NullSubspace trivial;
  trivial.n = 2;
  auto q0 = make_quotient(2, trivial);
  CHECK(q0.dim() == 4);
  CHECK(q0.unit_scale == doctest::Approx(std::sqrt(2.0)));

  // l6_inf / span{(1,1,1,-1,-1,-1)}: dimension 5.
  auto q6 = make_function_quotient(6, {{1, 1, 1, -1, -1, -1}});
  CHECK(q6.dim() == 5);

  // M2 / span{e12+e21}: dimension 3.
  HermMat x(2);
  x.set(0, 1, 1.0);
  NullSubspace j;
  j.n = 2;
  j.basis = {x};
  auto q2 = make_quotient(2, j);
  CHECK(q2.dim() == 3);

  // Non-null span is rejected.
  HermMat e11(2);
  e11.set(0, 0, 1.0);
  NullSubspace bad;
  bad.n = 2;
  bad.basis = {e11};
  CHECK_THROWS_AS(make_quotient(2, bad), Error);
}

TEST_CASE("level_positive on quotients: l6/J examples") {
  auto q = make_function_quotient(6, {{1, 1, 1, -1, -1, -1}});
  // Unit is a member.
  LevelElement u;
  u.level = 1;
  for (int k = 0; k < q.dim(); ++k) {
    HermMat h(1);
    h.set(0, 0, k == q.unit_index ? q.unit_scale : 0.0);
    u.coeff.push_back(h);
  }
  CHECK(level_positive(System(q), u).status == Membership::MEMBER);

  // (2,0,0,0,0,0) + J is a member.
  auto a = element_of(System(q), HermMat::diag({2, 0, 0, 0, 0, 0}));
  auto va = level_positive(System(q), a);
  CHECK(va.status == Membership::MEMBER);
  CHECK(va.route == "quotient-lp");

  // (0,0,0,0,0,-1) + J is not.
  auto b = element_of(System(q), HermMat::diag({0, 0, 0, 0, 0, -1}));
  auto vb = level_positive(System(q), b);
  CHECK(vb.status == Membership::NON_MEMBER);
  // Separating functional: nonnegative, annihilates J, negative on the rep.
  REQUIRE(vb.density.has_value());
  const HermMat& z = *vb.density;
  CHECK(linalg::lambda_min(z) >= -1e-9);
  CHECK(std::abs(inner(z, HermMat::diag({1, 1, 1, -1, -1, -1}))) <= 1e-7);
  CHECK(inner(z, HermMat::diag({0, 0, 0, 0, 0, -1})) < 0.0);

  // The LP and SDP paths agree (force the SDP path by clearing weights).
  auto q_sdp = q;
  q_sdp.diag_null_weights.reset();
  auto va2 = level_positive(System(q_sdp), a);
  CHECK(va2.route == "quotient-sdp");
  CHECK(va2.status == Membership::MEMBER);
  auto vb2 = level_positive(System(q_sdp), b);
  CHECK(vb2.status == Membership::NON_MEMBER);
  CHECK(vb2.value == doctest::Approx(vb.value).epsilon(1e-4));

  // -unit is NON_MEMBER.
  auto mu = u;
  mu.coeff[q.unit_index] = mu.coeff[q.unit_index] * -1.0;
  CHECK(level_positive(System(q), mu).status == Membership::NON_MEMBER);
}

TEST_CASE("level_positive on a matrix system agrees with is_psd") {
  Rng rng(31);
  auto m2 = make_full_matrix_system(2);
  for (int t = 0; t < 100; ++t) {
    HermMat h = random_herm(rng, 2);
    if (t % 3 == 0) h += HermMat::identity(2) * rng.uniform(0.0, 2.0);
    auto v = level_positive(System(m2), element_of(System(m2), h));
    CHECK((v.status == Membership::MEMBER) == linalg::is_psd(h));
  }
}

TEST_CASE("quotient members add (sampled)") {
  Rng rng(37);
  HermMat x(2);
  x.set(0, 1, 1.0);
  NullSubspace j;
  j.n = 2;
  j.basis = {x};
  auto q = make_quotient(2, j);
  int members = 0;
  for (int t = 0; t < 30 && members < 8; ++t) {
    auto a = element_of(System(q), random_psd(rng, 2));
    auto b = element_of(System(q), random_psd(rng, 2));
    auto va = level_positive(System(q), a);
    auto vb = level_positive(System(q), b);
    if (va.status != Membership::MEMBER || vb.status != Membership::MEMBER)
      continue;
    ++members;
    LevelElement sum;
    sum.level = 1;
    for (int k = 0; k < q.dim(); ++k)
      sum.coeff.push_back(a.coeff[k] + b.coeff[k]);
    CHECK(level_positive(System(q), sum).status == Membership::MEMBER);
  }
  CHECK(members > 0);
}

TEST_CASE("dual_of_matrix_system basics") {
  // R = M2: J = {0}, dual is M2 with unit tr/2.
  auto m2 = make_full_matrix_system(2);
  auto d2 = dual_of_matrix_system(m2);
  CHECK(d2.dim() == 4);
  CHECK(d2.null.dim() == 0);

  // R = span{I2}: kernel is the 3-dim trace-zero space.
  auto scalars = make_matrix_system(2, {});
  auto ds = dual_of_matrix_system(scalars);
  CHECK(ds.dim() == 1);
  CHECK(ds.null.dim() == 3);
  for (const auto& b : ds.null.basis) CHECK(std::abs(b.trace()) <= 1e-9);
}

TEST_CASE("dual of W6 is l6/span{(1,1,1,-1,-1,-1)}") {
  auto w6 = make_W(6);
  auto dual = dual_of_matrix_system(w6);
  CHECK(dual.dim() == 5);
  // The null space contains the diagonal direction (1,1,1,-1,-1,-1)...
  const HermMat flip = HermMat::diag({1, 1, 1, -1, -1, -1});
  double resid = 0.0;
  linalg::coefficients_in_span(flip, dual.null.basis, &resid);
  CHECK(resid <= 1e-8);
  // ...and every off-diagonal Hermitian direction.
  HermMat off(6);
  off.set(0, 3, cplx(1.0, 0.5));
  linalg::coefficients_in_span(off, dual.null.basis, &resid);
  CHECK(resid <= 1e-8);
}

TEST_CASE("dual_of_quotient recovers concrete subsystems") {
  // (M_n/{0})* = M_n.
  NullSubspace trivial;
  trivial.n = 2;
  auto q0 = make_quotient(2, trivial);
  auto full = dual_of_quotient(q0);
  CHECK(full.system.dim() == 4);
  CHECK(full.pairing.trivial);

  // (l6/span{flip})* = W6 as a diagonal subsystem.
  auto q6 = make_function_quotient(6, {{1, 1, 1, -1, -1, -1}});
  auto w6d = dual_of_quotient(q6);
  CHECK(w6d.system.dim() == 5);
  CHECK(w6d.system.abelian);
  auto w6 = make_W(6);
  for (const auto& b : w6.basis) CHECK(in_span(w6d.system, b, 1e-7));

  // (M2/span{e12+e21})* = span{I, e11-e22, i(e12-e21)}.
  HermMat x(2);
  x.set(0, 1, 1.0);
  NullSubspace j;
  j.n = 2;
  j.basis = {x};
  auto q2 = make_quotient(2, j);
  auto d = dual_of_quotient(q2);
  CHECK(d.system.dim() == 3);
  HermMat z = HermMat::diag({1.0, -1.0});
  HermMat ya(2);
  ya.set(0, 1, cplx(0.0, 1.0));  // i(e12 - e21)
  CHECK(in_span(d.system, z, 1e-7));
  CHECK(in_span(d.system, ya, 1e-7));
  CHECK_FALSE(in_span(d.system, x, 1e-7));
}

TEST_CASE("dual of a non-traceless quotient is unital and certified") {
  // J = span{diag(1,-2)}: null but not traceless. The canonical dual unit
  // density is diag(4/3, 2/3); the returned system is conjugated to unit I.
  NullSubspace j;
  j.n = 2;
  j.basis = {HermMat::diag({1.0, -2.0}) * (1.0 / std::sqrt(5.0))};
  auto q = make_quotient(2, j);
  auto d = dual_of_quotient(q);
  CHECK_FALSE(d.pairing.trivial);
  CHECK(d.system.dim() == 3);
  CHECK((d.system.unit() - HermMat::identity(2)).frob_norm() <= 1e-9);
  const HermMat w = HermMat::hermitian_part(d.pairing.w_half.mat() *
                                            d.pairing.w_half.mat());
  CHECK(w.at(0, 0).real() == doctest::Approx(4.0 / 3.0).epsilon(1e-4));
  CHECK(w.at(1, 1).real() == doctest::Approx(2.0 / 3.0).epsilon(1e-4));
  // Pairing annihilates J for every dual-system element.
  const HermMat jrep = HermMat::diag({1.0, -2.0});
  for (const auto& y : d.system.basis)
    CHECK(std::abs(d.pairing.pair(jrep, y)) <= 1e-6);
}

TEST_CASE("functional_positive realizes the FP correspondence") {
  Rng rng(41);
  auto m3 = make_full_matrix_system(3);
  for (int t = 0; t < 20; ++t) {
    HermMat d0 = random_herm(rng, 3);
    if (t % 2 == 0) d0 = random_psd(rng, 3);
    Functional f;
    for (const auto& b : m3.basis) f.coeffs.push_back(fp_pair(d0, b));
    auto v = functional_positive(m3, f);
    REQUIRE(v.status != Membership::UNDECIDED);
    const bool psd = linalg::is_psd(d0, 1e-7);
    if (std::abs(v.value) > 1e-6)
      CHECK((v.status == Membership::MEMBER) == psd);
  }
}

TEST_CASE("round-trip duality on random systems") {
  Rng rng(43);
  for (int t = 0; t < 4; ++t) {
    const int n = 2 + static_cast<int>(rng.below(2));  // ambient 2..3
    std::vector<CMat> gens;
    const int g = 1 + static_cast<int>(rng.below(2));
    for (int i = 0; i < g; ++i) gens.push_back(random_herm(rng, n).mat());
    auto r = make_matrix_system(n, gens);
    auto q = dual_of_matrix_system(r, 8);
    auto rr = dual_of_quotient(q);
    REQUIRE(rr.system.dim() == r.dim());
    // Same subspace...
    for (const auto& b : r.basis) CHECK(in_span(rr.system, b, 1e-6));
    // ...and iso_check through the coordinate map at levels 1 and 2.
    linalg::RMat map(rr.system.dim(), r.dim());
    for (int k = 0; k < r.dim(); ++k) {
      auto c = coefficients(rr.system, r.basis[k], 1e-6);
      for (int i = 0; i < rr.system.dim(); ++i) map.at(i, k) = c[i];
    }
    Rng check_rng(rng.next_u64());
    CHECK(iso_check(System(r), System(rr.system), map, {1, 2}, 4, 1e-7,
                    check_rng));
  }
}

TEST_CASE("iso_check detects broken maps") {
  auto m2 = make_full_matrix_system(2);
  Rng rng(47);
  linalg::RMat id(4, 4);
  for (int i = 0; i < 4; ++i) id.at(i, i) = 1.0;
  CHECK(iso_check(System(m2), System(m2), id, {1, 2}, 5, 1e-7, rng));

  // Non-unital scaling fails immediately.
  linalg::RMat twice = id * 2.0;
  CHECK_FALSE(iso_check(System(m2), System(m2), twice, {1}, 3, 1e-7, rng));

  // Flipping the imaginary off-diagonal direction implements the transpose:
  // an order iso at level 1 but not at level 2 (partial transpose breaks it).
  linalg::RMat flip = id;
  int imag_idx = -1;
  for (int k = 0; k < m2.dim(); ++k) {
    if (k == m2.unit_index) continue;
    if (std::abs(m2.basis[k].at(0, 1).imag()) > 0.5) imag_idx = k;
  }
  REQUIRE(imag_idx >= 0);
  flip.at(imag_idx, imag_idx) = -1.0;
  Rng rng2(53);
  CHECK(iso_check(System(m2), System(m2), flip, {1}, 10, 1e-7, rng2));
  Rng rng3(59);
  CHECK_FALSE(iso_check(System(m2), System(m2), flip, {2}, 25, 1e-7, rng3));
}

TEST_CASE("effros_system examples") {
  // S = M2, f = tr/2 (faithful): [f] is all of S*, dimension 4.
  auto m2 = make_full_matrix_system(2);
  Functional f;
  for (const auto& b : m2.basis)
    f.coeffs.push_back(fp_pair(HermMat::identity(2), b));
  CHECK(f.coeffs[m2.unit_index] == doctest::Approx(1.0));
  auto eff = effros_system(m2, f, 1);
  CHECK(eff.certified);
  CHECK(eff.dim() == 4);
  // Every raw generator is a positive functional dominated by f.
  REQUIRE(!eff.generators.empty());
  for (const auto& g : eff.generators) {
    CHECK(functional_positive(m2, g, 1e-6).status == Membership::MEMBER);
    Functional diff;
    for (size_t k = 0; k < f.coeffs.size(); ++k)
      diff.coeffs.push_back(f.coeffs[k] - g.coeffs[k]);
    CHECK(functional_positive(m2, diff, 1e-6).status == Membership::MEMBER);
  }

  // S = l2_inf, f = evaluation at the first coordinate: [f] = span{f}.
  auto l2 = make_linf(2);
  Functional g;
  const HermMat dens = HermMat::diag({2.0, 0.0});
  for (const auto& b : l2.basis) g.coeffs.push_back(fp_pair(dens, b));
  CHECK(g.coeffs[l2.unit_index] == doctest::Approx(1.0));
  auto eff1 = effros_system(l2, g, 2);
  CHECK(eff1.certified);
  CHECK(eff1.dim() == 1);
  // g = f lies in [f]: the single span direction is parallel to g.
  double dp = 0.0, nf = 0.0, ng = 0.0;
  for (size_t k = 0; k < g.coeffs.size(); ++k) {
    dp += eff1.span_basis[0].coeffs[k] * g.coeffs[k];
    nf += eff1.span_basis[0].coeffs[k] * eff1.span_basis[0].coeffs[k];
    ng += g.coeffs[k] * g.coeffs[k];
  }
  CHECK(std::abs(std::abs(dp) - std::sqrt(nf * ng)) <= 1e-6);
}
