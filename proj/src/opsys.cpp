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

#include "opsystk/opsys.hpp"

#include <algorithm>
#include <cmath>

#include "opsystk/polyhedral.hpp"

namespace opsystk::opsys {

using linalg::eig_herm;
using linalg::herm_basis;
using linalg::inner;
using linalg::kron;
using linalg::orthonormalize;

const char* to_string(Membership m) {
  switch (m) {
    case Membership::MEMBER: return "MEMBER";
    case Membership::NON_MEMBER: return "NON_MEMBER";
    case Membership::UNDECIDED: return "UNDECIDED";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// System helpers
// ---------------------------------------------------------------------------

int system_dim(const System& s) {
  return std::visit([](const auto& v) { return v.dim(); }, s);
}

int system_ambient(const System& s) {
  return std::visit([](const auto& v) { return v.n; }, s);
}

const std::string& system_name(const System& s) {
  return std::visit([](const auto& v) -> const std::string& { return v.name; },
                    s);
}

bool system_abelian(const System& s) {
  if (std::holds_alternative<MatrixSystem>(s))
    return std::get<MatrixSystem>(s).abelian;
  return std::get<QuotientSystem>(s).diag_null_weights.has_value();
}

const HermMat& system_basis_rep(const System& s, int k) {
  if (std::holds_alternative<MatrixSystem>(s))
    return std::get<MatrixSystem>(s).basis[k];
  return std::get<QuotientSystem>(s).coset_basis[k];
}

int system_unit_index(const System& s) {
  return std::visit([](const auto& v) { return v.unit_index; }, s);
}

double system_unit_scale(const System& s) {
  if (std::holds_alternative<MatrixSystem>(s)) return 1.0;
  return std::get<QuotientSystem>(s).unit_scale;
}

double fp_pair(const HermMat& density, const HermMat& x) {
  const int n = density.dim();
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      s += (density.at(i, j) * x.at(i, j)).real();
  return s / n;
}

double DualityPairing::pair(const HermMat& coset_rep, const HermMat& y) const {
  if (trivial) return fp_pair(y, coset_rep);
  const CMat scaled = w_half.mat() * y.mat() * w_half.mat();
  return fp_pair(linalg::HermMat::hermitian_part(scaled), coset_rep);
}

namespace {

HermMat herm_transpose(const HermMat& h) {
  return HermMat::hermitian_part(h.mat().transpose());
}

poly::Rat rat_from(double v) {
  // Exact binary rounding at 2^40 resolution.
  const double scaled = std::round(v * 1099511627776.0);
  poly::Rat r(scaled);
  r /= 1099511627776L;
  return r;
}

// Presentation basis with the exact identity first, remaining elements
// orthonormal and orthogonal to the unit direction.
struct BuiltBasis {
  std::vector<HermMat> basis;
  std::vector<HermMat> onb;
};

BuiltBasis build_unital_basis(int n, const std::vector<HermMat>& candidates) {
  BuiltBasis out;
  const HermMat id = HermMat::identity(n);
  out.basis.push_back(id);
  out.onb.push_back(id * (1.0 / std::sqrt(static_cast<double>(n))));
  for (const auto& c : candidates) {
    HermMat r = c;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& w : out.onb) r += w * (-inner(w, r));
    const double nrm = r.frob_norm();
    if (nrm > 1e-9 * (1.0 + c.frob_norm())) {
      r = r * (1.0 / nrm);
      out.basis.push_back(r);
      out.onb.push_back(r);
    }
  }
  return out;
}

bool all_diagonal(const std::vector<HermMat>& mats) {
  for (const auto& m : mats)
    if (!m.is_diagonal(1e-12)) return false;
  return true;
}

// Orthonormal basis of the orthogonal complement of `span_onb` inside
// Hermitian M_n (trace inner product).
std::vector<HermMat> complement_onb(int n,
                                    const std::vector<HermMat>& span_onb) {
  std::vector<HermMat> out;
  for (const auto& h : herm_basis(n)) {
    HermMat r = h;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& w : span_onb) r += w * (-inner(w, r));
      for (const auto& w : out) r += w * (-inner(w, r));
    }
    const double nrm = r.frob_norm();
    if (nrm > 1e-9) out.push_back(r * (1.0 / nrm));
  }
  return out;
}

HermMat scalar(double v) {
  HermMat one(1);
  one.set(0, 0, v);
  return one;
}

// max t s.t. sum_l c_l U_l >= t I, sum_l c_l tr(U_l) = trace_rhs.
// Returns (status-ok, t*, optimizer in the span).
struct SliceOpt {
  bool ok = false;
  double t = 0.0;
  HermMat point;
};

SliceOpt max_lambda_min_on_slice(int n, const std::vector<HermMat>& span_onb,
                                 double trace_rhs) {
  SliceOpt out;
  sdp::SdpProblem p;
  p.sense = sdp::Sense::MAX;
  p.blocks.push_back({n, sdp::BlockKind::PSD});  // Y = P - t I
  const int kc = static_cast<int>(span_onb.size());
  for (int l = 0; l < kc; ++l) p.blocks.push_back({1, sdp::BlockKind::FREE});
  p.blocks.push_back({1, sdp::BlockKind::FREE});  // t
  for (const auto& h : herm_basis(n)) {
    sdp::Constraint c;
    c.terms.push_back({0, h});
    for (int l = 0; l < kc; ++l) {
      const double g = inner(h, span_onb[l]);
      if (std::abs(g) > 1e-14) c.terms.push_back({1 + l, scalar(-g)});
    }
    const double ht = h.trace();
    if (std::abs(ht) > 1e-14) c.terms.push_back({1 + kc, scalar(ht)});
    c.rhs = 0.0;
    p.constraints.push_back(std::move(c));
  }
  sdp::Constraint trc;
  bool has_trace_dir = false;
  for (int l = 0; l < kc; ++l) {
    const double t = span_onb[l].trace();
    if (std::abs(t) > 1e-12) {
      trc.terms.push_back({1 + l, scalar(t)});
      has_trace_dir = true;
    }
  }
  if (!has_trace_dir) return out;  // slice is empty
  trc.rhs = trace_rhs;
  p.constraints.push_back(std::move(trc));
  p.objective = {{1 + kc, scalar(1.0)}};
  auto sol = sdp::solve(p);
  if (sol.status != sdp::SdpStatus::OPTIMAL) return out;
  out.ok = true;
  out.t = sol.primal_obj;
  HermMat w(n);
  for (int l = 0; l < kc; ++l) w += span_onb[l] * sol.X[1 + l].at(0, 0).real();
  out.point = w;
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

MatrixSystem make_matrix_system(int n, const std::vector<CMat>& generators,
                                std::string name) {
  std::vector<HermMat> cands;
  for (const auto& g : generators) {
    if (g.rows() != n || g.cols() != n)
      throw Error("MALFORMED_INPUT", "generator dimension mismatch");
    cands.push_back(HermMat::hermitian_part(g));
    cands.push_back(HermMat::hermitian_part(g * cplx(0.0, -1.0)));
  }
  auto built = build_unital_basis(n, cands);
  MatrixSystem s;
  s.n = n;
  s.basis = std::move(built.basis);
  s.onb = std::move(built.onb);
  s.unit_index = 0;
  s.abelian = all_diagonal(s.basis);
  s.name = std::move(name);
  return s;
}

MatrixSystem make_full_matrix_system(int n) {
  std::vector<CMat> gens;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      CMat e(n, n);
      e.at(i, j) = 1.0;
      gens.push_back(e);
    }
  return make_matrix_system(n, gens, "M" + std::to_string(n));
}

MatrixSystem make_function_system(int n, std::vector<std::vector<long>> weights,
                                  std::string name) {
  for (const auto& w : weights) {
    if (static_cast<int>(w.size()) != n)
      throw Error("MALFORMED_INPUT", "weight row length mismatch");
    long s = 0;
    for (long v : w) s += v;
    if (s != 0)
      throw Error("MALFORMED_INPUT",
                  "function-system weights must annihilate the unit");
  }
  poly::RatMat rows;
  for (const auto& w : weights) rows.push_back(poly::from_integers(w));
  auto kernel = poly::kernel_basis(rows, n);
  std::vector<HermMat> cands;
  for (const auto& v : kernel) cands.push_back(HermMat::diag(poly::to_double(v)));
  auto built = build_unital_basis(n, cands);
  MatrixSystem s;
  s.n = n;
  s.basis = std::move(built.basis);
  s.onb = std::move(built.onb);
  s.unit_index = 0;
  s.abelian = true;
  s.weights = std::move(weights);
  s.name = std::move(name);
  return s;
}

MatrixSystem make_linf(int n) {
  return make_function_system(n, {}, "linf" + std::to_string(n));
}

MatrixSystem make_W(int two_n) {
  if (two_n < 2 || two_n % 2 != 0)
    throw Error("MALFORMED_INPUT", "W systems need even dimension >= 2");
  std::vector<long> w(two_n, 1);
  for (int i = two_n / 2; i < two_n; ++i) w[i] = -1;
  return make_function_system(two_n, {w}, "W" + std::to_string(two_n));
}

MatrixSystem make_W23() {
  return make_function_system(5, {{3, 3, -2, -2, -2}}, "W23");
}

NullSubspace make_null_subspace(int n, const std::vector<CMat>& span) {
  std::vector<HermMat> cands;
  for (const auto& g : span) {
    cands.push_back(HermMat::hermitian_part(g));
    cands.push_back(HermMat::hermitian_part(g * cplx(0.0, -1.0)));
  }
  NullSubspace j;
  j.n = n;
  std::vector<HermMat> nonzero;
  for (auto& c : cands)
    if (c.frob_norm() > 1e-12) nonzero.push_back(c);
  if (!nonzero.empty()) j.basis = orthonormalize(nonzero);
  return j;
}

NullCheck is_null_subspace(int n, const std::vector<HermMat>& span,
                           double tol) {
  NullCheck out;
  std::vector<HermMat> onb =
      span.empty() ? std::vector<HermMat>{} : orthonormalize(span);

  bool traceless = true;
  for (const auto& j : onb)
    if (std::abs(j.trace()) > 1e-10) traceless = false;
  if (traceless) {
    // A *-closed span of traceless matrices meets the PSD cone only at 0,
    // and the identity is a strictly positive witness orthogonal to it.
    out.is_null = true;
    out.certificate = HermMat::identity(n);
    out.margin = 1.0;
    return out;
  }

  // Conic alternative: J is null iff its trace-orthogonal complement contains
  // a strictly positive matrix.
  auto witness = max_lambda_min_on_slice(n, complement_onb(n, onb),
                                         static_cast<double>(n));
  if (witness.ok && witness.t > tol) {
    out.is_null = true;
    out.certificate = witness.point;
    out.margin = witness.t;
    return out;
  }

  // Otherwise look for the PSD trace-one element of the span itself.
  auto elem = max_lambda_min_on_slice(n, onb, 1.0);
  if (elem.ok && elem.t >= -tol) {
    out.is_null = false;
    out.certificate = elem.point;
    out.margin = elem.t;
    return out;
  }

  out.is_null = true;
  out.certificate = witness.ok ? witness.point : HermMat::identity(n);
  out.margin = witness.ok ? witness.t : 0.0;
  return out;
}

QuotientSystem make_quotient(int n, NullSubspace null, std::string name) {
  auto check = is_null_subspace(n, null.basis);
  if (!check.is_null)
    throw Error("NOT_NULL", "span contains a nonzero positive element");
  QuotientSystem q;
  q.n = n;
  q.null = std::move(null);
  if (!q.null.basis.empty()) q.null.basis = orthonormalize(q.null.basis);
  // Unit coset representative: projection of I onto J^perp (equals I when J
  // is traceless).
  HermMat u = HermMat::identity(n);
  for (const auto& j : q.null.basis) u += j * (-inner(j, u));
  const double us = u.frob_norm();
  if (us < 1e-12) throw Error("NOT_NULL", "identity collapses in the quotient");
  q.coset_basis.push_back(u * (1.0 / us));
  q.unit_index = 0;
  q.unit_scale = us;
  std::vector<HermMat> taken = q.null.basis;
  taken.push_back(q.coset_basis[0]);
  for (auto& c : complement_onb(n, taken)) q.coset_basis.push_back(std::move(c));
  q.name = std::move(name);
  return q;
}

QuotientSystem make_function_quotient(int n,
                                      std::vector<std::vector<long>> weights,
                                      std::string name) {
  std::vector<HermMat> span;
  for (const auto& w : weights) {
    if (static_cast<int>(w.size()) != n)
      throw Error("MALFORMED_INPUT", "null weight row length mismatch");
    span.push_back(HermMat::diag(std::vector<double>(w.begin(), w.end())));
  }
  // Fold every off-diagonal direction into J; the result is completely order
  // isomorphic to l_n^inf / span{weights} (diagonal pinching fixes cosets).
  for (const auto& h : herm_basis(n))
    if (!h.is_diagonal(1e-14)) span.push_back(h);
  NullSubspace j;
  j.n = n;
  j.basis = orthonormalize(span);
  auto q = make_quotient(n, std::move(j), std::move(name));
  q.diag_null_weights = std::move(weights);
  return q;
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

HermMat level_representative(const System& s, const LevelElement& x) {
  const int d = system_dim(s);
  if (static_cast<int>(x.coeff.size()) != d)
    throw Error("MALFORMED_INPUT", "level element has wrong coefficient count");
  const int n = system_ambient(s);
  HermMat rep(x.level * n);
  for (int k = 0; k < d; ++k) rep += kron(x.coeff[k], system_basis_rep(s, k));
  return rep;
}

namespace {

Verdict matrix_level_positive(const MatrixSystem& s, const LevelElement& x,
                              double tol) {
  const HermMat rep = level_representative(System(s), x);
  Verdict v;
  v.grounded = true;
  v.route = "matrix-psd";
  if (rep.is_diagonal(1e-12)) {
    double lam = rep.at(0, 0).real();
    int arg = 0;
    for (int i = 1; i < rep.dim(); ++i)
      if (rep.at(i, i).real() < lam) {
        lam = rep.at(i, i).real();
        arg = i;
      }
    v.value = lam;
    v.status = lam >= -tol ? Membership::MEMBER : Membership::NON_MEMBER;
    if (v.status == Membership::NON_MEMBER) {
      HermMat dens(rep.dim());
      dens.set(arg, arg, 1.0);
      v.density = dens;
    }
    return v;
  }
  const auto eig = eig_herm(rep);
  v.value = eig.values.front();
  v.status = v.value >= -tol ? Membership::MEMBER : Membership::NON_MEMBER;
  if (v.status == Membership::NON_MEMBER) {
    // Rank-one separating state from the bottom eigenvector.
    CMat vv(rep.dim(), 1);
    for (int i = 0; i < rep.dim(); ++i) vv.at(i, 0) = eig.vectors.at(i, 0);
    v.density = HermMat::hermitian_part(vv * vv.adjoint());
  }
  return v;
}

// Hermitian basis of M_m(J).
std::vector<HermMat> level_null_basis(const QuotientSystem& q, int m) {
  std::vector<HermMat> out;
  for (const auto& e : herm_basis(m))
    for (const auto& j : q.null.basis) out.push_back(kron(e, j));
  return out;
}

Verdict quotient_level_positive_lp(const QuotientSystem& q,
                                   const LevelElement& x) {
  // Exact rational path for diagonal quotients at level 1 (the diagonal
  // pinching argument makes the diagonal restriction lossless).
  const int n = q.n;
  const HermMat rep = level_representative(System(q), x);
  poly::RatVec d(n);
  for (int i = 0; i < n; ++i) d[i] = rat_from(rep.at(i, i).real());
  std::vector<poly::RatVec> gens;
  for (const auto& w : *q.diag_null_weights) {
    auto r = poly::from_integers(w);
    gens.push_back(r);
    for (auto& e : r) e = -e;
    gens.push_back(std::move(r));
  }
  for (int i = 0; i < n; ++i) {
    poly::RatVec e(n, poly::Rat(0));
    e[i] = 1;
    gens.push_back(std::move(e));
  }
  auto res = poly::conic_membership(gens, d);
  Verdict v;
  v.grounded = true;
  v.route = "quotient-lp";
  if (res.member) {
    v.status = Membership::MEMBER;
    v.value = 0.0;
    return v;
  }
  // f = -farkas: entrywise nonnegative, annihilates the diagonal null
  // directions, strictly negative on the element.
  poly::Rat fx(0), f1(0);
  v.functional.resize(n);
  std::vector<double> fd(n);
  for (int i = 0; i < n; ++i) {
    const poly::Rat fi = -res.farkas[i];
    fx += fi * d[i];
    f1 += fi;
    v.functional[i] = fi.get_d();
    fd[i] = fi.get_d();
  }
  v.status = Membership::NON_MEMBER;
  v.value = (f1 > 0) ? poly::Rat(fx / f1).get_d() : fx.get_d();
  HermMat dens = HermMat::diag(fd);
  if (f1 > 0) dens = dens * (1.0 / f1.get_d());  // trace-one, <Z, rep> = value
  v.density = dens;
  return v;
}

Verdict quotient_level_positive_sdp(const QuotientSystem& q,
                                    const LevelElement& x, double tol) {
  const int m = x.level;
  const int n = q.n;
  const int rep_dim = m * n;
  const HermMat rep = level_representative(System(q), x);
  const auto jb = level_null_basis(q, m);
  const int kj = static_cast<int>(jb.size());

  // max t  s.t.  rep + sum c_mu K_mu - t I = Y >= 0,  t <= 1.
  sdp::SdpProblem p;
  p.sense = sdp::Sense::MAX;
  p.blocks.push_back({rep_dim, sdp::BlockKind::PSD});  // Y
  p.blocks.push_back({1, sdp::BlockKind::PSD});        // slack for t <= 1
  for (int l = 0; l < kj; ++l) p.blocks.push_back({1, sdp::BlockKind::FREE});
  p.blocks.push_back({1, sdp::BlockKind::FREE});  // t
  const int t_index = 2 + kj;
  const auto hb = herm_basis(rep_dim);
  for (const auto& h : hb) {
    sdp::Constraint c;
    c.terms.push_back({0, h});
    for (int l = 0; l < kj; ++l) {
      const double g = inner(h, jb[l]);
      if (std::abs(g) > 1e-14) c.terms.push_back({2 + l, scalar(-g)});
    }
    const double ht = h.trace();
    if (std::abs(ht) > 1e-14) c.terms.push_back({t_index, scalar(ht)});
    c.rhs = inner(h, rep);
    p.constraints.push_back(std::move(c));
  }
  {
    sdp::Constraint c;  // t + slack = 1
    c.terms.push_back({t_index, scalar(1.0)});
    c.terms.push_back({1, scalar(1.0)});
    c.rhs = 1.0;
    p.constraints.push_back(std::move(c));
  }
  p.objective = {{t_index, scalar(1.0)}};

  auto sol = sdp::solve(p);
  Verdict v;
  v.route = "quotient-sdp";
  if (sol.status != sdp::SdpStatus::OPTIMAL) {
    v.status = Membership::UNDECIDED;
    v.grounded = false;
    v.value = sol.primal_obj;
    return v;
  }
  v.grounded = true;
  v.value = sol.primal_obj;
  if (v.value >= -tol) {
    v.status = Membership::MEMBER;
    HermMat j(rep_dim);
    for (int l = 0; l < kj; ++l) j += jb[l] * sol.X[2 + l].at(0, 0).real();
    v.psd_certificate.push_back(j);  // rep + j + max(0,-t*) I >= 0
    return v;
  }
  v.status = Membership::NON_MEMBER;
  // Dual density Z = -sum y_alpha H_alpha: PSD, annihilates M_m(J),
  // <Z, I> = 1 and <Z, rep> = t* < 0.
  HermMat z(rep_dim);
  for (size_t a = 0; a < hb.size(); ++a) z += hb[a] * (-sol.y[a]);
  v.density = z;
  return v;
}

}  // namespace

Verdict level_positive(const System& s, const LevelElement& x, double tol) {
  if (std::holds_alternative<MatrixSystem>(s))
    return matrix_level_positive(std::get<MatrixSystem>(s), x, tol);
  const auto& q = std::get<QuotientSystem>(s);
  if (q.diag_null_weights && x.level == 1)
    return quotient_level_positive_lp(q, x);
  return quotient_level_positive_sdp(q, x, tol);
}

Verdict functional_positive(const MatrixSystem& s, const Functional& f,
                            double tol) {
  // min f(r) over r in S, r >= 0, tr r = 1.
  const int n = s.n;
  const int d = s.dim();
  RMat gram(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) gram.at(i, j) = inner(s.basis[i], s.basis[j]);
  auto dual_coeffs = linalg::solve_linear(gram, f.coeffs);
  HermMat fmat(n);
  for (int k = 0; k < d; ++k) fmat += s.basis[k] * dual_coeffs[k];
  // <fmat, r> = f(r) for every r in span(S).

  sdp::SdpProblem p;
  p.sense = sdp::Sense::MIN;
  p.blocks.push_back({n, sdp::BlockKind::PSD});
  p.objective = {{0, fmat}};
  for (const auto& g : complement_onb(n, s.onb))
    p.constraints.push_back({{{0, g}}, 0.0});
  p.constraints.push_back({{{0, HermMat::identity(n)}}, 1.0});
  auto sol = sdp::solve(p);
  Verdict v;
  v.route = "functional-sdp";
  if (sol.status != sdp::SdpStatus::OPTIMAL) {
    v.status = Membership::UNDECIDED;
    v.value = sol.primal_obj;
    return v;
  }
  v.grounded = true;
  v.value = sol.primal_obj;
  v.status = v.value >= -tol ? Membership::MEMBER : Membership::NON_MEMBER;
  if (v.status == Membership::NON_MEMBER) v.psd_certificate.push_back(sol.X[0]);
  return v;
}

std::vector<double> coefficients(const MatrixSystem& s, const HermMat& x,
                                 double tol) {
  double resid = 0.0;
  auto c = linalg::coefficients_in_span(x, s.basis, &resid);
  if (resid > tol * (1.0 + x.frob_norm()))
    throw Error("NOT_IN_SPAN", "element lies outside the system span");
  return c;
}

std::vector<double> quotient_coefficients(const QuotientSystem& q,
                                          const HermMat& x) {
  std::vector<double> c(q.dim());
  for (int k = 0; k < q.dim(); ++k) c[k] = inner(q.coset_basis[k], x);
  return c;
}

bool in_span(const MatrixSystem& s, const HermMat& x, double tol) {
  double resid = 0.0;
  linalg::coefficients_in_span(x, s.basis, &resid);
  return resid <= tol * (1.0 + x.frob_norm());
}

QuotientSystem dual_of_matrix_system(const MatrixSystem& r, int certify_samples,
                                     double tol) {
  const int n = r.n;
  // J = annihilator of span(R) under the trace pairing: transposes of the
  // Hilbert-Schmidt complement. Traceless automatically (I lies in R).
  NullSubspace j;
  j.n = n;
  for (const auto& g : complement_onb(n, r.onb))
    j.basis.push_back(herm_transpose(g));
  auto q =
      make_quotient(n, std::move(j), r.name.empty() ? "dual" : r.name + "*");
  if (r.abelian && r.weights) q.diag_null_weights = *r.weights;

  // Certify Q ~ R*: positivity of f_D|_R must match quotient positivity of
  // D + J on sampled functionals.
  Rng rng(0x9d2c5680ULL ^ (static_cast<std::uint64_t>(n) * 1315423911ULL));
  for (int t = 0; t < certify_samples; ++t) {
    CMat g(n, n);
    for (int i = 0; i < n; ++i)
      for (int jj = 0; jj < n; ++jj)
        g.at(i, jj) = cplx(rng.normal(), rng.normal());
    HermMat d0 = HermMat::hermitian_part(g);
    if (t % 2 == 0) d0 += HermMat::identity(n) * rng.uniform(0.0, 2.0);
    Functional f;
    f.coeffs.resize(r.dim());
    for (int k = 0; k < r.dim(); ++k) f.coeffs[k] = fp_pair(d0, r.basis[k]);
    auto vf = functional_positive(r, f, tol);
    LevelElement x;
    x.level = 1;
    for (double c : quotient_coefficients(q, d0)) x.coeff.push_back(scalar(c));
    auto vq = level_positive(System(q), x, tol);
    if (vf.status != vq.status && std::abs(vf.value) > 10 * tol &&
        std::abs(vq.value) > 10 * tol)
      throw Error("DUALITY_MISMATCH",
                  "dual certification failed on a sampled functional");
  }
  return q;
}

QuotientDual dual_of_quotient(const QuotientSystem& q, double tol) {
  const int n = q.n;
  // Annihilator of J under the trace pairing = transposes of the coset span.
  std::vector<HermMat> span;
  for (const auto& c : q.coset_basis) span.push_back(herm_transpose(c));

  bool traceless = true;
  for (const auto& j : q.null.basis)
    if (std::abs(j.trace()) > 1e-10) traceless = false;

  QuotientDual out;
  out.pairing.n = n;
  out.pairing.trivial = true;
  out.pairing.w_half = HermMat::identity(n);

  if (!traceless) {
    // Canonical faithful-state density: maximize the least eigenvalue on the
    // annihilator slice {tr = n}. Equals I exactly in the traceless case.
    auto opt = max_lambda_min_on_slice(n, orthonormalize(span),
                                       static_cast<double>(n));
    if (!opt.ok || opt.t <= tol)
      throw Error("DUALITY_MISMATCH", "no faithful state on the quotient dual");
    auto ew = eig_herm(opt.point);
    CMat wh(n, n), whinv(n, n);
    for (int k = 0; k < n; ++k) {
      const double lam = std::max(ew.values[k], 1e-12);
      for (int i = 0; i < n; ++i)
        for (int jj = 0; jj < n; ++jj) {
          const cplx v = ew.vectors.at(i, k) * std::conj(ew.vectors.at(jj, k));
          wh.at(i, jj) += v * std::sqrt(lam);
          whinv.at(i, jj) += v / std::sqrt(lam);
        }
    }
    out.pairing.trivial = false;
    out.pairing.w_half = HermMat::hermitian_part(wh);
    // Conjugate by W^{-1/2} so the returned system is honestly unital.
    std::vector<HermMat> conj_span;
    for (const auto& s : span)
      conj_span.push_back(HermMat::hermitian_part(whinv * s.mat() * whinv));
    span = std::move(conj_span);
  }

  std::vector<CMat> gens;
  gens.reserve(span.size());
  for (const auto& s : span) gens.push_back(s.mat());
  out.system = make_matrix_system(
      n, gens, q.name.empty() ? "quotient-dual" : q.name + "*");
  if (out.system.dim() != q.dim())
    throw Error("DUALITY_MISMATCH", "quotient dual has wrong dimension");
  return out;
}

EffrosSystem effros_system(const MatrixSystem& s, const Functional& f,
                           std::uint64_t seed, double tol) {
  const int d = s.dim();
  const int n = s.n;
  if (std::abs(f.coeffs[s.unit_index] - 1.0) > 1e-6)
    throw Error("MALFORMED_INPUT", "Effros base functional must be a state");
  if (functional_positive(s, f, tol).status != Membership::MEMBER)
    throw Error("MALFORMED_INPUT", "Effros base functional must be positive");

  // K = {g : 0 <= g <= f}: g is f_{D1}|_S with D1 >= 0 and f - g is
  // f_{D2}|_S with D2 >= 0 (positive functionals on a matrix system are
  // exactly restrictions of globally positive ones).
  auto optimize = [&](const std::vector<double>& dir) {
    sdp::SdpProblem p;
    p.sense = sdp::Sense::MAX;
    p.blocks.push_back({n, sdp::BlockKind::PSD});  // D1
    p.blocks.push_back({n, sdp::BlockKind::PSD});  // D2
    for (int k = 0; k < d; ++k) {
      sdp::Constraint c;
      const HermMat bt = herm_transpose(s.basis[k]) * (1.0 / n);
      c.terms.push_back({0, bt});  // <bt, D> = pair(D, B_k)
      c.terms.push_back({1, bt});
      c.rhs = f.coeffs[k];
      p.constraints.push_back(std::move(c));
    }
    HermMat obj(n);
    for (int k = 0; k < d; ++k)
      obj += herm_transpose(s.basis[k]) * (dir[k] / n);
    p.objective = {{0, obj}};
    auto sol = sdp::solve(p);
    std::vector<double> g(d, 0.0);
    const bool ok = sol.status == sdp::SdpStatus::OPTIMAL;
    if (ok)
      for (int k = 0; k < d; ++k) g[k] = fp_pair(sol.X[0], s.basis[k]);
    return std::pair<double, std::vector<double>>(ok ? sol.primal_obj : 0.0, g);
  };

  Rng rng(seed ^ 0xeff05eff05ULL);
  std::vector<std::vector<double>> span_onb;
  std::vector<Functional> generators;
  auto keep_generator = [&](const std::vector<double>& g) {
    double nrm = 0.0;
    for (double x : g) nrm += x * x;
    if (nrm > 1e-12) generators.push_back(Functional{g});
  };
  auto add_vec = [&](std::vector<double> v) {
    for (const auto& w : span_onb) {
      double dp = 0.0;
      for (int k = 0; k < d; ++k) dp += w[k] * v[k];
      for (int k = 0; k < d; ++k) v[k] -= dp * w[k];
    }
    double nrm = 0.0;
    for (double x : v) nrm += x * x;
    nrm = std::sqrt(nrm);
    if (nrm > 1e-7) {
      for (double& x : v) x /= nrm;
      span_onb.push_back(std::move(v));
      return true;
    }
    return false;
  };
  add_vec(f.coeffs);
  keep_generator(f.coeffs);

  const int cap = 50;
  for (int round = 0; round < cap; ++round) {
    bool grew = false;
    for (int probe = 0; probe < 2 * d; ++probe) {
      std::vector<double> dir(d);
      for (auto& x : dir) x = rng.normal();
      auto [val, g] = optimize(dir);
      (void)val;
      if (add_vec(g)) {
        grew = true;
        keep_generator(g);
      }
    }
    if (grew) continue;
    // Certify maximality direction by direction on the orthogonal complement.
    bool certified = true;
    std::vector<std::vector<double>> complement;
    for (int k = 0; k < d; ++k) {
      std::vector<double> e(d, 0.0);
      e[k] = 1.0;
      for (const auto& w : span_onb)
        for (int i = 0; i < d; ++i) e[i] -= w[k] * w[i];
      for (const auto& w : complement) {
        double dp = 0.0;
        for (int i = 0; i < d; ++i) dp += w[i] * e[i];
        for (int i = 0; i < d; ++i) e[i] -= dp * w[i];
      }
      double nrm = 0.0;
      for (double x : e) nrm += x * x;
      nrm = std::sqrt(nrm);
      if (nrm > 1e-7) {
        for (double& x : e) x /= nrm;
        complement.push_back(std::move(e));
      }
    }
    for (const auto& v : complement) {
      auto [up, gup] = optimize(v);
      std::vector<double> neg(v);
      for (double& x : neg) x = -x;
      auto [dn, gdn] = optimize(neg);
      if (up > 100 * tol || dn > 100 * tol) {
        certified = false;
        if (add_vec(gup))
          keep_generator(gup);
        else if (add_vec(gdn))
          keep_generator(gdn);
        break;
      }
    }
    if (certified) {
      EffrosSystem out;
      out.base = f;
      out.seed = seed;
      out.certified = true;
      out.generators = std::move(generators);
      for (auto& v : span_onb) out.span_basis.push_back(Functional{std::move(v)});
      return out;
    }
  }
  throw Error("UNDECIDED_SPAN", "Effros span discovery hit the iteration cap");
}

std::vector<HermMat> span_complement(int n, const std::vector<HermMat>& onb) {
  return complement_onb(n, onb);
}

MatrixSystem level_system(const MatrixSystem& s, int m) {
  if (m == 1) return s;
  std::vector<CMat> gens;
  for (const auto& e : herm_basis(m))
    for (const auto& b : s.basis) gens.push_back(kron(e, b).mat());
  return make_matrix_system(m * s.n, gens,
                            "M" + std::to_string(m) + "(" + s.name + ")");
}

QuotientSystem level_quotient(const QuotientSystem& q, int m) {
  if (m == 1) return q;
  NullSubspace j;
  j.n = m * q.n;
  for (const auto& e : herm_basis(m))
    for (const auto& b : q.null.basis) j.basis.push_back(kron(e, b));
  return make_quotient(m * q.n, std::move(j),
                       "M" + std::to_string(m) + "(" + q.name + ")");
}

LevelElement random_level_element(const System& s, int level, Rng& rng) {
  LevelElement x;
  x.level = level;
  const int d = system_dim(s);
  for (int k = 0; k < d; ++k) {
    CMat g(level, level);
    for (int i = 0; i < level; ++i)
      for (int j = 0; j < level; ++j)
        g.at(i, j) = cplx(rng.normal(), rng.normal());
    x.coeff.push_back(HermMat::hermitian_part(g) * (1.0 / std::sqrt(d)));
  }
  return x;
}

bool iso_check(const System& a, const System& b, const RMat& map,
               const std::vector<int>& levels, int samples, double tol,
               Rng& rng) {
  const int da = system_dim(a), db = system_dim(b);
  if (da != db || map.rows() != db || map.cols() != da) return false;
  // Unitality.
  std::vector<double> ua(da, 0.0), ub(db, 0.0);
  ua[system_unit_index(a)] = system_unit_scale(a);
  ub[system_unit_index(b)] = system_unit_scale(b);
  for (int i = 0; i < db; ++i) {
    double v = 0.0;
    for (int k = 0; k < da; ++k) v += map.at(i, k) * ua[k];
    if (std::abs(v - ub[i]) > 1e-6 * (1.0 + std::abs(ub[i]))) return false;
  }
  // Bijectivity via the inverse.
  RMat inv(da, db);
  try {
    for (int c = 0; c < db; ++c) {
      std::vector<double> e(db, 0.0);
      e[c] = 1.0;
      auto col = linalg::solve_linear(map, e);
      for (int r = 0; r < da; ++r) inv.at(r, c) = col[r];
    }
  } catch (const Error&) {
    return false;
  }

  auto push = [&](const System& sys, const RMat& mm, const LevelElement& x) {
    LevelElement y;
    y.level = x.level;
    const int dt = system_dim(sys);
    for (int i = 0; i < dt; ++i) {
      HermMat c(x.level);
      for (int k = 0; k < static_cast<int>(x.coeff.size()); ++k)
        if (mm.at(i, k) != 0.0) c += x.coeff[k] * mm.at(i, k);
      y.coeff.push_back(c);
    }
    return y;
  };

  for (int level : levels) {
    for (int t = 0; t < samples; ++t) {
      for (int dirn = 0; dirn < 2; ++dirn) {
        const System& src = dirn == 0 ? a : b;
        const System& dst = dirn == 0 ? b : a;
        const RMat& mm = dirn == 0 ? map : inv;
        LevelElement x = random_level_element(src, level, rng);
        // Mix in unit shifts so members and non-members both appear.
        if (t % 2 == 0) {
          HermMat shift = HermMat::identity(level) *
                          (rng.uniform(0.5, 2.0) * system_unit_scale(src));
          x.coeff[system_unit_index(src)] += shift;
        }
        auto vs = level_positive(src, x, tol);
        auto vd = level_positive(dst, push(dst, mm, x), tol);
        if (vs.status == Membership::UNDECIDED ||
            vd.status == Membership::UNDECIDED)
          return false;
        if (vs.status != vd.status && std::abs(vs.value) > 10 * tol &&
            std::abs(vd.value) > 10 * tol)
          return false;
      }
    }
  }
  return true;
}

}  // namespace opsystk::opsys
