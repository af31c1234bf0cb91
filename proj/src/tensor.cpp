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

#include "opsystk/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "opsystk/polyhedral.hpp"

namespace opsystk::tensor {

using linalg::CMat;
using linalg::eig_herm;
using linalg::herm_basis;
using linalg::inner;
using linalg::kron;
using opsys::coefficients;
using opsys::dual_of_quotient;
using opsys::level_quotient;
using opsys::level_system;
using opsys::quotient_coefficients;
using opsys::span_complement;
using opsys::system_ambient;
using opsys::system_basis_rep;
using opsys::system_dim;
using opsys::system_unit_index;
using opsys::system_unit_scale;

namespace {

HermMat herm_transpose(const HermMat& h) {
  return HermMat::hermitian_part(h.mat().transpose());
}

HermMat scalar(double v) {
  HermMat one(1);
  one.set(0, 0, v);
  return one;
}

}  // namespace

// ---------------------------------------------------------------------------
// Elements
// ---------------------------------------------------------------------------

TensorElement flip(const TensorElement& x) {
  TensorElement y;
  y.left = x.right;
  y.right = x.left;
  y.level = x.level;
  const int dl = system_dim(x.left), dr = system_dim(x.right);
  y.coeff.assign(dr, std::vector<HermMat>(dl));
  for (int k = 0; k < dl; ++k)
    for (int l = 0; l < dr; ++l) y.coeff[l][k] = x.coeff[k][l];
  return y;
}

TensorElement unit_element(const System& left, const System& right) {
  TensorElement x;
  x.left = left;
  x.right = right;
  x.level = 1;
  const int dl = system_dim(left), dr = system_dim(right);
  x.coeff.assign(dl, std::vector<HermMat>(dr, HermMat(1)));
  x.coeff[system_unit_index(left)][system_unit_index(right)] =
      scalar(system_unit_scale(left) * system_unit_scale(right));
  return x;
}

HermMat tensor_representative(const TensorElement& x) {
  const int dl = system_dim(x.left), dr = system_dim(x.right);
  const int nl = system_ambient(x.left), nr = system_ambient(x.right);
  HermMat rep(x.level * nl * nr);
  for (int k = 0; k < dl; ++k)
    for (int l = 0; l < dr; ++l) {
      if (x.coeff[k][l].frob_norm() == 0.0) continue;
      rep += kron(x.coeff[k][l], kron(system_basis_rep(x.left, k),
                                      system_basis_rep(x.right, l)));
    }
  return rep;
}

TensorElement pushforward(const MatrixSystem& s, const QuotientSystem& q,
                          const HermMat& u, int level) {
  // u lives in M_level(span(S) (x) M_n); the null components of the right
  // factor are dropped, which is exactly id (x) q on representatives.
  TensorElement x;
  x.left = s;
  x.right = q;
  x.level = level;
  const int ds = s.dim(), dq = q.dim();
  const int ns = s.n, nq = q.n;
  x.coeff.assign(ds, std::vector<HermMat>(dq, HermMat(level)));
  linalg::RMat gram(ds, ds);
  for (int i = 0; i < ds; ++i)
    for (int j = 0; j < ds; ++j) gram.at(i, j) = inner(s.basis[i], s.basis[j]);
  for (int l = 0; l < dq; ++l) {
    // Partial pairing with the (orthonormal) coset representative.
    const HermMat& d = q.coset_basis[l];
    CMat left_part(level * ns, level * ns);
    for (int p = 0; p < level * ns; ++p)
      for (int pp = 0; pp < level * ns; ++pp) {
        const int a = p / ns, i = p % ns;
        const int b = pp / ns, j = pp % ns;
        cplx v = 0.0;
        for (int r = 0; r < nq; ++r)
          for (int t = 0; t < nq; ++t)
            v += d.at(t, r) * u.at((a * ns + i) * nq + r, (b * ns + j) * nq + t);
        left_part.at(p, pp) = v;
      }
    const HermMat lh = HermMat::hermitian_part(left_part);
    // Decompose over M_level(S) with a Gram solve per level entry.
    for (int p = 0; p < level; ++p)
      for (int pq2 = p; pq2 < level; ++pq2) {
        std::vector<double> rre(ds), rim(ds);
        for (int k = 0; k < ds; ++k) {
          cplx v = 0.0;
          for (int i = 0; i < ns; ++i)
            for (int j = 0; j < ns; ++j)
              v += std::conj(s.basis[k].at(i, j)) *
                   lh.at(p * ns + i, pq2 * ns + j);
          rre[k] = v.real();
          rim[k] = v.imag();
        }
        auto cre = linalg::solve_linear(gram, rre);
        auto cim = linalg::solve_linear(gram, rim);
        for (int k = 0; k < ds; ++k)
          x.coeff[k][l].set(p, pq2, cplx(cre[k], cim[k]));
      }
  }
  return x;
}

TensorElement embed_concrete(const MatrixSystem& s, const MatrixSystem& t,
                             const HermMat& u, int level) {
  TensorElement x;
  x.left = s;
  x.right = t;
  x.level = level;
  const int ds = s.dim(), dt = t.dim();
  const int ns = s.n, nt = t.n;
  x.coeff.assign(ds, std::vector<HermMat>(dt, HermMat(level)));
  linalg::RMat gram_s(ds, ds), gram_t(dt, dt);
  for (int i = 0; i < ds; ++i)
    for (int j = 0; j < ds; ++j) gram_s.at(i, j) = inner(s.basis[i], s.basis[j]);
  for (int i = 0; i < dt; ++i)
    for (int j = 0; j < dt; ++j) gram_t.at(i, j) = inner(t.basis[i], t.basis[j]);
  for (int p = 0; p < level; ++p)
    for (int q = p; q < level; ++q) {
      // Raw right inner products per entry of the left ambient block.
      std::vector<CMat> right_raw(dt, CMat(ns, ns));
      for (int l = 0; l < dt; ++l)
        for (int i = 0; i < ns; ++i)
          for (int j = 0; j < ns; ++j) {
            cplx v = 0.0;
            for (int r = 0; r < nt; ++r)
              for (int tt = 0; tt < nt; ++tt)
                v += std::conj(t.basis[l].at(r, tt)) *
                     u.at((p * ns + i) * nt + r, (q * ns + j) * nt + tt);
            right_raw[l].at(i, j) = v;
          }
      for (int i = 0; i < ns; ++i)
        for (int j = 0; j < ns; ++j) {
          std::vector<double> rre(dt), rim(dt);
          for (int l = 0; l < dt; ++l) {
            rre[l] = right_raw[l].at(i, j).real();
            rim[l] = right_raw[l].at(i, j).imag();
          }
          auto cre = linalg::solve_linear(gram_t, rre);
          auto cim = linalg::solve_linear(gram_t, rim);
          for (int l = 0; l < dt; ++l)
            right_raw[l].at(i, j) = cplx(cre[l], cim[l]);
        }
      for (int l = 0; l < dt; ++l) {
        std::vector<double> rre(ds), rim(ds);
        for (int k = 0; k < ds; ++k) {
          cplx v = 0.0;
          for (int i = 0; i < ns; ++i)
            for (int j = 0; j < ns; ++j)
              v += std::conj(s.basis[k].at(i, j)) * right_raw[l].at(i, j);
          rre[k] = v.real();
          rim[k] = v.imag();
        }
        auto cre = linalg::solve_linear(gram_s, rre);
        auto cim = linalg::solve_linear(gram_s, rim);
        for (int k = 0; k < ds; ++k)
          x.coeff[k][l].set(p, q, cplx(cre[k], cim[k]));
      }
    }
  return x;
}

// ---------------------------------------------------------------------------
// Level folding: M_m(S (x) T) = (M_m(S)) (x) T at level 1.
// ---------------------------------------------------------------------------

namespace {

TensorElement fold_left(const TensorElement& x) {
  if (x.level == 1) return x;
  const int m = x.level;
  const int dr = system_dim(x.right);
  TensorElement y;
  y.level = 1;
  y.right = x.right;
  const int nl = system_ambient(x.left);
  if (std::holds_alternative<MatrixSystem>(x.left)) {
    const auto& s = std::get<MatrixSystem>(x.left);
    auto folded = level_system(s, m);
    const int df = folded.dim();
    y.left = folded;
    y.coeff.assign(df, std::vector<HermMat>(dr, HermMat(1)));
    for (int l = 0; l < dr; ++l) {
      HermMat left_part(m * nl);
      for (int k = 0; k < s.dim(); ++k)
        left_part += kron(x.coeff[k][l], s.basis[k]);
      auto c = coefficients(folded, left_part, 1e-6);
      for (int f = 0; f < df; ++f) y.coeff[f][l] = scalar(c[f]);
    }
    return y;
  }
  const auto& q = std::get<QuotientSystem>(x.left);
  auto folded = level_quotient(q, m);
  const int df = folded.dim();
  y.left = folded;
  y.coeff.assign(df, std::vector<HermMat>(dr, HermMat(1)));
  for (int l = 0; l < dr; ++l) {
    HermMat left_part(m * nl);
    for (int k = 0; k < q.dim(); ++k)
      left_part += kron(x.coeff[k][l], q.coset_basis[k]);
    auto c = quotient_coefficients(folded, left_part);
    for (int f = 0; f < df; ++f) y.coeff[f][l] = scalar(c[f]);
  }
  return y;
}

std::vector<std::vector<double>> scalar_coeffs(const TensorElement& x) {
  const int dl = system_dim(x.left), dr = system_dim(x.right);
  std::vector<std::vector<double>> c(dl, std::vector<double>(dr, 0.0));
  for (int k = 0; k < dl; ++k)
    for (int l = 0; l < dr; ++l) c[k][l] = x.coeff[k][l].at(0, 0).real();
  return c;
}

// ---------------------------------------------------------------------------
// Choi machinery
// ---------------------------------------------------------------------------

std::vector<HermMat> ambient_images(const System& target, const RMat& images) {
  const int dt = system_dim(target);
  std::vector<HermMat> out;
  for (int k = 0; k < images.cols(); ++k) {
    HermMat img(system_ambient(target));
    for (int i = 0; i < dt; ++i)
      if (images.at(i, k) != 0.0)
        img += system_basis_rep(target, i) * images.at(i, k);
    out.push_back(img);
  }
  return out;
}

struct ChoiCheckResult {
  bool solved = false;
  double t = 0.0;
  HermMat choi;
  HermMat dual;  // Z >= 0, trace one, blocking matrix when t < 0
};

// max t s.t. C >= tI, <K_c, C> = rhs_c.
ChoiCheckResult choi_feasibility(
    int choi_dim, const std::vector<std::pair<HermMat, double>>& pins) {
  sdp::SdpProblem p;
  p.sense = sdp::Sense::MAX;
  p.blocks.push_back({choi_dim, sdp::BlockKind::PSD});  // Y = C - tI
  p.blocks.push_back({1, sdp::BlockKind::FREE});        // t
  for (const auto& [k, rhs] : pins) {
    sdp::Constraint c;
    c.terms.push_back({0, k});
    const double kt = k.trace();
    if (std::abs(kt) > 1e-14) c.terms.push_back({1, scalar(kt)});
    c.rhs = rhs;
    p.constraints.push_back(std::move(c));
  }
  p.objective = {{1, scalar(1.0)}};
  auto sol = sdp::solve(p);
  ChoiCheckResult out;
  if (sol.status != sdp::SdpStatus::OPTIMAL) return out;
  out.solved = true;
  out.t = sol.primal_obj;
  const double t = sol.X[1].at(0, 0).real();
  out.choi = sol.X[0] + HermMat::identity(choi_dim) * t;
  if (out.t < 0) {
    HermMat z(choi_dim);
    for (size_t c = 0; c < pins.size(); ++c) z += pins[c].first * (-sol.y[c]);
    out.dual = z;
  }
  return out;
}

// Pins <kron(V^T, H), C> = <H, img> over a Hermitian family of the target.
void pin_image(std::vector<std::pair<HermMat, double>>* pins, const HermMat& v,
               const HermMat& img, const std::vector<HermMat>& targets) {
  const HermMat vt = herm_transpose(v);
  for (const auto& h : targets) pins->emplace_back(kron(vt, h), inner(h, img));
}

HermMat choi_apply(const HermMat& choi, const HermMat& v, int k, int nn) {
  CMat out(nn, nn);
  for (int p = 0; p < nn; ++p)
    for (int q = 0; q < nn; ++q) {
      cplx s = 0.0;
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
          s += v.at(i, j) * choi.at(i * nn + p, j * nn + q);
      out.at(p, q) = s;
    }
  return HermMat::hermitian_part(out);
}

// J-annihilation pins for quotient sources: maps from M_n/J are maps from
// M_n killing J.
void pin_source_kernel(std::vector<std::pair<HermMat, double>>* pins,
                       const System& source,
                       const std::vector<HermMat>& target_family) {
  if (!std::holds_alternative<QuotientSystem>(source)) return;
  const auto& q = std::get<QuotientSystem>(source);
  const int nn = target_family.front().dim();
  for (const auto& j : q.null.basis)
    pin_image(pins, j, HermMat(nn), target_family);
}

// ---------------------------------------------------------------------------
// cp_check
// ---------------------------------------------------------------------------

Verdict cp_check_choi(const CpMapCandidate& phi, double tol) {
  const int k = system_ambient(phi.source);
  const auto& target = std::get<MatrixSystem>(phi.target);
  const int nn = target.n;
  const auto tb = herm_basis(nn);
  auto imgs = ambient_images(phi.target, phi.images);
  std::vector<std::pair<HermMat, double>> pins;
  for (int j = 0; j < system_dim(phi.source); ++j)
    pin_image(&pins, system_basis_rep(phi.source, j), imgs[j], tb);
  pin_source_kernel(&pins, phi.source, tb);
  auto res = choi_feasibility(k * nn, pins);
  Verdict v;
  v.route = "cp-choi";
  if (!res.solved) {
    v.status = Membership::UNDECIDED;
    return v;
  }
  v.grounded = true;
  v.value = res.t;
  if (res.t >= -tol) {
    v.status = Membership::MEMBER;
    v.psd_certificate.push_back(res.choi);
  } else {
    v.status = Membership::NON_MEMBER;
    v.density = res.dual;
  }
  return v;
}

// Target abelian: positivity of the diagonal coordinate functionals.
Verdict cp_check_abelian(const CpMapCandidate& phi, double tol) {
  const auto& target = std::get<MatrixSystem>(phi.target);
  auto imgs = ambient_images(phi.target, phi.images);
  Verdict v;
  v.route = "cp-abelian";
  v.grounded = true;
  v.value = 1e300;
  const int ds = system_dim(phi.source);
  for (int l = 0; l < target.n; ++l) {
    if (std::holds_alternative<MatrixSystem>(phi.source)) {
      const auto& src = std::get<MatrixSystem>(phi.source);
      opsys::Functional f;
      for (int j = 0; j < ds; ++j) f.coeffs.push_back(imgs[j].at(l, l).real());
      auto fv = opsys::functional_positive(src, f, tol);
      if (fv.status == Membership::UNDECIDED) {
        v.status = Membership::UNDECIDED;
        return v;
      }
      v.value = std::min(v.value, fv.value);
      if (fv.status == Membership::NON_MEMBER) {
        v.status = Membership::NON_MEMBER;
        v.psd_certificate = fv.psd_certificate;
        return v;
      }
    } else {
      // Quotient source: a functional is positive iff its coset matrix is PSD.
      const auto& src = std::get<QuotientSystem>(phi.source);
      HermMat f(src.n);
      for (int j = 0; j < ds; ++j)
        f += src.coset_basis[j] * imgs[j].at(l, l).real();
      const double lam = linalg::lambda_min(f);
      v.value = std::min(v.value, lam);
      if (lam < -tol) {
        v.status = Membership::NON_MEMBER;
        v.density = f;
        return v;
      }
    }
  }
  v.status = Membership::MEMBER;
  return v;
}

// Quotient target with a full matrix-algebra source: the Choi element
// Sum e_ij (x) phi(e_ij) decides complete positivity exactly, because
// compressions of M_k(Q)+ stay positive for any operator system Q.
Verdict cp_check_full_source_into_quotient(const CpMapCandidate& phi,
                                           const OracleConfig& cfg) {
  const auto& src = std::get<MatrixSystem>(phi.source);
  const auto& target = std::get<QuotientSystem>(phi.target);
  const int k = src.n;
  auto imgs = ambient_images(phi.target, phi.images);
  // phi(e_ij) через the complex-linear extension over the Hermitian basis.
  linalg::RMat gram(src.dim(), src.dim());
  for (int a = 0; a < src.dim(); ++a)
    for (int b = 0; b < src.dim(); ++b)
      gram.at(a, b) = inner(src.basis[a], src.basis[b]);
  QuotientSystem tgt_k = level_quotient(target, k);
  HermMat choi_rep(k * target.n);
  for (int i = 0; i < k; ++i)
    for (int j2 = 0; j2 < k; ++j2) {
      CMat e(k, k);
      e.at(i, j2) = 1.0;
      std::vector<double> rre(src.dim()), rim(src.dim());
      for (int a = 0; a < src.dim(); ++a) {
        cplx ip = 0.0;
        for (int r = 0; r < k; ++r)
          for (int c = 0; c < k; ++c)
            ip += std::conj(src.basis[a].at(r, c)) * e.at(r, c);
        rre[a] = ip.real();
        rim[a] = ip.imag();
      }
      auto cre = linalg::solve_linear(gram, rre);
      auto cim = linalg::solve_linear(gram, rim);
      CMat img(target.n, target.n);
      for (int a = 0; a < src.dim(); ++a)
        img += imgs[a].mat() * cplx(cre[a], cim[a]);
      // The full sum is Hermitian, so termwise Hermitian parts add up to it.
      choi_rep += HermMat::hermitian_part(kron(e, img));
    }
  opsys::LevelElement folded;
  folded.level = 1;
  for (double c : quotient_coefficients(tgt_k, choi_rep))
    folded.coeff.push_back(scalar(c));
  Verdict lv = opsys::level_positive(System(tgt_k), folded, cfg.tol);
  Verdict v;
  v.route = "cp-choi-quotient";
  v.grounded = lv.grounded;
  v.status = lv.status;
  v.value = lv.value;
  v.density = lv.density;
  v.psd_certificate = lv.psd_certificate;
  return v;
}

// Quotient target: level-truncated necessary checks plus counterexample
// search. Only refutations are exact here.
Verdict cp_check_into_quotient(const CpMapCandidate& phi,
                               const OracleConfig& cfg) {
  const auto& target = std::get<QuotientSystem>(phi.target);
  Verdict v;
  v.route = "cp-truncated";
  double min_margin = 1e300;
  Rng rng(cfg.seed ^ 0xc95ULL);
  for (int m = 1; m <= cfg.level_cap; ++m) {
    QuotientSystem tgt_m = m == 1 ? target : level_quotient(target, m);
    for (int s = 0; s < cfg.samples; ++s) {
      auto e = opsys::random_level_element(phi.source, m, rng);
      HermMat rep = opsys::level_representative(phi.source, e);
      const double lam = linalg::lambda_min(rep);
      const double shift = (lam < 0 ? -lam : 0.0) + rng.uniform(0.05, 0.5);
      // Unit coset representative is basis[unit] * unit_scale, so adding
      // shift * unit needs the coefficient scaled UP by unit_scale.
      e.coeff[system_unit_index(phi.source)] +=
          HermMat::identity(m) * (shift * system_unit_scale(phi.source));
      opsys::LevelElement img;
      img.level = m;
      for (int i = 0; i < system_dim(phi.target); ++i) {
        HermMat c(m);
        for (int j = 0; j < system_dim(phi.source); ++j)
          if (phi.images.at(i, j) != 0.0) c += e.coeff[j] * phi.images.at(i, j);
        img.coeff.push_back(c);
      }
      Verdict lv;
      if (m == 1) {
        lv = opsys::level_positive(System(target), img, cfg.tol);
      } else {
        HermMat rep_t(m * target.n);
        for (int i = 0; i < system_dim(phi.target); ++i)
          rep_t += kron(img.coeff[i], target.coset_basis[i]);
        opsys::LevelElement folded;
        folded.level = 1;
        for (double c : quotient_coefficients(tgt_m, rep_t))
          folded.coeff.push_back(scalar(c));
        lv = opsys::level_positive(System(tgt_m), folded, cfg.tol);
      }
      if (lv.status == Membership::NON_MEMBER) {
        v.status = Membership::NON_MEMBER;
        v.grounded = true;  // the counterexample is exact
        v.value = lv.value;
        v.density = lv.density;
        return v;
      }
      if (lv.status == Membership::MEMBER)
        min_margin = std::min(min_margin, lv.value);
    }
  }
  v.status = Membership::MEMBER;
  v.grounded = false;
  v.value = min_margin == 1e300 ? 0.0 : min_margin;
  return v;
}

}  // namespace

Verdict cp_check(const CpMapCandidate& phi, const OracleConfig& cfg) {
  if (std::holds_alternative<MatrixSystem>(phi.target)) {
    const auto& t = std::get<MatrixSystem>(phi.target);
    if (t.abelian && !cfg.force_choi) return cp_check_abelian(phi, cfg.tol);
    return cp_check_choi(phi, cfg.tol);
  }
  if (std::holds_alternative<MatrixSystem>(phi.source)) {
    const auto& s = std::get<MatrixSystem>(phi.source);
    if (s.dim() == s.n * s.n)
      return cp_check_full_source_into_quotient(phi, cfg);
  }
  return cp_check_into_quotient(phi, cfg);
}

// ---------------------------------------------------------------------------
// min_member
// ---------------------------------------------------------------------------

namespace {

void attach_functional_table(Verdict* v,
                             const std::vector<std::vector<double>>& table) {
  v->functional.clear();
  for (const auto& row : table)
    for (double x : row) v->functional.push_back(x);
}

Verdict min_matrix_matrix(const TensorElement& x, double tol) {
  const HermMat rep = tensor_representative(x);
  Verdict v;
  v.route = "min-spatial";
  v.grounded = true;
  const auto eig = eig_herm(rep);
  v.value = eig.values.front();
  v.status = v.value >= -tol ? Membership::MEMBER : Membership::NON_MEMBER;
  if (v.status == Membership::NON_MEMBER) {
    CMat vec(rep.dim(), 1);
    for (int i = 0; i < rep.dim(); ++i) vec.at(i, 0) = eig.vectors.at(i, 0);
    const HermMat dens = HermMat::hermitian_part(vec * vec.adjoint());
    v.density = dens;
    const int dl = system_dim(x.left), dr = system_dim(x.right);
    std::vector<std::vector<double>> table(dl, std::vector<double>(dr));
    for (int k = 0; k < dl; ++k)
      for (int l = 0; l < dr; ++l)
        table[k][l] = inner(dens, kron(system_basis_rep(x.left, k),
                                       system_basis_rep(x.right, l)));
    attach_functional_table(&v, table);
  }
  return v;
}

// One quotient factor: x is min-positive iff the associated map
// R = dual_of_quotient(Q) -> M_m(S) is cp.
Verdict min_via_dual(const TensorElement& x0, const OracleConfig& cfg) {
  TensorElement x = fold_left(x0);
  const bool flipped = std::holds_alternative<QuotientSystem>(x.left);
  if (flipped) x = flip(x);
  const auto& q = std::get<QuotientSystem>(x.right);
  auto dual = dual_of_quotient(q);
  const auto& r = dual.system;
  const auto& target = std::get<MatrixSystem>(x.left);
  const auto c = scalar_coeffs(x);
  const int dl = target.dim(), dr = system_dim(x.right);

  // phi_x(Y) = sum_{k,l} <D_l + J, Y> c_kl B_k.
  std::vector<std::vector<double>> pair_table(r.dim(), std::vector<double>(dr));
  for (int j = 0; j < r.dim(); ++j)
    for (int l = 0; l < dr; ++l)
      pair_table[j][l] = dual.pairing.pair(q.coset_basis[l], r.basis[j]);
  RMat images(dl, r.dim());
  for (int j = 0; j < r.dim(); ++j)
    for (int k = 0; k < dl; ++k) {
      double s = 0.0;
      for (int l = 0; l < dr; ++l) s += c[k][l] * pair_table[j][l];
      images.at(k, j) = s;
    }

  CpMapCandidate phi{System(r), System(target), images};
  Verdict inner_v = cp_check_choi(phi, cfg.tol);
  Verdict v;
  v.route = "min-dual-cp";
  v.grounded = inner_v.grounded;
  v.value = inner_v.value;
  v.status = inner_v.status;
  if (v.status == Membership::NON_MEMBER && inner_v.density) {
    // Convert the Choi-space blocking matrix W into a separating functional:
    // f(B_k (x) D_l) = <W, M_l (x) B_k> with M_l the pairing matrix of the
    // canonical linear extension through the HS projection onto span(R).
    const HermMat& w = *inner_v.density;
    const int nr = r.n;
    std::vector<std::vector<double>> table(dl, std::vector<double>(dr));
    std::vector<CMat> proj_units(nr * nr, CMat(nr, nr));
    for (int i = 0; i < nr; ++i)
      for (int j2 = 0; j2 < nr; ++j2) {
        CMat e(nr, nr);
        e.at(i, j2) = 1.0;
        CMat p(nr, nr);
        for (const auto& b : r.onb) {
          cplx ip = 0.0;
          for (int a = 0; a < nr; ++a)
            for (int bb = 0; bb < nr; ++bb)
              ip += std::conj(b.at(a, bb)) * e.at(a, bb);
          p += b.mat() * ip;
        }
        proj_units[i * nr + j2] = p;
      }
    for (int l = 0; l < dr; ++l) {
      CMat ml(nr, nr);
      for (int i = 0; i < nr; ++i)
        for (int j2 = 0; j2 < nr; ++j2) {
          const CMat& pe = proj_units[i * nr + j2];
          const HermMat re = HermMat::hermitian_part(pe);
          const HermMat im = HermMat::hermitian_part(pe * cplx(0.0, -1.0));
          ml.at(i, j2) = cplx(dual.pairing.pair(q.coset_basis[l], re),
                              dual.pairing.pair(q.coset_basis[l], im));
        }
      for (int k = 0; k < dl; ++k) {
        const CMat contrib = kron(ml, target.basis[k].mat());
        cplx s = 0.0;
        for (int a = 0; a < w.dim(); ++a)
          for (int b = 0; b < w.dim(); ++b)
            s += std::conj(w.at(a, b)) * contrib.at(a, b);
        table[k][l] = s.real();
      }
    }
    v.density = w;
    if (flipped) {
      std::vector<std::vector<double>> t2(dr, std::vector<double>(dl));
      for (int k = 0; k < dl; ++k)
        for (int l = 0; l < dr; ++l) t2[l][k] = table[k][l];
      attach_functional_table(&v, t2);
    } else {
      attach_functional_table(&v, table);
    }
  }
  return v;
}

Verdict min_both_quotients(const TensorElement& x0, const OracleConfig& cfg) {
  TensorElement x = fold_left(x0);
  Verdict v;
  v.route = "min-sampled-ucp";
  Rng rng(cfg.seed ^ 0x313371ULL);
  const int nl = system_ambient(x.left), nr = system_ambient(x.right);
  double bound = 1e300;
  for (int s = 0; s < cfg.samples; ++s) {
    const int p = 1 + static_cast<int>(rng.below(std::min(nl, 3)));
    const int q = 1 + static_cast<int>(rng.below(std::min(nr, 3)));
    auto phi = sample_ucp(x.left, p, rng);
    auto psi = sample_ucp(x.right, q, rng);
    if (phi.empty() || psi.empty()) continue;
    const HermMat img = apply_ucp_pair(x, phi, psi);
    const auto eig = eig_herm(img);
    bound = std::min(bound, eig.values.front());
    if (eig.values.front() < -cfg.tol) {
      v.status = Membership::NON_MEMBER;
      v.grounded = true;  // a ucp compression refutation is exact
      v.value = eig.values.front();
      CMat vec(img.dim(), 1);
      for (int i = 0; i < img.dim(); ++i) vec.at(i, 0) = eig.vectors.at(i, 0);
      const HermMat dens = HermMat::hermitian_part(vec * vec.adjoint());
      v.density = dens;
      const int dl = system_dim(x.left), dr = system_dim(x.right);
      std::vector<std::vector<double>> table(dl, std::vector<double>(dr));
      for (int k = 0; k < dl; ++k)
        for (int l = 0; l < dr; ++l)
          table[k][l] = inner(dens, kron(phi[k], psi[l]));
      attach_functional_table(&v, table);
      return v;
    }
  }
  v.status = Membership::MEMBER;
  v.grounded = false;
  v.value = bound == 1e300 ? 0.0 : bound;
  return v;
}

}  // namespace

Verdict min_member(const TensorElement& x, const OracleConfig& cfg) {
  const bool lq = std::holds_alternative<QuotientSystem>(x.left);
  const bool rq = std::holds_alternative<QuotientSystem>(x.right);
  if (!lq && !rq)
    return min_matrix_matrix(x.level == 1 ? x : fold_left(x), cfg.tol);
  if (lq && rq) return min_both_quotients(x, cfg);
  return min_via_dual(x, cfg);
}

// ---------------------------------------------------------------------------
// max_member
// ---------------------------------------------------------------------------

namespace {

// Route (a): dual-cone SDP over cp maps into the quotient's dual. Grounded;
// quotient left factors are handled via J-annihilation of the Choi map.
Verdict max_dual_route(const TensorElement& x, const OracleConfig& cfg) {
  const auto& q = std::get<QuotientSystem>(x.right);
  auto dual = dual_of_quotient(q);
  const auto& r = dual.system;
  const int ka = system_ambient(x.left);
  const int nb = q.n;
  const auto c = scalar_coeffs(x);
  const int dl = system_dim(x.left), dr = system_dim(x.right);

  // T(D) with <T(D), Y> = <D + J, Y>: T(D) = W^{1/2} D^T W^{1/2} / n.
  const CMat& wh = dual.pairing.w_half.mat();
  auto tmat = [&](const HermMat& d) {
    return HermMat::hermitian_part(wh * d.mat().transpose() * wh) *
           (1.0 / nb);
  };
  std::vector<HermMat> tmats;
  for (int l = 0; l < dr; ++l) tmats.push_back(tmat(q.coset_basis[l]));
  const HermMat t_unit = tmat(HermMat::identity(nb));

  sdp::SdpProblem p;
  p.sense = sdp::Sense::MIN;
  p.blocks.push_back({ka * nb, sdp::BlockKind::PSD});  // Choi of Phi
  const auto perp = span_complement(nb, r.onb);
  for (int j = 0; j < dl; ++j) {
    const HermMat vt = herm_transpose(system_basis_rep(x.left, j));
    for (const auto& g : perp) p.constraints.push_back({{{0, kron(vt, g)}}, 0.0});
  }
  if (std::holds_alternative<QuotientSystem>(x.left)) {
    const auto& ql = std::get<QuotientSystem>(x.left);
    const auto hb = herm_basis(nb);
    for (const auto& jb : ql.null.basis) {
      const HermMat jt = herm_transpose(jb);
      for (const auto& h : hb) p.constraints.push_back({{{0, kron(jt, h)}}, 0.0});
    }
  }
  p.constraints.push_back({{{0, kron(HermMat::identity(ka), t_unit)}}, 1.0});
  HermMat obj(ka * nb);
  for (int k = 0; k < dl; ++k) {
    const HermMat vt = herm_transpose(system_basis_rep(x.left, k));
    for (int l = 0; l < dr; ++l)
      if (c[k][l] != 0.0) obj += kron(vt, tmats[l]) * c[k][l];
  }
  p.objective = {{0, obj}};

  auto sol = sdp::solve(p);
  Verdict v;
  v.route = "max-dual";
  if (sol.status != sdp::SdpStatus::OPTIMAL) {
    v.status = Membership::UNDECIDED;
    v.value = sol.primal_obj;
    return v;
  }
  v.grounded = true;
  v.value = sol.primal_obj;
  if (v.value >= -cfg.tol) {
    v.status = Membership::MEMBER;
    return v;
  }
  v.status = Membership::NON_MEMBER;
  v.density = sol.X[0];  // Choi of the separating cp map
  std::vector<std::vector<double>> table(dl, std::vector<double>(dr));
  for (int k = 0; k < dl; ++k) {
    const HermMat vt = herm_transpose(system_basis_rep(x.left, k));
    for (int l = 0; l < dr; ++l) table[k][l] = inner(kron(vt, tmats[l]), sol.X[0]);
  }
  attach_functional_table(&v, table);
  return v;
}

// Product-cone layer for an abelian right factor with exact ray data:
// min f(x) over functionals nonnegative on A+ (x) every extreme ray.
Verdict max_products_route(const TensorElement& x, const OracleConfig& cfg) {
  const auto& b = std::get<MatrixSystem>(x.right);
  const auto& a = std::get<MatrixSystem>(x.left);
  Verdict v;
  v.route = "max-products";
  poly::RatMat rows;
  for (const auto& w : *b.weights) rows.push_back(poly::from_integers(w));
  auto rays_q = poly::extreme_rays(rows, b.n);
  const int nrays = static_cast<int>(rays_q.size());
  std::vector<std::vector<double>> rays;
  for (const auto& r : rays_q) rays.push_back(poly::to_double(r));

  const int dr = system_dim(x.right), dl = system_dim(x.left);
  linalg::RMat rg(nrays, nrays);
  for (int i = 0; i < nrays; ++i)
    for (int j = 0; j < nrays; ++j) {
      double s = 0.0;
      for (int t = 0; t < b.n; ++t) s += rays[i][t] * rays[j][t];
      rg.at(i, j) = s;
    }
  for (int i = 0; i < nrays; ++i) rg.at(i, i) += 1e-12;
  auto ray_coords = [&](const HermMat& diag_elem) {
    std::vector<double> rhs(nrays, 0.0);
    for (int i = 0; i < nrays; ++i)
      for (int t = 0; t < b.n; ++t)
        rhs[i] += rays[i][t] * diag_elem.at(t, t).real();
    return linalg::solve_linear(rg, rhs);
  };
  std::vector<std::vector<double>> basis_nu;
  for (int l = 0; l < dr; ++l) basis_nu.push_back(ray_coords(b.basis[l]));

  sdp::SdpProblem p;
  p.sense = sdp::Sense::MIN;
  for (int i = 0; i < nrays; ++i)
    p.blocks.push_back({a.n, sdp::BlockKind::PSD});  // density per ray
  {
    poly::RatMat ray_rows(b.n, poly::RatVec(nrays, poly::Rat(0)));
    for (int i = 0; i < nrays; ++i)
      for (int t = 0; t < b.n; ++t) ray_rows[t][i] = rays_q[i][t];
    auto rels = poly::kernel_basis(ray_rows, nrays);
    for (const auto& rel : rels) {
      for (const auto& onb : a.onb) {
        sdp::Constraint con;
        for (int i = 0; i < nrays; ++i) {
          const double g = rel[i].get_d();
          if (g != 0.0) con.terms.push_back({i, onb * g});
        }
        con.rhs = 0.0;
        if (!con.terms.empty()) p.constraints.push_back(std::move(con));
      }
    }
  }
  {
    auto mu = ray_coords(HermMat::identity(b.n));
    sdp::Constraint con;
    for (int i = 0; i < nrays; ++i)
      if (std::abs(mu[i]) > 1e-12)
        con.terms.push_back({i, HermMat::identity(a.n) * mu[i]});
    con.rhs = 1.0;
    p.constraints.push_back(std::move(con));
  }
  const auto c = scalar_coeffs(x);
  std::vector<HermMat> left_parts(dr, HermMat(a.n));
  for (int l = 0; l < dr; ++l)
    for (int k = 0; k < dl; ++k)
      if (c[k][l] != 0.0) left_parts[l] += a.basis[k] * c[k][l];
  std::vector<HermMat> obj(nrays, HermMat(a.n));
  for (int l = 0; l < dr; ++l)
    for (int i = 0; i < nrays; ++i)
      if (std::abs(basis_nu[l][i]) > 1e-12)
        obj[i] += left_parts[l] * basis_nu[l][i];
  for (int i = 0; i < nrays; ++i)
    if (obj[i].frob_norm() > 0) p.objective.push_back({i, obj[i]});

  auto sol = sdp::solve(p);
  if (sol.status != sdp::SdpStatus::OPTIMAL) {
    v.status = Membership::UNDECIDED;
    return v;
  }
  v.value = sol.primal_obj;
  if (v.value >= -cfg.tol) {
    // x lies in the closed product cone, hence in the max cone.
    v.status = Membership::MEMBER;
    v.grounded = true;
    return v;
  }
  // The optimizer separates x from the product cone only; that does not
  // decide max membership. Report the gap functional.
  v.status = Membership::UNDECIDED;
  v.grounded = false;
  std::vector<std::vector<double>> table(dl, std::vector<double>(dr));
  for (int k = 0; k < dl; ++k)
    for (int l = 0; l < dr; ++l) {
      double s = 0.0;
      for (int i = 0; i < nrays; ++i)
        if (std::abs(basis_nu[l][i]) > 1e-12)
          s += basis_nu[l][i] * inner(sol.X[i], a.basis[k]);
      table[k][l] = s;
    }
  attach_functional_table(&v, table);
  return v;
}

// Sampled separable-decomposition attempt for non-abelian matrix pairs.
Verdict max_decomposition_route(const TensorElement& x,
                                const OracleConfig& cfg) {
  const auto& a = std::get<MatrixSystem>(x.left);
  const auto& b = std::get<MatrixSystem>(x.right);
  Verdict v;
  v.route = "max-decomposition";
  Rng rng(cfg.seed ^ 0xdec03ULL);
  const int terms = std::min(cfg.samples, 2 * b.dim() * b.dim());
  std::vector<HermMat> tsamples;
  for (int t = 0; t < terms; ++t) {
    auto e = opsys::random_level_element(System(b), 1, rng);
    HermMat rep(b.n);
    for (int k = 0; k < b.dim(); ++k)
      rep += b.basis[k] * e.coeff[k].at(0, 0).real();
    const double lam = linalg::lambda_min(rep);
    tsamples.push_back(rep + HermMat::identity(b.n) *
                                 ((lam < 0 ? -lam : 0.0) +
                                  rng.uniform(0.02, 0.3)));
  }
  tsamples.push_back(HermMat::identity(b.n));

  sdp::SdpProblem p;
  p.sense = sdp::Sense::MIN;
  const int ns = static_cast<int>(tsamples.size());
  for (int i = 0; i < ns; ++i) p.blocks.push_back({a.n, sdp::BlockKind::PSD});
  HermMat target_rep = tensor_representative(x);
  target_rep += kron(HermMat::identity(a.n), HermMat::identity(b.n)) * cfg.tol;
  const auto hb_b = herm_basis(b.n);
  const auto perp_a = span_complement(a.n, a.onb);
  for (int i = 0; i < ns; ++i)
    for (const auto& g : perp_a) p.constraints.push_back({{{i, g}}, 0.0});
  for (const auto& ga : a.onb) {
    for (const auto& gb : hb_b) {
      sdp::Constraint con;
      for (int i = 0; i < ns; ++i) {
        const double w = inner(gb, tsamples[i]);
        if (std::abs(w) > 1e-12) con.terms.push_back({i, ga * w});
      }
      con.rhs = inner(kron(ga, gb), target_rep);
      if (!con.terms.empty() || std::abs(con.rhs) > 1e-12)
        p.constraints.push_back(std::move(con));
    }
  }
  for (int i = 0; i < ns; ++i)
    p.objective.push_back({i, HermMat::identity(a.n)});
  auto sol = sdp::solve(p);
  if (sol.status == sdp::SdpStatus::OPTIMAL) {
    v.status = Membership::MEMBER;
    v.grounded = true;
    v.value = 0.0;
    for (int i = 0; i < ns; ++i) v.psd_certificate.push_back(sol.X[i]);
    return v;
  }
  v.status = Membership::UNDECIDED;
  v.grounded = false;
  return v;
}

}  // namespace

Verdict max_member(const TensorElement& x0, const OracleConfig& cfg) {
  TensorElement x = fold_left(x0);
  const bool lq = std::holds_alternative<QuotientSystem>(x.left);
  const bool rq = std::holds_alternative<QuotientSystem>(x.right);
  if (lq && !rq) {
    TensorElement xf = flip(x);
    Verdict v = max_dual_route(xf, cfg);
    if (!v.functional.empty()) {
      const int dl = system_dim(xf.left), dr = system_dim(xf.right);
      std::vector<double> t(v.functional.size());
      for (int k = 0; k < dl; ++k)
        for (int l = 0; l < dr; ++l) t[l * dl + k] = v.functional[k * dr + l];
      v.functional = std::move(t);
    }
    return v;
  }
  if (rq) return max_dual_route(x, cfg);

  // matrix (x) matrix sandwich.
  Verdict mn = min_member(x, cfg);
  if (mn.status == Membership::NON_MEMBER) {
    Verdict v = mn;
    v.route = "max-via-min";
    v.grounded = true;  // the max cone sits inside the min cone
    return v;
  }
  const auto& a = std::get<MatrixSystem>(x.left);
  const auto& b = std::get<MatrixSystem>(x.right);
  if (b.abelian && b.weights && b.n <= poly::kExactDimCap)
    return max_products_route(x, cfg);
  if (a.abelian && a.weights && a.n <= poly::kExactDimCap) {
    Verdict v = max_products_route(flip(x), cfg);
    if (!v.functional.empty()) {
      const int dl = system_dim(x.left), dr = system_dim(x.right);
      std::vector<double> t(v.functional.size());
      for (int l = 0; l < dr; ++l)
        for (int k = 0; k < dl; ++k) t[k * dr + l] = v.functional[l * dl + k];
      v.functional = std::move(t);
    }
    return v;
  }
  return max_decomposition_route(x, cfg);
}

// ---------------------------------------------------------------------------
// ucp extension / positive lift
// ---------------------------------------------------------------------------

Verdict ucp_extension_exists(const MatrixSystem& s1, const MatrixSystem& s2,
                             const RMat& phi_images, const MatrixSystem& r,
                             const OracleConfig& cfg) {
  if (s1.n != s2.n)
    throw Error("MALFORMED_INPUT", "S1 and S2 must share an ambient algebra");
  for (const auto& bb : s1.basis)
    if (!opsys::in_span(s2, bb, 1e-6))
      throw Error("MALFORMED_INPUT", "S1 is not a subsystem of S2");
  {
    CpMapCandidate pre{System(s1), System(r), phi_images};
    auto ok = cp_check(pre, cfg);
    if (ok.status != Membership::MEMBER)
      throw Error("MALFORMED_INPUT", "the map to extend is not ucp");
  }
  const int k = s1.n;
  const int nn = r.n;
  const auto tb = herm_basis(nn);
  auto imgs = ambient_images(System(r), phi_images);
  std::vector<std::pair<HermMat, double>> pins;
  for (int j = 0; j < s1.dim(); ++j) pin_image(&pins, s1.basis[j], imgs[j], tb);
  const auto perp = span_complement(nn, r.onb);
  for (int j = 0; j < s2.dim(); ++j) {
    const HermMat vt = herm_transpose(s2.basis[j]);
    for (const auto& g : perp) pins.emplace_back(kron(vt, g), 0.0);
  }
  auto res = choi_feasibility(k * nn, pins);
  Verdict v;
  v.route = "ucp-extension";
  if (!res.solved) {
    v.status = Membership::UNDECIDED;
    return v;
  }
  v.grounded = true;
  v.value = res.t;
  if (res.t >= -cfg.tol) {
    v.status = Membership::MEMBER;
    v.psd_certificate.push_back(res.choi);
    for (int j = 0; j < s2.dim(); ++j)
      v.psd_certificate.push_back(choi_apply(res.choi, s2.basis[j], k, nn));
    return v;
  }
  v.status = Membership::NON_MEMBER;
  v.density = res.dual;
  return v;
}

Verdict positive_lift_exists(const MatrixSystem& s, const QuotientSystem& q,
                             const TensorElement& x, double eps,
                             const OracleConfig& cfg) {
  const int ns = s.n, nq = q.n;
  const auto c = scalar_coeffs(x);
  HermMat rep(ns * nq);
  for (int k = 0; k < s.dim(); ++k)
    for (int l = 0; l < q.dim(); ++l)
      if (c[k][l] != 0.0) rep += kron(s.basis[k], q.coset_basis[l]) * c[k][l];
  rep += kron(HermMat::identity(ns), HermMat::identity(nq)) * eps;

  // max t: rep + sum d (B_k (x) J_l) >= t I; the lift stays inside
  // span(S) (x) M_n by construction.
  sdp::SdpProblem p;
  p.sense = sdp::Sense::MAX;
  p.blocks.push_back({ns * nq, sdp::BlockKind::PSD});
  std::vector<HermMat> dirs;
  for (const auto& bb : s.onb)
    for (const auto& j : q.null.basis) dirs.push_back(kron(bb, j));
  const int kd = static_cast<int>(dirs.size());
  for (int l = 0; l < kd; ++l) p.blocks.push_back({1, sdp::BlockKind::FREE});
  p.blocks.push_back({1, sdp::BlockKind::FREE});  // t
  const auto hb = herm_basis(ns * nq);
  for (const auto& h : hb) {
    sdp::Constraint con;
    con.terms.push_back({0, h});
    for (int l = 0; l < kd; ++l) {
      const double g = inner(h, dirs[l]);
      if (std::abs(g) > 1e-14) con.terms.push_back({1 + l, scalar(-g)});
    }
    const double ht = h.trace();
    if (std::abs(ht) > 1e-14) con.terms.push_back({1 + kd, scalar(ht)});
    con.rhs = inner(h, rep);
    p.constraints.push_back(std::move(con));
  }
  p.objective = {{1 + kd, scalar(1.0)}};
  auto sol = sdp::solve(p);
  Verdict v;
  v.route = "positive-lift";
  if (sol.status != sdp::SdpStatus::OPTIMAL) {
    v.status = Membership::UNDECIDED;
    v.value = sol.primal_obj;
    return v;
  }
  v.grounded = true;
  v.value = sol.primal_obj;
  if (v.value >= -cfg.tol) {
    v.status = Membership::MEMBER;
    HermMat lift = rep;
    for (int l = 0; l < kd; ++l) lift += dirs[l] * sol.X[1 + l].at(0, 0).real();
    v.psd_certificate.push_back(lift);
  } else {
    v.status = Membership::NON_MEMBER;
    HermMat z(ns * nq);
    for (size_t a2 = 0; a2 < hb.size(); ++a2) z += hb[a2] * (-sol.y[a2]);
    v.density = z;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

namespace {

std::vector<HermMat> random_level_positive(const System& s, int p, Rng& rng) {
  auto e = opsys::random_level_element(s, p, rng);
  HermMat rep = opsys::level_representative(s, e);
  const double lam = linalg::lambda_min(rep);
  const double shift = (lam < 0 ? -lam : 0.0) + rng.uniform(0.05, 0.6);
  e.coeff[system_unit_index(s)] +=
      HermMat::identity(p) * (shift * system_unit_scale(s));
  return e.coeff;
}

}  // namespace

std::vector<TensorElement> sample_max_generators(const System& left,
                                                 const System& right, int count,
                                                 std::uint64_t seed,
                                                 int pq_cap) {
  Rng rng(seed ^ 0x6e65724747ULL);
  std::vector<TensorElement> out;
  const int dl = system_dim(left), dr = system_dim(right);
  for (int t = 0; t < count; ++t) {
    const int p = 1 + static_cast<int>(rng.below(pq_cap));
    const int q = 1 + static_cast<int>(rng.below(pq_cap));
    auto pc = random_level_positive(left, p, rng);
    auto qc = random_level_positive(right, q, rng);
    std::vector<cplx> xv(p * q);
    for (auto& z : xv) z = cplx(rng.normal(), rng.normal());
    TensorElement e;
    e.left = left;
    e.right = right;
    e.level = 1;
    e.coeff.assign(dl, std::vector<HermMat>(dr, HermMat(1)));
    for (int k = 0; k < dl; ++k)
      for (int l = 0; l < dr; ++l) {
        cplx s = 0.0;
        for (int i = 0; i < p; ++i)
          for (int j = 0; j < p; ++j)
            for (int a = 0; a < q; ++a)
              for (int b = 0; b < q; ++b)
                s += std::conj(xv[i * q + a]) * pc[k].at(i, j) *
                     qc[l].at(a, b) * xv[j * q + b];
        e.coeff[k][l] = scalar(s.real());
      }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<HermMat> sample_ucp(const System& source, int p, Rng& rng) {
  const int k = system_ambient(source);
  const auto tb = herm_basis(p);
  std::vector<std::pair<HermMat, double>> pins;
  pin_image(&pins, HermMat::identity(k), HermMat::identity(p), tb);
  pin_source_kernel(&pins, source, tb);

  sdp::SdpProblem prob;
  prob.sense = sdp::Sense::MAX;
  prob.blocks.push_back({k * p, sdp::BlockKind::PSD});
  for (const auto& [km, rhs] : pins) prob.constraints.push_back({{{0, km}}, rhs});
  CMat g(k * p, k * p);
  for (int i = 0; i < k * p; ++i)
    for (int j = 0; j < k * p; ++j) g.at(i, j) = cplx(rng.normal(), rng.normal());
  prob.objective = {{0, HermMat::hermitian_part(g)}};
  auto sol = sdp::solve(prob);
  if (sol.status != sdp::SdpStatus::OPTIMAL) return {};
  std::vector<HermMat> images;
  const int d = system_dim(source);
  for (int j = 0; j < d; ++j)
    images.push_back(choi_apply(sol.X[0], system_basis_rep(source, j), k, p));
  return images;
}

HermMat apply_choi(const HermMat& choi, const HermMat& v, int k, int nn) {
  return choi_apply(choi, v, k, nn);
}

RMat sample_ucp_into(const System& source, const MatrixSystem& r, Rng& rng) {
  const int k = system_ambient(source);
  const int nn = r.n;
  const auto tb = herm_basis(nn);
  std::vector<std::pair<HermMat, double>> pins;
  pin_image(&pins, HermMat::identity(k), HermMat::identity(nn), tb);
  pin_source_kernel(&pins, source, tb);
  const auto perp = span_complement(nn, r.onb);
  for (int j = 0; j < system_dim(source); ++j) {
    const HermMat vt = herm_transpose(system_basis_rep(source, j));
    for (const auto& g : perp) pins.emplace_back(kron(vt, g), 0.0);
  }
  sdp::SdpProblem prob;
  prob.sense = sdp::Sense::MAX;
  prob.blocks.push_back({k * nn, sdp::BlockKind::PSD});
  for (const auto& [km, rhs] : pins) prob.constraints.push_back({{{0, km}}, rhs});
  CMat g(k * nn, k * nn);
  for (int i = 0; i < k * nn; ++i)
    for (int j = 0; j < k * nn; ++j)
      g.at(i, j) = cplx(rng.normal(), rng.normal());
  prob.objective = {{0, HermMat::hermitian_part(g)}};
  auto sol = sdp::solve(prob);
  if (sol.status != sdp::SdpStatus::OPTIMAL) return RMat();
  const int d = system_dim(source);
  RMat images(r.dim(), d);
  for (int j = 0; j < d; ++j) {
    const HermMat img = choi_apply(sol.X[0], system_basis_rep(source, j), k, nn);
    auto c = coefficients(r, img, 1e-5);
    for (int i = 0; i < r.dim(); ++i) images.at(i, j) = c[i];
  }
  return images;
}

std::vector<std::pair<HermMat, double>> extension_pins(
    const MatrixSystem& s1, const MatrixSystem& s2, const RMat& phi_images,
    const MatrixSystem& r) {
  const int nn = r.n;
  const auto tb = herm_basis(nn);
  auto imgs = ambient_images(System(r), phi_images);
  std::vector<std::pair<HermMat, double>> pins;
  for (int j = 0; j < s1.dim(); ++j) pin_image(&pins, s1.basis[j], imgs[j], tb);
  const auto perp = span_complement(nn, r.onb);
  for (int j = 0; j < s2.dim(); ++j) {
    const HermMat vt = herm_transpose(s2.basis[j]);
    for (const auto& g : perp) pins.emplace_back(kron(vt, g), 0.0);
  }
  return pins;
}

HermMat apply_ucp_pair(const TensorElement& x, const std::vector<HermMat>& phi,
                       const std::vector<HermMat>& psi) {
  const int dl = system_dim(x.left), dr = system_dim(x.right);
  HermMat out(x.level * phi[0].dim() * psi[0].dim());
  for (int k = 0; k < dl; ++k)
    for (int l = 0; l < dr; ++l) {
      if (x.coeff[k][l].frob_norm() == 0.0) continue;
      out += kron(x.coeff[k][l], kron(phi[k], psi[l]));
    }
  return out;
}

// ---------------------------------------------------------------------------
// Certificate re-verification
// ---------------------------------------------------------------------------

double separating_value(const Verdict& v, const TensorElement& y0) {
  TensorElement y = fold_left(y0);
  const int dl = system_dim(y.left), dr = system_dim(y.right);
  if (static_cast<int>(v.functional.size()) != dl * dr)
    throw Error("MALFORMED_INPUT", "functional table does not match the pair");
  const auto c = scalar_coeffs(y);
  double s = 0.0;
  for (int k = 0; k < dl; ++k)
    for (int l = 0; l < dr; ++l) s += c[k][l] * v.functional[k * dr + l];
  return s;
}

bool recheck_separation(const TensorElement& x, const Verdict& v, bool max_cone,
                        int count, std::uint64_t seed, double tol) {
  if (v.functional.empty()) return false;
  if (separating_value(v, x) >= -tol) return false;
  double scale = 0.0;
  for (double f : v.functional) scale = std::max(scale, std::abs(f));
  Rng rng(seed ^ 0x5eececULL);
  auto gens = sample_max_generators(x.left, x.right, count, rng.next_u64());
  for (const auto& g : gens)
    if (separating_value(v, g) < -10 * tol * (1.0 + scale)) return false;
  if (!max_cone) {
    // Plain positive products, members of the min cone as well.
    for (int t = 0; t < count; ++t) {
      auto a = random_level_positive(x.left, 1, rng);
      auto b = random_level_positive(x.right, 1, rng);
      TensorElement prod;
      prod.left = x.left;
      prod.right = x.right;
      prod.level = 1;
      const int dl = system_dim(x.left), dr = system_dim(x.right);
      prod.coeff.assign(dl, std::vector<HermMat>(dr, HermMat(1)));
      for (int k = 0; k < dl; ++k)
        for (int l = 0; l < dr; ++l)
          prod.coeff[k][l] = scalar(a[k].at(0, 0).real() * b[l].at(0, 0).real());
      if (separating_value(v, prod) < -10 * tol * (1.0 + scale)) return false;
    }
  }
  return true;
}

}  // namespace opsystk::tensor
