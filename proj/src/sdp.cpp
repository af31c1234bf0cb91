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

// Infeasible-start primal-dual interior point method with Nesterov-Todd
// scaling. Hermitian blocks are realified, so the core iteration is purely
// real-symmetric; FREE variables sit directly in the augmented KKT system.
// Infeasibility is only ever declared through a Farkas certificate that
// re-verifies, never through iteration exhaustion.

#include "opsystk/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "opsystk/rng.hpp"

namespace opsystk::sdp {

using linalg::CMat;
using linalg::EigSym;
using linalg::RMat;
using linalg::eig_sym;
using linalg::realify;
using linalg::derealify;

const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::OPTIMAL: return "OPTIMAL";
    case SdpStatus::PRIMAL_INFEASIBLE: return "PRIMAL_INFEASIBLE";
    case SdpStatus::DUAL_INFEASIBLE: return "DUAL_INFEASIBLE";
    case SdpStatus::STALLED: return "STALLED";
  }
  return "?";
}

namespace {

struct Triplet {
  int r, c;
  double v;
};

// Realified coefficient on one PSD block. Sparse outer-product path for
// coefficients with few nonzeros, dense multiply otherwise.
struct RCoef {
  int blk = -1;  // internal PSD block index
  RMat dense;
  std::vector<Triplet> trip;
  bool use_trip = false;
  double norm = 0.0;
};

struct ConsR {
  std::vector<RCoef> psd;
  std::vector<double> free_row;  // length nf
  double rhs = 0.0;
};

RCoef make_rcoef(int blk, const HermMat& coeff) {
  RCoef out;
  out.blk = blk;
  out.dense = realify(coeff) * 0.5;  // preserves tr(A X) after realification
  out.norm = out.dense.frob_norm();
  const int n = out.dense.rows();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double v = out.dense.at(i, j);
      if (v != 0.0) out.trip.push_back({i, j, v});
    }
  out.use_trip = static_cast<int>(out.trip.size()) <= 4 * n;
  return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const std::vector<double>& a) {
  double s = 0.0;
  for (double v : a) s = std::max(s, std::abs(v));
  return s;
}

using linalg::herm_basis;

struct Internal {
  // PSD side
  std::vector<int> psd_problem_block;  // problem index per internal PSD block
  std::vector<int> dim;                // realified dims
  // FREE side
  std::vector<int> free_problem_block;
  std::vector<std::vector<HermMat>> free_basis;  // per free block
  std::vector<int> free_offset;
  int nf = 0;

  std::vector<ConsR> cons;
  std::vector<RCoef> cobj;         // objective on PSD blocks (MIN sense)
  std::vector<double> cfree;       // objective on free coords
  std::vector<double> b;
  double flip = 1.0;               // -1 when the problem sense is MAX
  double scale_a = 1.0, scale_b = 1.0, scale_c = 1.0;

  int nblocks() const { return static_cast<int>(dim.size()); }
  int m() const { return static_cast<int>(cons.size()); }
};

Internal internalize(const SdpProblem& p) {
  Internal in;
  in.flip = (p.sense == Sense::MAX) ? -1.0 : 1.0;
  std::vector<int> psd_of(p.blocks.size(), -1), free_of(p.blocks.size(), -1);
  for (size_t b = 0; b < p.blocks.size(); ++b) {
    if (p.blocks[b].kind == BlockKind::PSD) {
      psd_of[b] = in.nblocks();
      in.psd_problem_block.push_back(static_cast<int>(b));
      in.dim.push_back(2 * p.blocks[b].dim);
    } else {
      free_of[b] = static_cast<int>(in.free_problem_block.size());
      in.free_problem_block.push_back(static_cast<int>(b));
      in.free_offset.push_back(in.nf);
      in.free_basis.push_back(herm_basis(p.blocks[b].dim));
      in.nf += p.blocks[b].dim * p.blocks[b].dim;
    }
  }

  auto realize_terms = [&](const std::vector<LinTerm>& terms,
                           std::vector<RCoef>* psd, std::vector<double>* frow) {
    frow->assign(in.nf, 0.0);
    for (const auto& t : terms) {
      if (psd_of[t.block] >= 0) {
        psd->push_back(make_rcoef(psd_of[t.block], t.coeff));
      } else {
        const int fb = free_of[t.block];
        const auto& basis = in.free_basis[fb];
        for (size_t k = 0; k < basis.size(); ++k)
          (*frow)[in.free_offset[fb] + k] += linalg::inner(t.coeff, basis[k]);
      }
    }
  };

  realize_terms(p.objective, &in.cobj, &in.cfree);
  if (in.flip < 0) {
    for (auto& c : in.cobj) {
      c.dense = c.dense * -1.0;
      for (auto& t : c.trip) t.v = -t.v;
    }
    for (auto& v : in.cfree) v = -v;
  }

  for (const auto& c : p.constraints) {
    ConsR cr;
    realize_terms(c.terms, &cr.psd, &cr.free_row);
    cr.rhs = c.rhs;
    in.cons.push_back(std::move(cr));
    in.b.push_back(c.rhs);
  }

  for (const auto& c : in.cons) {
    for (const auto& t : c.psd) in.scale_a = std::max(in.scale_a, t.norm);
    in.scale_a = std::max(in.scale_a, norm_inf(c.free_row));
  }
  in.scale_b = std::max(1.0, norm_inf(in.b));
  for (const auto& t : in.cobj) in.scale_c = std::max(in.scale_c, t.norm);
  in.scale_c = std::max(in.scale_c, norm_inf(in.cfree));
  return in;
}

// W a W via outer products of W columns when `a` is sparse.
RMat scale_coeff(const RMat& w, const RCoef& a) {
  const int n = w.rows();
  RMat g(n, n);
  if (a.use_trip) {
    for (const auto& t : a.trip) {
      for (int i = 0; i < n; ++i) {
        const double wi = w.at(i, t.r) * t.v;
        if (wi == 0.0) continue;
        for (int j = 0; j < n; ++j) g.at(i, j) += wi * w.at(j, t.c);
      }
    }
    g.symmetrize();
    return g;
  }
  g = w * a.dense * w;
  g.symmetrize();
  return g;
}

double coeff_inner(const RCoef& a, const RMat& g) {
  if (a.use_trip) {
    double s = 0.0;
    for (const auto& t : a.trip) s += t.v * g.at(t.r, t.c);
    return s;
  }
  return linalg::inner(a.dense, g);
}

struct BlockState {
  RMat X, S;
  // Cached spectral data for the current iterate.
  EigSym ex, es;
  RMat W;
  RMat x_minus_half, s_minus_half, s_inv;
};

RMat spectral_pow(const EigSym& e, double p, double floor_val) {
  const int n = static_cast<int>(e.values.size());
  RMat out(n, n);
  for (int k = 0; k < n; ++k) {
    const double lam = std::max(e.values[k], floor_val);
    const double f = std::pow(lam, p);
    for (int i = 0; i < n; ++i) {
      const double vf = e.vectors.at(i, k) * f;
      if (vf == 0.0) continue;
      for (int j = 0; j < n; ++j) out.at(i, j) += vf * e.vectors.at(j, k);
    }
  }
  out.symmetrize();
  return out;
}

// Largest alpha with M + alpha D >= 0, given M^{-1/2}.
double max_step(const RMat& m_minus_half, const RMat& d) {
  RMat t = m_minus_half * d * m_minus_half;
  t.symmetrize();
  const double lam = linalg::lambda_min(t);
  if (lam >= -1e-14) return 1e30;
  return -1.0 / lam;
}

struct Kkt {
  RMat lu;  // factorized in place
  std::vector<int> piv;
  int n = 0;
  bool ok = false;
};

Kkt factor(RMat k) {
  Kkt f;
  f.n = k.rows();
  f.piv.resize(f.n);
  std::iota(f.piv.begin(), f.piv.end(), 0);
  for (int c = 0; c < f.n; ++c) {
    int p = c;
    for (int i = c + 1; i < f.n; ++i)
      if (std::abs(k.at(i, c)) > std::abs(k.at(p, c))) p = i;
    if (p != c) {
      for (int j = 0; j < f.n; ++j) std::swap(k.at(c, j), k.at(p, j));
      std::swap(f.piv[c], f.piv[p]);
    }
    const double d = k.at(c, c);
    if (std::abs(d) < 1e-250) {
      f.ok = false;
      return f;
    }
    for (int i = c + 1; i < f.n; ++i) {
      const double l = k.at(i, c) / d;
      k.at(i, c) = l;
      if (l == 0.0) continue;
      for (int j = c + 1; j < f.n; ++j) k.at(i, j) -= l * k.at(c, j);
    }
  }
  f.lu = std::move(k);
  f.ok = true;
  return f;
}

std::vector<double> lu_solve(const Kkt& f, const std::vector<double>& rhs) {
  std::vector<double> x(f.n);
  for (int i = 0; i < f.n; ++i) x[i] = rhs[f.piv[i]];
  for (int i = 0; i < f.n; ++i)
    for (int j = 0; j < i; ++j) x[i] -= f.lu.at(i, j) * x[j];
  for (int i = f.n - 1; i >= 0; --i) {
    for (int j = i + 1; j < f.n; ++j) x[i] -= f.lu.at(i, j) * x[j];
    x[i] /= f.lu.at(i, i);
  }
  return x;
}

}  // namespace

SdpSolution solve(const SdpProblem& p, const SdpConfig& cfg) {
  Internal in = internalize(p);
  const int nb = in.nblocks();
  const int m = in.m();
  const int nf = in.nf;
  const double tol = cfg.tol;

  // State.
  std::vector<BlockState> st(nb);
  double xi_p = 10.0, xi_d = 10.0;
  for (int i = 0; i < m; ++i)
    xi_p = std::max(xi_p, (1.0 + std::abs(in.b[i])) / in.scale_a);
  xi_d = std::max(xi_d, 1.0 + in.scale_c);
  for (int b = 0; b < nb; ++b) {
    st[b].X = RMat::identity(in.dim[b]) * xi_p;
    st[b].S = RMat::identity(in.dim[b]) * xi_d;
  }
  std::vector<double> xf(nf, 0.0), y(m, 0.0);

  SdpSolution sol;
  sol.status = SdpStatus::STALLED;

  double total_n = 0.0;
  for (int b = 0; b < nb; ++b) total_n += in.dim[b];
  if (total_n == 0.0) total_n = 1.0;

  auto primal_obj = [&]() {
    double s = dot(in.cfree, xf);
    for (const auto& t : in.cobj) s += coeff_inner(t, st[t.blk].X);
    return s;
  };

  auto residuals = [&](std::vector<double>* rp, std::vector<RMat>* rd,
                       std::vector<double>* rf) {
    rp->assign(m, 0.0);
    for (int i = 0; i < m; ++i) {
      double ax = dot(in.cons[i].free_row, xf);
      for (const auto& t : in.cons[i].psd) ax += coeff_inner(t, st[t.blk].X);
      (*rp)[i] = in.b[i] - ax;
    }
    rd->assign(nb, RMat());
    for (int b = 0; b < nb; ++b) {
      (*rd)[b] = st[b].S * -1.0;
    }
    for (const auto& t : in.cobj) (*rd)[t.blk] += t.dense;
    for (int i = 0; i < m; ++i)
      for (const auto& t : in.cons[i].psd)
        (*rd)[t.blk] -= t.dense * y[i];
    rf->assign(nf, 0.0);
    for (int k = 0; k < nf; ++k) rf->at(k) = in.cfree[k];
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < nf; ++k)
        (*rf)[k] -= in.cons[i].free_row[k] * y[i];
  };

  auto record_best = [&](SdpStatus status) {
    sol.status = status;
    sol.X.assign(p.blocks.size(), HermMat());
    sol.S.assign(p.blocks.size(), HermMat());
    for (int b = 0; b < nb; ++b) {
      sol.X[in.psd_problem_block[b]] = derealify(st[b].X);
      sol.S[in.psd_problem_block[b]] = derealify(st[b].S);
    }
    for (size_t fb = 0; fb < in.free_problem_block.size(); ++fb) {
      const auto& basis = in.free_basis[fb];
      HermMat v(basis.empty() ? 0 : basis[0].dim());
      for (size_t k = 0; k < basis.size(); ++k)
        v += basis[k] * xf[in.free_offset[fb] + k];
      sol.X[in.free_problem_block[fb]] = v;
      sol.S[in.free_problem_block[fb]] =
          HermMat(p.blocks[in.free_problem_block[fb]].dim);
    }
    sol.y = y;
    const double po = primal_obj(), dobj = dot(in.b, y);
    sol.primal_obj = in.flip * po;
    sol.dual_obj = in.flip * dobj;
    sol.gap = std::abs(po - dobj) / (1.0 + std::abs(po) + std::abs(dobj));
  };

  std::vector<double> rp;
  std::vector<RMat> rd;
  std::vector<double> rf;

  int stall_count = 0;
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    sol.iterations = iter;
    residuals(&rp, &rd, &rf);

    double mu = 0.0;
    for (int b = 0; b < nb; ++b) mu += linalg::inner(st[b].X, st[b].S);
    sol.xs_inner_trace.push_back(mu);
    mu /= total_n;

    const double po = primal_obj(), dobj = dot(in.b, y);
    sol.objective_trace.emplace_back(po, dobj);
    const double relgap =
        std::abs(po - dobj) / (1.0 + std::abs(po) + std::abs(dobj));
    double rd_norm = norm2(rf);
    for (int b = 0; b < nb; ++b)
      rd_norm = std::hypot(rd_norm, rd[b].frob_norm());
    const double prim_res = norm2(rp) / (1.0 + in.scale_b);
    const double dual_res = rd_norm / (1.0 + in.scale_c);
    sol.primal_residual = prim_res;
    sol.dual_residual = dual_res;

    if (relgap <= tol && prim_res <= tol && dual_res <= tol &&
        mu <= tol * (1.0 + std::abs(po))) {
      record_best(SdpStatus::OPTIMAL);
      sol.primal_residual = prim_res;
      sol.dual_residual = dual_res;
      return sol;
    }

    // Farkas certificate scans. Declared only when the certificate itself
    // verifies, so divergence heuristics cannot misfire.
    if (iter >= 3) {
      const double bty = dot(in.b, y);
      if (bty > 1e-8 * (1.0 + in.scale_b)) {
        std::vector<double> yh(m);
        for (int i = 0; i < m; ++i) yh[i] = y[i] / bty;
        double yh_norm = norm_inf(yh);
        const double eps_inf = tol * std::max(1.0, yh_norm * in.scale_a);
        bool cert = true;
        for (int b = 0; b < nb && cert; ++b) {
          RMat z(in.dim[b], in.dim[b]);
          for (int i = 0; i < m; ++i)
            for (const auto& t : in.cons[i].psd)
              if (t.blk == b) z -= t.dense * yh[i];
          if (linalg::lambda_min(z) < -eps_inf) cert = false;
        }
        if (cert && nf > 0) {
          std::vector<double> af(nf, 0.0);
          for (int i = 0; i < m; ++i)
            for (int k = 0; k < nf; ++k)
              af[k] += in.cons[i].free_row[k] * yh[i];
          if (norm_inf(af) > eps_inf) cert = false;
        }
        // Require the candidate to actually dominate the current scale, so a
        // feasible-but-unconverged iterate is not mistaken for a ray.
        if (cert && bty * 1e-4 > std::max(1.0, mu)) {
          record_best(SdpStatus::PRIMAL_INFEASIBLE);
          sol.farkas_y = yh;
          return sol;
        }
      }
      const double cx = po;
      if (cx < -1e-8 * (1.0 + in.scale_c)) {
        const double s = -1.0 / cx;
        double ax_norm = 0.0;
        for (int i = 0; i < m; ++i) {
          double ax = dot(in.cons[i].free_row, xf);
          for (const auto& t : in.cons[i].psd) ax += coeff_inner(t, st[t.blk].X);
          ax_norm = std::max(ax_norm, std::abs(ax) * s);
        }
        double xnorm = 0.0;
        for (int b = 0; b < nb; ++b) xnorm += st[b].X.trace();
        const double eps_inf = tol * std::max(1.0, xnorm * s * in.scale_a);
        if (ax_norm <= eps_inf && (-cx) * 1e-4 > std::max(1.0, mu)) {
          record_best(SdpStatus::DUAL_INFEASIBLE);
          sol.farkas_X.assign(p.blocks.size(), HermMat());
          for (int b = 0; b < nb; ++b)
            sol.farkas_X[in.psd_problem_block[b]] = derealify(st[b].X * s);
          for (size_t fb = 0; fb < in.free_problem_block.size(); ++fb) {
            const auto& basis = in.free_basis[fb];
            HermMat v(basis.empty() ? 0 : basis[0].dim());
            for (size_t k = 0; k < basis.size(); ++k)
              v += basis[k] * (xf[in.free_offset[fb] + k] * s);
            sol.farkas_X[in.free_problem_block[fb]] = v;
          }
          return sol;
        }
      }
    }

    // NT scaling per block.
    bool spectral_ok = true;
    for (int b = 0; b < nb; ++b) {
      auto& s = st[b];
      try {
        s.ex = eig_sym(s.X);
        s.es = eig_sym(s.S);
      } catch (const Error&) {
        spectral_ok = false;
        break;
      }
      const double fx = std::max(1e-14 * (1.0 + s.ex.values.back()), 1e-300);
      const double fs = std::max(1e-14 * (1.0 + s.es.values.back()), 1e-300);
      RMat x_half = spectral_pow(s.ex, 0.5, fx);
      s.x_minus_half = spectral_pow(s.ex, -0.5, fx);
      s.s_minus_half = spectral_pow(s.es, -0.5, fs);
      s.s_inv = spectral_pow(s.es, -1.0, fs);
      RMat mid = x_half * s.S * x_half;
      mid.symmetrize();
      EigSym em;
      try {
        em = eig_sym(mid);
      } catch (const Error&) {
        spectral_ok = false;
        break;
      }
      const double fm = std::max(1e-14 * (1.0 + em.values.back()), 1e-300);
      s.W = x_half * spectral_pow(em, -0.5, fm) * x_half;
      s.W.symmetrize();
    }
    if (!spectral_ok) break;

    // Schur complement M_ij = sum_b <A_i, W A_j W>, augmented by free columns.
    const int kn = m + nf;
    std::vector<std::vector<RMat>> g(m);  // g[i][b-local]: W A_i W per term
    RMat kkt(kn, kn);
    for (int j = 0; j < m; ++j) {
      g[j].resize(in.cons[j].psd.size());
      for (size_t t = 0; t < in.cons[j].psd.size(); ++t)
        g[j][t] = scale_coeff(st[in.cons[j].psd[t].blk].W, in.cons[j].psd[t]);
    }
    for (int i = 0; i < m; ++i) {
      for (int j = i; j < m; ++j) {
        double s = 0.0;
        for (size_t ti = 0; ti < in.cons[i].psd.size(); ++ti) {
          const auto& ai = in.cons[i].psd[ti];
          for (size_t tj = 0; tj < in.cons[j].psd.size(); ++tj) {
            if (in.cons[j].psd[tj].blk != ai.blk) continue;
            s += coeff_inner(ai, g[j][tj]);
          }
        }
        kkt.at(i, j) = s;
        kkt.at(j, i) = s;
      }
      for (int k = 0; k < nf; ++k) {
        kkt.at(i, m + k) = in.cons[i].free_row[k];
        kkt.at(m + k, i) = in.cons[i].free_row[k];
      }
    }
    double mtr = 0.0;
    for (int i = 0; i < m; ++i) mtr += kkt.at(i, i);
    const double ridge = 1e-13 * (1.0 + mtr / std::max(1, m));
    RMat kkt_reg = kkt;
    for (int i = 0; i < m; ++i) kkt_reg.at(i, i) += ridge;
    for (int k = 0; k < nf; ++k) kkt_reg.at(m + k, m + k) = -ridge;

    Kkt f = factor(kkt_reg);
    if (!f.ok) break;

    // Factor the regularized system, refine against the exact one so the
    // ridge does not leak into the free-variable dual residual.
    auto kkt_solve = [&](const std::vector<double>& rhs) {
      auto z = lu_solve(f, rhs);
      for (int refine = 0; refine < 2; ++refine) {
        std::vector<double> r = rhs;
        for (int i = 0; i < kn; ++i) {
          double s = 0.0;
          for (int j2 = 0; j2 < kn; ++j2) s += kkt.at(i, j2) * z[j2];
          r[i] -= s;
        }
        auto dz = lu_solve(f, r);
        for (int i = 0; i < kn; ++i) z[i] += dz[i];
      }
      return z;
    };

    // One factorization, two solves (predictor for sigma, then corrector).
    auto scale_dense = [&](const RMat& w, const RMat& a) {
      RMat t = w * a * w;
      t.symmetrize();
      return t;
    };

    auto do_newton = [&](const std::vector<RMat>& rc, std::vector<double>* dy,
                         std::vector<double>* dxf, std::vector<RMat>* dX,
                         std::vector<RMat>* dS) {
      std::vector<RMat> wrdw(nb);
      for (int b = 0; b < nb; ++b) wrdw[b] = scale_dense(st[b].W, rd[b]);
      std::vector<double> rhs(kn, 0.0);
      for (int i = 0; i < m; ++i) {
        double h = rp[i];
        for (const auto& a : in.cons[i].psd) {
          h -= coeff_inner(a, rc[a.blk]);
          h += coeff_inner(a, wrdw[a.blk]);
        }
        rhs[i] = h;
      }
      for (int k = 0; k < nf; ++k) rhs[m + k] = rf[k];
      const auto z = kkt_solve(rhs);
      dy->assign(z.begin(), z.begin() + m);
      dxf->assign(z.begin() + m, z.end());
      dS->assign(nb, RMat());
      for (int b = 0; b < nb; ++b) (*dS)[b] = rd[b];
      for (int i = 0; i < m; ++i)
        for (const auto& t : in.cons[i].psd)
          (*dS)[t.blk] -= t.dense * (*dy)[i];
      dX->assign(nb, RMat());
      for (int b = 0; b < nb; ++b) {
        RMat wds = scale_dense(st[b].W, (*dS)[b]);
        (*dX)[b] = rc[b] - wds;
        (*dX)[b].symmetrize();
      }
    };

    auto step_lengths = [&](const std::vector<RMat>& dX,
                            const std::vector<RMat>& dS, double* ap,
                            double* ad) {
      *ap = 1.0;
      *ad = 1.0;
      for (int b = 0; b < nb; ++b) {
        *ap = std::min(*ap, 0.98 * max_step(st[b].x_minus_half, dX[b]));
        *ad = std::min(*ad, 0.98 * max_step(st[b].s_minus_half, dS[b]));
      }
      *ap = std::min(*ap, 1.0);
      *ad = std::min(*ad, 1.0);
    };

    // Predictor (sigma = 0).
    std::vector<RMat> rc(nb);
    for (int b = 0; b < nb; ++b) rc[b] = st[b].X * -1.0;
    std::vector<double> dy, dxf;
    std::vector<RMat> dX, dS;
    do_newton(rc, &dy, &dxf, &dX, &dS);
    double ap, ad;
    step_lengths(dX, dS, &ap, &ad);

    double mu_aff = 0.0;
    for (int b = 0; b < nb; ++b) {
      RMat xa = st[b].X + dX[b] * ap;
      RMat sa = st[b].S + dS[b] * ad;
      mu_aff += linalg::inner(xa, sa);
    }
    mu_aff /= total_n;
    double sigma = std::pow(std::max(0.0, mu_aff / std::max(mu, 1e-300)), 3.0);
    sigma = std::clamp(sigma, 1e-10, 1.0);
    // Re-center while infeasibility dominates complementarity; letting mu
    // collapse first leaves the iterate pinned to the cone boundary with the
    // dual residual unable to move.
    const double res_abs = norm2(rp) + rd_norm;
    if (mu < 0.5 * res_abs) sigma = std::max(sigma, 0.5);
    if (mu < 0.01 * res_abs) sigma = std::max(sigma, 0.9);

    // Corrector.
    for (int b = 0; b < nb; ++b)
      rc[b] = st[b].s_inv * (sigma * mu) - st[b].X;
    do_newton(rc, &dy, &dxf, &dX, &dS);
    step_lengths(dX, dS, &ap, &ad);

    if (ap < 1e-9 && ad < 1e-9) {
      if (++stall_count >= 3) break;
    } else {
      stall_count = 0;
    }

    for (int b = 0; b < nb; ++b) {
      st[b].X += dX[b] * ap;
      st[b].S += dS[b] * ad;
      st[b].X.symmetrize();
      st[b].S.symmetrize();
    }
    for (int k = 0; k < nf; ++k) xf[k] += ap * dxf[k];
    for (int i = 0; i < m; ++i) y[i] += ad * dy[i];
  }

  record_best(SdpStatus::STALLED);
  return sol;
}

// ---------------------------------------------------------------------------
// plant_instance
// ---------------------------------------------------------------------------

std::pair<SdpProblem, double> plant_instance(std::uint64_t seed,
                                             const PlantSpec& spec) {
  Rng rng(seed ^ 0x5dee5dee5dee5deeULL);
  SdpProblem p;
  p.blocks = spec.blocks;
  p.sense = Sense::MIN;
  const int m = spec.num_constraints;

  // Planted primal/dual pair with strict complementarity blockwise.
  std::vector<HermMat> xstar, sstar;
  for (const auto& bs : p.blocks) {
    const int d = bs.dim;
    if (bs.kind == BlockKind::FREE) {
      CMat g(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g.at(i, j) = cplx(rng.normal(), rng.normal());
      xstar.push_back(HermMat::hermitian_part(g));
      sstar.push_back(HermMat(d));
      continue;
    }
    // Random unitary from a complex Gaussian via Gram-Schmidt.
    CMat u(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) u.at(i, j) = cplx(rng.normal(), rng.normal());
    for (int c = 0; c < d; ++c) {
      for (int c2 = 0; c2 < c; ++c2) {
        cplx dp = 0.0;
        for (int i = 0; i < d; ++i) dp += std::conj(u.at(i, c2)) * u.at(i, c);
        for (int i = 0; i < d; ++i) u.at(i, c) -= dp * u.at(i, c2);
      }
      double nrm = 0.0;
      for (int i = 0; i < d; ++i) nrm += std::norm(u.at(i, c));
      nrm = std::sqrt(nrm);
      for (int i = 0; i < d; ++i) u.at(i, c) /= nrm;
    }
    const int rank = spec.zero_primal ? 0 : 1 + static_cast<int>(rng.below(d));
    CMat dx(d, d), ds(d, d);
    for (int i = 0; i < d; ++i) {
      if (i < rank)
        dx.at(i, i) = 0.3 + rng.uniform();
      else
        ds.at(i, i) = 0.3 + rng.uniform();
    }
    xstar.push_back(HermMat::hermitian_part(u * dx * u.adjoint()));
    sstar.push_back(HermMat::hermitian_part(u * ds * u.adjoint()));
  }

  std::vector<double> ystar(m);
  for (auto& v : ystar) v = rng.normal();

  std::vector<std::vector<HermMat>> a(m);
  for (int i = 0; i < m; ++i) {
    Constraint c;
    double rhs = 0.0;
    for (size_t b = 0; b < p.blocks.size(); ++b) {
      CMat g(p.blocks[b].dim, p.blocks[b].dim);
      for (int r = 0; r < g.rows(); ++r)
        for (int s = 0; s < g.cols(); ++s)
          g.at(r, s) = cplx(rng.normal(), rng.normal());
      HermMat ai = HermMat::hermitian_part(g);
      a[i].push_back(ai);
      c.terms.push_back({static_cast<int>(b), ai});
      rhs += linalg::inner(ai, xstar[b]);
    }
    c.rhs = rhs;
    p.constraints.push_back(std::move(c));
  }

  double opt = 0.0;
  for (size_t b = 0; b < p.blocks.size(); ++b) {
    HermMat cb = sstar[b];
    for (int i = 0; i < m; ++i) cb += a[i][b] * ystar[i];
    p.objective.push_back({static_cast<int>(b), cb});
    opt += linalg::inner(cb, xstar[b]);
  }
  return {p, opt};
}

// ---------------------------------------------------------------------------
// verify_certificate
// ---------------------------------------------------------------------------

namespace {

double constraint_value(const Constraint& c, const std::vector<HermMat>& X) {
  double s = 0.0;
  for (const auto& t : c.terms) s += linalg::inner(t.coeff, X[t.block]);
  return s;
}

}  // namespace

bool verify_certificate(const SdpProblem& p, const SdpSolution& sol,
                        double tol) {
  const double lim = 10.0 * tol;
  double scale_a = 1.0;
  for (const auto& c : p.constraints)
    for (const auto& t : c.terms)
      scale_a = std::max(scale_a, t.coeff.frob_norm());

  if (sol.status == SdpStatus::OPTIMAL) {
    if (sol.X.size() != p.blocks.size()) return false;
    double b_norm = 1.0, rp_norm = 0.0;
    for (const auto& c : p.constraints) {
      b_norm = std::max(b_norm, std::abs(c.rhs));
      const double r = c.rhs - constraint_value(c, sol.X);
      rp_norm = std::hypot(rp_norm, r);
    }
    if (rp_norm > lim * b_norm * std::sqrt(1.0 + p.constraints.size()))
      return false;
    double xnorm = 1.0;
    for (size_t b = 0; b < p.blocks.size(); ++b) {
      xnorm = std::max(xnorm, sol.X[b].frob_norm());
      if (p.blocks[b].kind == BlockKind::PSD &&
          linalg::lambda_min(sol.X[b]) < -lim * xnorm)
        return false;
    }
    // Dual feasibility, recomputed from scratch: C - sum y A >= 0 on PSD
    // blocks and = 0 on FREE blocks (MIN sense; MAX flips the objective).
    const double flip = p.sense == Sense::MAX ? -1.0 : 1.0;
    std::vector<HermMat> slack(p.blocks.size());
    for (size_t b = 0; b < p.blocks.size(); ++b)
      slack[b] = HermMat(p.blocks[b].dim);
    for (const auto& t : p.objective) slack[t.block] += t.coeff * flip;
    for (size_t i = 0; i < p.constraints.size(); ++i)
      for (const auto& t : p.constraints[i].terms)
        slack[t.block] += t.coeff * (-sol.y[i]);
    double snorm = 1.0;
    for (const auto& s : slack) snorm = std::max(snorm, s.frob_norm());
    for (size_t b = 0; b < p.blocks.size(); ++b) {
      if (p.blocks[b].kind == BlockKind::PSD) {
        if (linalg::lambda_min(slack[b]) < -lim * snorm) return false;
      } else {
        if (slack[b].frob_norm() > lim * snorm) return false;
      }
    }
    const double po = flip * sol.primal_obj, dobj = flip * sol.dual_obj;
    if (std::abs(po - dobj) > lim * (1.0 + std::abs(po) + std::abs(dobj)))
      return false;
    // Reported objectives must match the certificate data.
    double po_check = 0.0;
    for (const auto& t : p.objective)
      po_check += linalg::inner(t.coeff, sol.X[t.block]);
    if (std::abs(po_check - sol.primal_obj) >
        1e-6 * (1.0 + std::abs(po_check)))
      return false;
    return true;
  }

  if (sol.status == SdpStatus::PRIMAL_INFEASIBLE) {
    if (sol.farkas_y.size() != p.constraints.size()) return false;
    double bty = 0.0;
    for (size_t i = 0; i < p.constraints.size(); ++i)
      bty += p.constraints[i].rhs * sol.farkas_y[i];
    if (bty <= 0.0) return false;
    double ynorm = 0.0;
    for (double v : sol.farkas_y) ynorm = std::max(ynorm, std::abs(v));
    const double eps = lim * std::max(1.0, ynorm * scale_a) / bty;
    std::vector<HermMat> z(p.blocks.size());
    for (size_t b = 0; b < p.blocks.size(); ++b) z[b] = HermMat(p.blocks[b].dim);
    for (size_t i = 0; i < p.constraints.size(); ++i)
      for (const auto& t : p.constraints[i].terms)
        z[t.block] += t.coeff * (-sol.farkas_y[i] / bty);
    for (size_t b = 0; b < p.blocks.size(); ++b) {
      if (p.blocks[b].kind == BlockKind::PSD) {
        if (linalg::lambda_min(z[b]) < -eps) return false;
      } else {
        if (z[b].frob_norm() > eps) return false;
      }
    }
    return true;
  }

  if (sol.status == SdpStatus::DUAL_INFEASIBLE) {
    if (sol.farkas_X.size() != p.blocks.size()) return false;
    double xnorm = 1.0;
    for (const auto& x : sol.farkas_X) xnorm = std::max(xnorm, x.frob_norm());
    const double eps = lim * xnorm * scale_a;
    for (size_t b = 0; b < p.blocks.size(); ++b)
      if (p.blocks[b].kind == BlockKind::PSD &&
          linalg::lambda_min(sol.farkas_X[b]) < -eps)
        return false;
    for (const auto& c : p.constraints)
      if (std::abs(constraint_value(c, sol.farkas_X)) > eps) return false;
    const double flip = p.sense == Sense::MAX ? -1.0 : 1.0;
    double cx = 0.0;
    for (const auto& t : p.objective)
      cx += flip * linalg::inner(t.coeff, sol.farkas_X[t.block]);
    return cx < 0.0;
  }

  return false;
}

void dump_problem(std::ostream& os, const SdpProblem& p) {
  os << "blocks " << p.blocks.size() << "\n";
  for (size_t b = 0; b < p.blocks.size(); ++b)
    os << "block " << b << " " << p.blocks[b].dim << " "
       << (p.blocks[b].kind == BlockKind::PSD ? "PSD" : "FREE") << "\n";
  os << "sense " << (p.sense == Sense::MIN ? "MIN" : "MAX") << "\n";
  auto dump_terms = [&os](const std::string& name,
                          const std::vector<LinTerm>& terms) {
    for (const auto& t : terms)
      for (int i = 0; i < t.coeff.dim(); ++i)
        for (int j = 0; j < t.coeff.dim(); ++j) {
          const cplx v = t.coeff.at(i, j);
          if (v != cplx(0.0, 0.0))
            os << name << " " << t.block << " " << i << " " << j << " "
               << v.real() << " " << v.imag() << "\n";
        }
  };
  dump_terms("C", p.objective);
  for (size_t i = 0; i < p.constraints.size(); ++i) {
    dump_terms("A" + std::to_string(i), p.constraints[i].terms);
    os << "RHS" << i << " 0 0 0 " << p.constraints[i].rhs << " 0\n";
  }
}

}  // namespace opsystk::sdp
