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

#include "opsystk/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <thread>

namespace opsystk::experiments {

using linalg::CMat;
using linalg::HermMat;
using linalg::inner;
using linalg::kron;
using opsys::Verdict;
using tensor::OracleConfig;

// ---------------------------------------------------------------------------
// Infrastructure
// ---------------------------------------------------------------------------

int thread_budget() {
  if (const char* env = std::getenv("OPSYSTK_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

namespace {

// Runs fn(i) for i in [0, n) on the thread budget; results land by index so
// assembly order never depends on scheduling.
template <typename Fn>
std::vector<Instance> run_indexed(int n, const Fn& fn) {
  std::vector<Instance> out(n);
  const int threads = std::min(thread_budget(), std::max(1, n));
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        out[i] = fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void summarize(Report* r) {
  for (const auto& i : r->instances) {
    ++r->summary.total;
    if (i.verdict == "AGREE" || i.verdict == "MEMBER" || i.verdict == "EXTENDS")
      ++r->summary.agreed;
    else if (i.verdict == "WITNESS" || i.verdict == "NON_MEMBER")
      ++r->summary.witnesses;
    else if (i.verdict == "UNDECIDED" || i.verdict == "GAP")
      ++r->summary.undecided;
    else if (i.verdict == "MISMATCH")
      ++r->summary.mismatches;
    else if (i.verdict == "RECHECK_FAILED")
      ++r->summary.failures;
  }
}

std::uint64_t digest_verdict(const Verdict& v) {
  std::vector<double> data;
  data.push_back(static_cast<double>(static_cast<int>(v.status)));
  data.push_back(v.value);
  for (double f : v.functional) data.push_back(f);
  if (v.density)
    for (int i = 0; i < v.density->dim(); ++i)
      for (int j = 0; j < v.density->dim(); ++j) {
        data.push_back(v.density->at(i, j).real());
        data.push_back(v.density->at(i, j).imag());
      }
  return digest_doubles(data);
}

// Random positive ambient representative inside the system's span.
HermMat random_positive_rep(const System& t, Rng& rng) {
  auto e = opsys::random_level_element(t, 1, rng);
  HermMat rep = opsys::level_representative(t, e);
  const double lam = linalg::lambda_min(rep);
  HermMat unit_rep =
      opsys::system_basis_rep(t, opsys::system_unit_index(t)) *
      opsys::system_unit_scale(t);
  return rep + unit_rep * ((lam < 0 ? -lam : 0.0) + rng.uniform(0.02, 0.4));
}

// Random min-member of the pair; a sum of positive products on even draws
// (a pushforward of a positive concrete element), rejection sampling
// otherwise.
std::optional<TensorElement> sample_min_member(const System& left,
                                               const System& right, int level,
                                               Rng& rng, double tol) {
  const int nl = opsys::system_ambient(left), nr = opsys::system_ambient(right);
  for (int attempt = 0; attempt < 8; ++attempt) {
    const bool push = (rng.next_u64() & 1) == 0 || attempt >= 4;
    if (push && std::holds_alternative<opsys::MatrixSystem>(left)) {
      const auto& s = std::get<opsys::MatrixSystem>(left);
      HermMat u(level * nl * nr);
      const int terms = 3 + static_cast<int>(rng.below(3));
      const bool right_is_quotient =
          std::holds_alternative<opsys::QuotientSystem>(right);
      for (int t = 0; t < terms; ++t) {
        auto e = opsys::random_level_element(System(s), level, rng);
        HermMat srep = opsys::level_representative(System(s), e);
        const double lam = linalg::lambda_min(srep);
        srep += HermMat::identity(level * nl) *
                ((lam < 0 ? -lam : 0.0) + rng.uniform(0.02, 0.4));
        HermMat qrep(nr);
        if (right_is_quotient) {
          // Quotient right factor: any ambient PSD pushes forward.
          CMat gq(nr, nr);
          for (int i = 0; i < nr; ++i)
            for (int j = 0; j < nr; ++j)
              gq.at(i, j) = cplx(rng.normal(), rng.normal());
          qrep = HermMat::hermitian_part(gq * gq.adjoint()) * (1.0 / nr);
        } else {
          // Matrix right factor: the positive must stay in span(T).
          qrep = random_positive_rep(right, rng);
        }
        u += kron(srep, qrep);
      }
      if (right_is_quotient)
        return tensor::pushforward(s, std::get<opsys::QuotientSystem>(right), u,
                                   level);
      return tensor::embed_concrete(s, std::get<opsys::MatrixSystem>(right), u,
                                    level);
    }
    // Rejection sampling on random elements (kept near the unit so members
    // are common).
    TensorElement x;
    x.left = left;
    x.right = right;
    x.level = level;
    const int dl = opsys::system_dim(left), dr = opsys::system_dim(right);
    x.coeff.assign(dl, std::vector<HermMat>(dr, HermMat(level)));
    for (int k = 0; k < dl; ++k)
      for (int l = 0; l < dr; ++l) {
        CMat g(level, level);
        for (int i = 0; i < level; ++i)
          for (int j = 0; j < level; ++j)
            g.at(i, j) = cplx(rng.normal(), rng.normal());
        x.coeff[k][l] = HermMat::hermitian_part(g) * (0.3 / (dl + dr));
      }
    x.coeff[opsys::system_unit_index(left)][opsys::system_unit_index(right)] +=
        HermMat::identity(level) *
        (rng.uniform(0.8, 1.6) * opsys::system_unit_scale(left) *
         opsys::system_unit_scale(right));
    OracleConfig cfg;
    cfg.tol = tol;
    cfg.seed = rng.next_u64();
    auto v = tensor::min_member(x, cfg);
    if (v.status == Membership::MEMBER && v.grounded) return x;
  }
  return std::nullopt;
}

}  // namespace

std::uint64_t digest_doubles(const std::vector<double>& vals) {
  std::uint64_t h = 1469598103934665603ULL;
  char buf[40];
  for (double v : vals) {
    const double r = std::abs(v) < 1e-12 ? 0.0 : v;
    const int len = std::snprintf(buf, sizeof buf, "%.10g|", r);
    for (int i = 0; i < len; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Catalogs
// ---------------------------------------------------------------------------

Catalog Catalog::builtins() {
  Catalog c;
  for (int n = 2; n <= 4; ++n)
    c.entries.push_back({"M" + std::to_string(n),
                         System(opsys::make_full_matrix_system(n))});
  for (int n = 2; n <= 8; ++n)
    c.entries.push_back({"linf" + std::to_string(n), System(opsys::make_linf(n))});
  for (int n : {4, 6, 8})
    c.entries.push_back({"W" + std::to_string(n), System(opsys::make_W(n))});
  c.entries.push_back({"W23", System(opsys::make_W23())});
  c.entries.push_back({"l6modJ", System(opsys::make_function_quotient(
                                     6, {{1, 1, 1, -1, -1, -1}}, "l6modJ"))});
  return c;
}

std::optional<System> find_builtin(const std::string& name) {
  static const Catalog cat = Catalog::builtins();
  for (const auto& e : cat.entries)
    if (e.id == name) return e.system;
  return std::nullopt;
}

Catalog Catalog::random_quotients(int count, int ambient, int j_dim,
                                  std::uint64_t seed) {
  Catalog c;
  Rng rng(seed ^ 0x9a7e57ULL);
  for (int t = 0; t < count; ++t) {
    opsys::NullSubspace j;
    j.n = ambient;
    std::vector<HermMat> span;
    for (int d = 0; d < j_dim; ++d) {
      CMat g(ambient, ambient);
      for (int i = 0; i < ambient; ++i)
        for (int k = 0; k < ambient; ++k)
          g.at(i, k) = cplx(rng.normal(), rng.normal());
      HermMat h = HermMat::hermitian_part(g);
      h += HermMat::identity(ambient) * (-h.trace() / ambient);  // traceless
      span.push_back(h);
    }
    j.basis = linalg::orthonormalize(span);
    auto id = "M" + std::to_string(ambient) + "modJ" + std::to_string(t);
    c.entries.push_back({id, System(opsys::make_quotient(ambient, j, id))});
  }
  return c;
}

Catalog Catalog::random_matrix_systems(int count, int ambient, int generators,
                                       std::uint64_t seed) {
  Catalog c;
  Rng rng(seed ^ 0x333aaULL);
  for (int t = 0; t < count; ++t) {
    std::vector<CMat> gens;
    for (int g = 0; g < generators; ++g) {
      CMat m(ambient, ambient);
      for (int i = 0; i < ambient; ++i)
        for (int j = 0; j < ambient; ++j)
          m.at(i, j) = cplx(rng.normal(), rng.normal());
      gens.push_back(m);
    }
    auto id = "R" + std::to_string(ambient) + "_" + std::to_string(t);
    c.entries.push_back({id, System(opsys::make_matrix_system(ambient, gens, id))});
  }
  return c;
}

void Catalog::append(const Catalog& other) {
  for (const auto& e : other.entries) entries.push_back(e);
}

// ---------------------------------------------------------------------------
// wep_scan
// ---------------------------------------------------------------------------

Report wep_scan(const MatrixSystem& s, const Catalog& quotients,
                const ScanConfig& cfg) {
  Report rep;
  rep.harness = "wep_scan";
  rep.config = {{"system", s.name},
                {"samples", std::to_string(cfg.samples)},
                {"tol", fmt(cfg.tol)},
                {"seed", std::to_string(cfg.seed)}};
  const double t0 = now_ms();

  struct Task {
    int entry;
    int level;
    int sample;
  };
  std::vector<Task> tasks;
  for (size_t e = 0; e < quotients.entries.size(); ++e)
    for (int level : cfg.levels)
      for (int t = 0; t < cfg.samples; ++t)
        tasks.push_back({static_cast<int>(e), level, t});

  Rng master(cfg.seed);
  rep.instances = run_indexed(
      static_cast<int>(tasks.size()), [&](int idx) -> Instance {
        const auto& task = tasks[idx];
        const auto& entry = quotients.entries[task.entry];
        Instance inst;
        inst.id = s.name + "|" + entry.id + "|L" + std::to_string(task.level) +
                  "|s" + std::to_string(task.sample);
        const double start = now_ms();
        Rng rng = master.child(idx);
        OracleConfig ocfg;
        ocfg.tol = cfg.tol;
        ocfg.seed = rng.next_u64();
        auto xo = sample_min_member(System(s), entry.system, task.level, rng,
                                    cfg.tol);
        if (!xo) {
          inst.verdict = "UNDECIDED";
          inst.route = "sampling";
          inst.time_ms = now_ms() - start;
          return inst;
        }
        auto vmax = tensor::max_member(*xo, ocfg);
        inst.grounded = vmax.grounded;
        inst.value = vmax.value;
        inst.route = vmax.route;
        inst.certificate_digest = digest_verdict(vmax);
        if (vmax.status == Membership::MEMBER) {
          inst.verdict = "AGREE";
        } else if (vmax.status == Membership::NON_MEMBER) {
          const bool ok = tensor::recheck_separation(
              *xo, vmax, /*max_cone=*/true, cfg.recheck_count, rng.next_u64(),
              cfg.tol);
          inst.verdict = ok ? "WITNESS" : "RECHECK_FAILED";
        } else {
          inst.verdict = "UNDECIDED";
        }
        inst.time_ms = now_ms() - start;
        return inst;
      });
  summarize(&rep);
  rep.total_time_ms = now_ms() - t0;
  return rep;
}

// ---------------------------------------------------------------------------
// wri_scan
// ---------------------------------------------------------------------------

Report wri_scan(const MatrixSystem& s1, const MatrixSystem& s2,
                const Catalog& targets, const ScanConfig& cfg) {
  Report rep;
  rep.harness = "wri_scan";
  rep.config = {{"sub", s1.name},
                {"super", s2.name},
                {"samples", std::to_string(cfg.samples)},
                {"tol", fmt(cfg.tol)},
                {"seed", std::to_string(cfg.seed)}};
  const double t0 = now_ms();

  struct Task {
    int entry;
    int sample;
  };
  std::vector<Task> tasks;
  for (size_t e = 0; e < targets.entries.size(); ++e) {
    if (!std::holds_alternative<MatrixSystem>(targets.entries[e].system))
      continue;
    for (int t = 0; t < cfg.samples; ++t)
      tasks.push_back({static_cast<int>(e), t});
  }

  Rng master(cfg.seed ^ 0x3713ULL);
  rep.instances = run_indexed(
      static_cast<int>(tasks.size()), [&](int idx) -> Instance {
        const auto& task = tasks[idx];
        const auto& r =
            std::get<MatrixSystem>(targets.entries[task.entry].system);
        Instance inst;
        inst.id = s1.name + "<" + s2.name + "|" +
                  targets.entries[task.entry].id + "|s" +
                  std::to_string(task.sample);
        const double start = now_ms();
        Rng rng = master.child(idx);
        linalg::RMat images = tensor::sample_ucp_into(System(s1), r, rng);
        if (images.rows() == 0) {
          inst.verdict = "UNDECIDED";
          inst.route = "ucp-sampling";
          inst.time_ms = now_ms() - start;
          return inst;
        }
        OracleConfig ocfg;
        ocfg.tol = cfg.tol;
        ocfg.seed = rng.next_u64();
        auto v = tensor::ucp_extension_exists(s1, s2, images, r, ocfg);
        inst.grounded = v.grounded;
        inst.value = v.value;
        inst.route = v.route;
        inst.certificate_digest = digest_verdict(v);
        if (v.status == Membership::MEMBER) {
          inst.verdict = "EXTENDS";
        } else if (v.status == Membership::NON_MEMBER) {
          // Tensorial form of the failure: f_phi(s (x) (D+J)) = <D, phi(s)>/n
          // is a max-positive functional on S1 (x) R* with no positive
          // extension to S2 (x) R*; re-verify positivity on sampled
          // generators and the Farkas block on the extension pins.
          bool ok = true;
          auto rdual = opsys::dual_of_matrix_system(r, 4, cfg.tol);
          auto imgs_ambient = [&](int k) {
            HermMat img(r.n);
            for (int i = 0; i < r.dim(); ++i)
              img += r.basis[i] * images.at(i, k);
            return img;
          };
          Verdict fform;
          fform.functional.resize(s1.dim() * rdual.dim());
          for (int k = 0; k < s1.dim(); ++k) {
            const HermMat img = imgs_ambient(k);
            for (int l = 0; l < rdual.dim(); ++l)
              fform.functional[k * rdual.dim() + l] =
                  opsys::fp_pair(rdual.coset_basis[l], img);
          }
          auto gens = tensor::sample_max_generators(
              System(s1), System(rdual), cfg.recheck_count, rng.next_u64());
          double fscale = 0.0;
          for (double f : fform.functional) fscale = std::max(fscale, std::abs(f));
          for (const auto& g : gens)
            if (tensor::separating_value(fform, g) <
                -10 * cfg.tol * (1.0 + fscale))
              ok = false;
          // Farkas re-check: Z >= 0, Z in span(pins), <Z, C0> < 0.
          if (ok && v.density) {
            const HermMat& z = *v.density;
            if (linalg::lambda_min(z) < -10 * cfg.tol * (1 + z.frob_norm()))
              ok = false;
            auto pins = tensor::extension_pins(s1, s2, images, r);
            std::vector<HermMat> kmats;
            for (auto& [k2, rhs] : pins) kmats.push_back(k2);
            double resid = 0.0;
            linalg::coefficients_in_span(z, kmats, &resid);
            if (resid > 1e-5 * (1.0 + z.frob_norm())) ok = false;
            if (v.psd_certificate.empty()) {
              // <Z, C0> for a least-norm affine point C0 = sum alpha K.
              const int np = static_cast<int>(pins.size());
              linalg::RMat gram(np, np);
              std::vector<double> rhs(np);
              for (int a = 0; a < np; ++a) {
                rhs[a] = pins[a].second;
                for (int b = 0; b < np; ++b)
                  gram.at(a, b) = inner(pins[a].first, pins[b].first);
              }
              for (int a = 0; a < np; ++a) gram.at(a, a) += 1e-10;
              auto alpha = linalg::solve_linear(gram, rhs);
              double zc0 = 0.0;
              for (int a = 0; a < np; ++a)
                if (alpha[a] != 0.0) zc0 += alpha[a] * inner(z, pins[a].first);
              if (zc0 >= 0.0) ok = false;
            }
          }
          inst.verdict = ok ? "WITNESS" : "RECHECK_FAILED";
        } else {
          inst.verdict = "UNDECIDED";
        }
        inst.time_ms = now_ms() - start;
        return inst;
      });
  summarize(&rep);
  rep.total_time_ms = now_ms() - t0;
  return rep;
}

// ---------------------------------------------------------------------------
// np_test / quasi_nuclear_scan
// ---------------------------------------------------------------------------

namespace {

// Exact LP data for an abelian pair at level 1.
struct LpPair {
  bool available = false;
  std::vector<poly::RatVec> products;  // extreme-ray products, ambient coords
  int nl = 0, nr = 0;
};

LpPair lp_pair_data(const System& left, const System& right) {
  LpPair out;
  if (!std::holds_alternative<MatrixSystem>(left) ||
      !std::holds_alternative<MatrixSystem>(right))
    return out;
  const auto& a = std::get<MatrixSystem>(left);
  const auto& b = std::get<MatrixSystem>(right);
  if (!a.abelian || !b.abelian || !a.weights || !b.weights) return out;
  if (a.n > poly::kExactDimCap || b.n > poly::kExactDimCap) return out;
  poly::RatMat wa, wb;
  for (const auto& w : *a.weights) wa.push_back(poly::from_integers(w));
  for (const auto& w : *b.weights) wb.push_back(poly::from_integers(w));
  auto ra = poly::extreme_rays(wa, a.n);
  auto rb = poly::extreme_rays(wb, b.n);
  for (const auto& x : ra)
    for (const auto& y : rb) out.products.push_back(poly::tensor(x, y));
  out.available = true;
  out.nl = a.n;
  out.nr = b.n;
  return out;
}

// Ambient diagonal coordinates of a level-1 element of an abelian pair.
std::vector<double> abelian_coords(const TensorElement& x) {
  const HermMat rep = tensor::tensor_representative(x);
  std::vector<double> d(rep.dim());
  for (int i = 0; i < rep.dim(); ++i) d[i] = rep.at(i, i).real();
  return d;
}

poly::RatVec rat_coords(const std::vector<double>& d) {
  poly::RatVec out(d.size());
  for (size_t i = 0; i < d.size(); ++i) {
    const double scaled = std::round(d[i] * 1099511627776.0);
    poly::Rat r(scaled);
    r /= 1099511627776L;
    out[i] = r;
  }
  return out;
}

Instance scan_one_pair_sample(const System& s, const System& r,
                              const std::string& id, Rng& rng,
                              const ScanConfig& cfg, const LpPair& lp) {
  Instance inst;
  inst.id = id;
  const double start = now_ms();
  OracleConfig ocfg;
  ocfg.tol = cfg.tol;
  ocfg.seed = rng.next_u64();
  ocfg.samples = 16;
  auto xo = sample_min_member(s, r, 1, rng, cfg.tol);
  if (!xo) {
    inst.verdict = "UNDECIDED";
    inst.route = "sampling";
    inst.time_ms = now_ms() - start;
    return inst;
  }
  auto vmax = tensor::max_member(*xo, ocfg);
  inst.grounded = vmax.grounded;
  inst.value = vmax.value;
  inst.route = vmax.route;
  inst.certificate_digest = digest_verdict(vmax);
  if (vmax.status == Membership::MEMBER)
    inst.verdict = "AGREE";
  else if (vmax.status == Membership::UNDECIDED)
    inst.verdict = "GAP";
  else {
    const bool ok = tensor::recheck_separation(*xo, vmax, true,
                                               cfg.recheck_count,
                                               rng.next_u64(), cfg.tol);
    inst.verdict = ok ? "WITNESS" : "RECHECK_FAILED";
  }
  // Exact-layer consistency on abelian pairs: a certified max MEMBER must be
  // inside the min cone; a certified NON_MEMBER must be outside the product
  // cone.
  if (lp.available && inst.verdict != "UNDECIDED") {
    auto d = rat_coords(abelian_coords(*xo));
    bool in_min = true;
    for (const auto& v : d)
      if (v < 0) in_min = false;
    if (vmax.status == Membership::MEMBER && vmax.grounded && !in_min)
      inst.verdict = "MISMATCH";
    if (vmax.status == Membership::NON_MEMBER) {
      auto pm = poly::conic_membership(lp.products, d);
      if (pm.member) inst.verdict = "MISMATCH";
    }
  }
  inst.time_ms = now_ms() - start;
  return inst;
}

}  // namespace

Report np_test(const MatrixSystem& s, NpVariant which, const ScanConfig& cfg) {
  const MatrixSystem w = which == NpVariant::W6 ? opsys::make_W(6)
                                                : opsys::make_W23();
  Report rep;
  rep.harness = "np_test";
  rep.config = {{"system", s.name},
                {"test_system", w.name},
                {"samples", std::to_string(cfg.samples)},
                {"tol", fmt(cfg.tol)},
                {"seed", std::to_string(cfg.seed)}};
  const double t0 = now_ms();
  const LpPair lp = lp_pair_data(System(s), System(w));
  Rng master(cfg.seed ^ 0x6e70ULL);
  rep.instances = run_indexed(cfg.samples, [&](int idx) -> Instance {
    Rng rng = master.child(idx);
    return scan_one_pair_sample(System(s), System(w),
                                s.name + "|" + w.name + "|s" +
                                    std::to_string(idx),
                                rng, cfg, lp);
  });
  summarize(&rep);
  rep.total_time_ms = now_ms() - t0;
  return rep;
}

Report quasi_nuclear_scan(const System& s, const Catalog& matrix_systems,
                          const ScanConfig& cfg) {
  Report rep;
  rep.harness = "quasi_nuclear_scan";
  rep.config = {{"system", opsys::system_name(s)},
                {"samples", std::to_string(cfg.samples)},
                {"tol", fmt(cfg.tol)},
                {"seed", std::to_string(cfg.seed)}};
  const double t0 = now_ms();

  struct Task {
    int entry;
    int sample;
    bool ordering;  // ordering-direction task (max generator -> min check)
  };
  std::vector<Task> tasks;
  for (size_t e = 0; e < matrix_systems.entries.size(); ++e) {
    if (!std::holds_alternative<MatrixSystem>(matrix_systems.entries[e].system))
      continue;
    for (int t = 0; t < cfg.samples; ++t) {
      tasks.push_back({static_cast<int>(e), t, true});
      tasks.push_back({static_cast<int>(e), t, false});
    }
  }
  Rng master(cfg.seed ^ 0x9aadULL);
  rep.instances = run_indexed(
      static_cast<int>(tasks.size()), [&](int idx) -> Instance {
        const auto& task = tasks[idx];
        const auto& entry = matrix_systems.entries[task.entry];
        Rng rng = master.child(idx);
        if (task.ordering) {
          Instance inst;
          inst.id = opsys::system_name(s) + "|" + entry.id + "|ord" +
                    std::to_string(task.sample);
          const double start = now_ms();
          auto gens =
              tensor::sample_max_generators(s, entry.system, 1, rng.next_u64());
          OracleConfig ocfg;
          ocfg.tol = cfg.tol;
          ocfg.seed = rng.next_u64();
          auto v = tensor::min_member(gens[0], ocfg);
          inst.grounded = v.grounded;
          inst.value = v.value;
          inst.route = v.route;
          inst.verdict = v.status == Membership::MEMBER
                             ? "AGREE"
                             : (v.status == Membership::UNDECIDED ? "UNDECIDED"
                                                                  : "MISMATCH");
          inst.time_ms = now_ms() - start;
          return inst;
        }
        const LpPair lp = lp_pair_data(s, entry.system);
        return scan_one_pair_sample(
            s, entry.system,
            opsys::system_name(s) + "|" + entry.id + "|s" +
                std::to_string(task.sample),
            rng, cfg, lp);
      });
  summarize(&rep);
  rep.total_time_ms = now_ms() - t0;
  return rep;
}

// ---------------------------------------------------------------------------
// LP layer
// ---------------------------------------------------------------------------

std::vector<std::vector<long>> lp_extreme_rays(const MatrixSystem& fs) {
  if (!fs.abelian || !fs.weights)
    throw Error("MALFORMED_INPUT",
                "extreme rays need a function system with integer weights");
  poly::RatMat rows;
  for (const auto& w : *fs.weights) rows.push_back(poly::from_integers(w));
  auto rays = poly::extreme_rays(rows, fs.n);
  std::vector<std::vector<long>> out;
  for (const auto& r : rays) {
    std::vector<long> v;
    for (const auto& x : r) v.push_back(static_cast<long>(x.get_d()));
    out.push_back(std::move(v));
  }
  return out;
}

Report lp_cross_validate(const MatrixSystem& s, const MatrixSystem& t,
                         const ScanConfig& cfg) {
  Report rep;
  rep.harness = "lp_cross_validate";
  rep.config = {{"left", s.name},
                {"right", t.name},
                {"samples", std::to_string(cfg.samples)},
                {"tol", fmt(cfg.tol)},
                {"seed", std::to_string(cfg.seed)}};
  const double t0 = now_ms();
  const LpPair lp = lp_pair_data(System(s), System(t));
  if (!lp.available)
    throw Error("MALFORMED_INPUT", "lp_cross_validate needs abelian systems");

  // Integral subspace basis for exact sampling.
  poly::RatMat wa, wb;
  for (const auto& w : *s.weights) wa.push_back(poly::from_integers(w));
  for (const auto& w : *t.weights) wb.push_back(poly::from_integers(w));
  auto ka = poly::kernel_basis(wa, s.n);
  auto kb = poly::kernel_basis(wb, t.n);
  std::vector<std::vector<long>> subspace;  // integral basis of span(S (x) T)
  for (const auto& u : ka)
    for (const auto& v : kb) {
      auto tens = poly::tensor(u, v);
      std::vector<long> z;
      for (const auto& x : tens) z.push_back(static_cast<long>(x.get_d()));
      subspace.push_back(std::move(z));
    }

  // Deterministic gap probe for a pair of two-block W systems: the box
  // pattern c[(u,s)][(v,t)] = [t == s + uv mod m] satisfies both marginal
  // constraints but correlates the blocks too strongly to be a sum of ray
  // products (for W4 x W4 this is the box at the heart of the planted
  // square-cone gap). Membership is still decided exactly below.
  std::optional<std::vector<long>> box_probe;
  auto two_block = [](const MatrixSystem& fs) {
    if (!fs.weights || fs.weights->size() != 1 || fs.n % 2 != 0) return false;
    const auto& w = (*fs.weights)[0];
    for (int i = 0; i < fs.n; ++i)
      if (w[i] != (i < fs.n / 2 ? 1 : -1)) return false;
    return true;
  };
  if (two_block(s) && two_block(t) && s.n == t.n) {
    const int m = s.n / 2;
    std::vector<long> box(s.n * t.n, 0);
    for (int u = 0; u < 2; ++u)
      for (int v = 0; v < 2; ++v)
        for (int a = 0; a < m; ++a)
          for (int b = 0; b < m; ++b)
            if ((a + u * v) % m == b) box[(u * m + a) * t.n + (v * m + b)] = 1;
    box_probe = std::move(box);
  }

  Rng master(cfg.seed ^ 0x17c5ULL);
  const int n_total = s.n * t.n;
  rep.instances = run_indexed(cfg.samples, [&](int idx) -> Instance {
    Instance inst;
    inst.id = s.name + "x" + t.name + "|s" + std::to_string(idx);
    const double start = now_ms();
    Rng rng = master.child(idx);
    // Three pools: product members, integral min members, outside-min; the
    // first sample is the box probe when available.
    std::vector<long> coords(n_total, 0);
    const int pool = static_cast<int>(rng.below(3));
    if (idx == 0 && box_probe) {
      coords = *box_probe;
    } else if (pool == 0) {
      const int terms = 1 + static_cast<int>(rng.below(3));
      for (int a = 0; a < terms; ++a) {
        const auto& g = lp.products[rng.below(lp.products.size())];
        const long w = 1 + static_cast<long>(rng.below(3));
        for (int i = 0; i < n_total; ++i)
          coords[i] += w * static_cast<long>(g[i].get_d());
      }
    } else {
      std::vector<long> z(n_total, 0);
      long zmin = 0;
      for (const auto& dir : subspace) {
        const long w = static_cast<long>(rng.below(5)) - 2;
        for (int i = 0; i < n_total; ++i) z[i] += w * dir[i];
      }
      for (long v : z) zmin = std::min(zmin, v);
      if (pool == 1) {
        // Shift exactly onto the boundary of the min cone (some coordinate
        // is zero); gap vectors live there, not in the interior.
        for (int i = 0; i < n_total; ++i) coords[i] = z[i] - zmin;
      } else {
        coords = z;  // usually leaves the min cone
      }
    }
    poly::RatVec xq(n_total);
    for (int i = 0; i < n_total; ++i) xq[i] = coords[i];
    bool lp_min = true;
    for (int i = 0; i < n_total; ++i)
      if (coords[i] < 0) lp_min = false;
    auto lp_prod = poly::conic_membership(lp.products, xq);

    // Tensor-layer verdicts on the same element.
    HermMat amb(n_total);
    for (int i = 0; i < n_total; ++i) amb.set(i, i, static_cast<double>(coords[i]));
    TensorElement x = tensor::embed_concrete(s, t, amb, 1);
    OracleConfig ocfg;
    ocfg.tol = cfg.tol;
    ocfg.seed = rng.next_u64();
    auto vmin = tensor::min_member(x, ocfg);
    auto vmax = tensor::max_member(x, ocfg);
    inst.value = vmax.value;
    inst.route = vmax.route;
    inst.grounded = vmax.grounded;
    inst.certificate_digest = digest_verdict(vmax);

    bool mismatch = false;
    if (std::abs(vmin.value) > 10 * cfg.tol &&
        (vmin.status == Membership::MEMBER) != lp_min)
      mismatch = true;
    if (vmax.status == Membership::MEMBER && vmax.grounded && !lp_min)
      mismatch = true;
    if (vmax.status == Membership::NON_MEMBER && lp_prod.member)
      mismatch = true;
    if (mismatch) {
      inst.verdict = "MISMATCH";
    } else if (lp_min && !lp_prod.member) {
      inst.verdict = "GAP";  // strict region between product and min cones
      std::vector<double> f;
      for (const auto& v : lp_prod.farkas) f.push_back(-v.get_d());
      inst.certificate_digest = digest_doubles(f);
    } else {
      inst.verdict = "AGREE";
    }
    inst.time_ms = now_ms() - start;
    return inst;
  });
  summarize(&rep);
  rep.total_time_ms = now_ms() - t0;
  return rep;
}

// ---------------------------------------------------------------------------
// witness_search
// ---------------------------------------------------------------------------

WitnessResult witness_search(const System& s, const System& t, int budget,
                             std::uint64_t seed, double tol) {
  WitnessResult out;
  out.report.harness = "witness_search";
  out.report.config = {{"left", opsys::system_name(s)},
                       {"right", opsys::system_name(t)},
                       {"budget", std::to_string(budget)},
                       {"seed", std::to_string(seed)}};
  const double t0 = now_ms();
  Rng rng(seed ^ 0x71e55ULL);
  for (int b = 0; b < budget; ++b) {
    Instance inst;
    inst.id = "try" + std::to_string(b);
    const double start = now_ms();
    OracleConfig ocfg;
    ocfg.tol = tol;
    ocfg.seed = rng.next_u64();
    auto xo = sample_min_member(s, t, 1, rng, tol);
    if (!xo) {
      inst.verdict = "UNDECIDED";
      inst.time_ms = now_ms() - start;
      out.report.instances.push_back(inst);
      continue;
    }
    auto vmax = tensor::max_member(*xo, ocfg);
    inst.grounded = vmax.grounded;
    inst.value = vmax.value;
    inst.route = vmax.route;
    if (vmax.status == Membership::NON_MEMBER &&
        tensor::recheck_separation(*xo, vmax, true, 1000, rng.next_u64(), tol)) {
      inst.verdict = "WITNESS";
      inst.certificate_digest = digest_verdict(vmax);
      out.report.instances.push_back(inst);
      out.found = true;
      out.witness = *xo;
      out.functional = vmax.functional;
      break;
    }
    inst.verdict = vmax.status == Membership::MEMBER ? "AGREE" : "UNDECIDED";
    out.report.instances.push_back(inst);
  }
  summarize(&out.report);
  out.report.summary.note = out.found ? "witness found" : "NONE_FOUND";
  out.report.total_time_ms = now_ms() - t0;
  return out;
}

WitnessResult witness_search_planted(const MatrixSystem& fs, int budget,
                                     std::uint64_t seed) {
  WitnessResult out;
  out.report.harness = "witness_search_planted";
  out.report.config = {{"system", fs.name},
                       {"budget", std::to_string(budget)},
                       {"seed", std::to_string(seed)}};
  const double t0 = now_ms();
  if (!fs.abelian || !fs.weights)
    throw Error("MALFORMED_INPUT", "planted search needs a function system");
  poly::RatMat rows;
  for (const auto& w : *fs.weights) rows.push_back(poly::from_integers(w));
  auto rays = poly::extreme_rays(rows, fs.n);
  // Outer cone: the full product cone of the pair (fs, fs); inner cone drops
  // the first ray product. The dropped generator itself is the planted gap.
  std::vector<poly::RatVec> outer, inner;
  for (size_t i = 0; i < rays.size(); ++i)
    for (size_t j = 0; j < rays.size(); ++j) {
      auto prod = poly::tensor(rays[i], rays[j]);
      outer.push_back(prod);
      if (!(i == 0 && j == 0)) inner.push_back(prod);
    }
  Rng rng(seed ^ 0x9147ULL);
  for (int b = 0; b < budget; ++b) {
    Instance inst;
    inst.id = "try" + std::to_string(b);
    const double start = now_ms();
    // Sample outer members; the planted generator goes first.
    poly::RatVec x(fs.n * fs.n, poly::Rat(0));
    if (b == 0) {
      x = outer[0];
    } else {
      const int terms = 1 + static_cast<int>(rng.below(3));
      for (int a = 0; a < terms; ++a) {
        const auto& g = outer[rng.below(outer.size())];
        const long w = 1 + static_cast<long>(rng.below(3));
        for (size_t i = 0; i < x.size(); ++i) x[i] += g[i] * w;
      }
    }
    auto res = poly::conic_membership(inner, x);
    if (!res.member) {
      // Verify the Farkas functional exactly: nonnegative on the inner cone,
      // strictly positive on x.
      poly::Rat fx(0);
      bool ok = true;
      for (size_t i = 0; i < x.size(); ++i) fx += res.farkas[i] * x[i];
      if (fx <= 0) ok = false;
      for (const auto& g : inner) {
        poly::Rat fg(0);
        for (size_t i = 0; i < x.size(); ++i) fg += res.farkas[i] * g[i];
        if (fg > 0) ok = false;
      }
      inst.verdict = ok ? "WITNESS" : "RECHECK_FAILED";
      inst.grounded = true;
      std::vector<double> f;
      for (const auto& v : res.farkas) f.push_back(-v.get_d());
      inst.certificate_digest = digest_doubles(f);
      inst.time_ms = now_ms() - start;
      out.report.instances.push_back(inst);
      if (ok) {
        out.found = true;
        out.functional = f;
        break;
      }
      continue;
    }
    inst.verdict = "AGREE";
    inst.time_ms = now_ms() - start;
    out.report.instances.push_back(inst);
  }
  summarize(&out.report);
  out.report.summary.note = out.found ? "witness found" : "NONE_FOUND";
  out.report.total_time_ms = now_ms() - t0;
  return out;
}

}  // namespace opsystk::experiments
