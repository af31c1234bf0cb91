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

// Scan harnesses over system catalogs: WEP detection through matrix
// quotients, ucp extension scans, the Namioka-Phelps W6 test, quasi-nuclearity
// scans and the exact polyhedral cross-validation layer. Reports are
// reproducible from (catalog, seed, config); instances execute independently
// (OPSYSTK_THREADS caps parallelism) and are assembled in index order.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "opsystk/opsys.hpp"
#include "opsystk/polyhedral.hpp"
#include "opsystk/tensor.hpp"

namespace opsystk::experiments {

using opsys::MatrixSystem;
using opsys::Membership;
using opsys::QuotientSystem;
using opsys::System;
using tensor::TensorElement;

struct CatalogEntry {
  std::string id;
  System system;
};

struct Catalog {
  std::vector<CatalogEntry> entries;

  // M_n (n <= 4), l_n^inf (n <= 8), W4/W6/W8, W23, l6_inf/span{(1,1,1,-1,-1,-1)}.
  static Catalog builtins();
  // Random quotients M_n/J with traceless (hence null) J of dimension j_dim.
  static Catalog random_quotients(int count, int ambient, int j_dim,
                                  std::uint64_t seed);
  static Catalog random_matrix_systems(int count, int ambient, int generators,
                                       std::uint64_t seed);
  void append(const Catalog& other);
};

std::optional<System> find_builtin(const std::string& name);

struct Instance {
  std::string id;
  std::string verdict;  // oracle verdict or harness-level outcome
  bool grounded = false;
  double value = 0.0;
  std::string route;
  std::uint64_t certificate_digest = 0;
  double time_ms = 0.0;
};

struct Summary {
  int total = 0;
  int agreed = 0;
  int witnesses = 0;
  int undecided = 0;
  int mismatches = 0;
  int failures = 0;  // certificates that did not re-verify
  std::string note;
};

struct Report {
  std::string harness;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<Instance> instances;
  Summary summary;
  double total_time_ms = 0.0;
};

struct ScanConfig {
  std::vector<int> levels = {1};
  int samples = 20;
  double tol = 1e-7;
  std::uint64_t seed = 0;
  int recheck_count = 100;  // generators per certificate re-verification
};

// WEP harness: sampled min-members of S (x) (M_n/J) tested for
// max-membership; disagreement witnesses are re-verified separations.
Report wep_scan(const MatrixSystem& s, const Catalog& quotients,
                const ScanConfig& cfg);

// Relative weak injectivity harness: sampled ucp maps S1 -> R extended to
// S2; any failure is converted to a max-positive functional without positive
// extension and re-verified.
Report wri_scan(const MatrixSystem& s1, const MatrixSystem& s2,
                const Catalog& targets, const ScanConfig& cfg);

enum class NpVariant { W6, W23 };
// Namioka-Phelps test: min-members of S (x) W tested against the sandwich max
// oracle; UNDECIDED reported as gaps, never coerced.
Report np_test(const MatrixSystem& s, NpVariant which, const ScanConfig& cfg);

// Quasi-nuclearity harness: min = max tested against a catalog of matrix
// systems, ordering direction first.
Report quasi_nuclear_scan(const System& s, const Catalog& matrix_systems,
                          const ScanConfig& cfg);

// Extreme rays of a function system's positive cone (exact arithmetic).
std::vector<std::vector<long>> lp_extreme_rays(const MatrixSystem& fs);

// Exact LP layer vs the SDP oracles at level 1 on an abelian pair. A mismatch
// is a provable contradiction (min disagreement, or a certified max verdict
// contradicting the exact cones); product/min gap samples are recorded.
Report lp_cross_validate(const MatrixSystem& s, const MatrixSystem& t,
                         const ScanConfig& cfg);

// Alternates min-member sampling and the max dual SDP until a re-verified
// separation (x, f) appears; NONE_FOUND with coverage statistics otherwise.
struct WitnessResult {
  bool found = false;
  TensorElement witness;
  std::vector<double> functional;
  Report report;
};
WitnessResult witness_search(const System& s, const System& t, int budget,
                             std::uint64_t seed, double tol = 1e-7);

// Planted self-test: the outer cone is the min cone of a function system
// pair, the inner cone drops one extreme-ray product; the search must find
// and re-verify the planted witness.
WitnessResult witness_search_planted(const MatrixSystem& fs, int budget,
                                     std::uint64_t seed);

// FNV-1a digest of doubles rounded at 1e-12 (certificate digests).
std::uint64_t digest_doubles(const std::vector<double>& vals);

int thread_budget();  // OPSYSTK_THREADS, defaulting to the hardware count

}  // namespace opsystk::experiments
