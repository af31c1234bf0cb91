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

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "opsystk/linalg.hpp"

namespace opsystk::sdp {

using linalg::HermMat;

enum class BlockKind { PSD, FREE };

struct BlockSpec {
  int dim;  // complex Hermitian dimension
  BlockKind kind;
};

// One Hermitian coefficient per touched block; blocks not listed are zero.
struct LinTerm {
  int block;
  HermMat coeff;
};

struct Constraint {
  std::vector<LinTerm> terms;
  double rhs;
};

enum class Sense { MIN, MAX };

// min/max sum_b tr(C_b X_b)  s.t.  sum_b tr(A_ib X_b) = b_i,
// X_b >= 0 on PSD blocks, X_b free Hermitian on FREE blocks.
struct SdpProblem {
  std::vector<BlockSpec> blocks;
  std::vector<LinTerm> objective;
  std::vector<Constraint> constraints;
  Sense sense = Sense::MIN;
};

struct SdpConfig {
  double tol = 1e-8;
  int max_iter = 200;
  std::uint64_t seed = 0;  // reserved; the solve path is deterministic
};

enum class SdpStatus { OPTIMAL, PRIMAL_INFEASIBLE, DUAL_INFEASIBLE, STALLED };

const char* to_string(SdpStatus s);

struct SdpSolution {
  SdpStatus status = SdpStatus::STALLED;
  std::vector<HermMat> X;        // primal blocks
  std::vector<double> y;         // constraint multipliers
  std::vector<HermMat> S;        // dual slacks (zero on FREE blocks)
  double primal_obj = 0.0;       // in the problem's own sense
  double dual_obj = 0.0;
  double gap = 0.0;              // relative gap
  double primal_residual = 0.0;  // relative
  double dual_residual = 0.0;
  int iterations = 0;
  // Farkas-type certificates; populated for the matching status.
  std::vector<double> farkas_y;  // primal infeasibility: b^T y = 1, -sum y A >= 0
  std::vector<HermMat> farkas_X;  // dual infeasibility: A(X)=0, <C,X> = -1, X >= 0
  // Per-iterate sum_b <X_b, S_b>; nonnegative on every iterate.
  std::vector<double> xs_inner_trace;
  std::vector<std::pair<double, double>> objective_trace;  // (pobj, dobj), MIN sense
};

SdpSolution solve(const SdpProblem& p, const SdpConfig& cfg = {});

struct PlantSpec {
  // One entry per block: complex dim and kind.
  std::vector<BlockSpec> blocks;
  int num_constraints = 6;
  bool zero_primal = false;  // plant X* = 0 (degenerate corner)
};

// Constructs X* >= 0, y*, S* = C - sum y A >= 0 with X* S* = 0, so strong
// duality pins the optimum exactly.
std::pair<SdpProblem, double> plant_instance(std::uint64_t seed,
                                             const PlantSpec& spec);

// Re-checks feasibility residuals and gap (or the Farkas certificate) from the
// problem data alone; true iff everything is within 10x the solver tolerance.
bool verify_certificate(const SdpProblem& p, const SdpSolution& sol,
                        double tol = 1e-8);

// Plain-text sparse triplet dump, one line per nonzero:
//   <matrix> <block> <row> <col> <re> <im>
// where <matrix> is "C", "A<i>" or "RHS" (rhs lines carry the value in <re>).
void dump_problem(std::ostream& os, const SdpProblem& p);

}  // namespace opsystk::sdp
