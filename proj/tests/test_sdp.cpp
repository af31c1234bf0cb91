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
#include <sstream>

#include "doctest.h"
#include "opsystk/sdp.hpp"
#include "test_helpers.hpp"

using namespace opsystk;
using namespace opsystk::sdp;
using linalg::HermMat;

namespace {

// max lambda s.t. [[1, lambda], [lambda, 1]] >= 0.
SdpProblem correlation_problem() {
  SdpProblem p;
  p.blocks = {{2, BlockKind::PSD}, {1, BlockKind::FREE}};
  p.sense = Sense::MAX;
  HermMat e11(2), e22(2), re12(2), im12(2), one(1);
  e11.set(0, 0, 1.0);
  e22.set(1, 1, 1.0);
  re12.set(0, 1, cplx(0.5, 0.0));
  im12.set(0, 1, cplx(0.0, 0.5));
  one.set(0, 0, 1.0);
  p.objective = {{1, one}};
  p.constraints.push_back({{{0, e11}}, 1.0});
  p.constraints.push_back({{{0, e22}}, 1.0});
  Constraint link;
  link.terms = {{0, re12}, {1, one * -1.0}};
  link.rhs = 0.0;
  p.constraints.push_back(link);
  p.constraints.push_back({{{0, im12}}, 0.0});
  return p;
}

}  // namespace

TEST_CASE("solve: 2x2 correlation maximization gives lambda = 1") {
  auto p = correlation_problem();
  auto sol = solve(p);
  REQUIRE(sol.status == SdpStatus::OPTIMAL);
  CHECK(sol.primal_obj == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(verify_certificate(p, sol));
}

TEST_CASE("solve: min tr(X) with tr(X) = 1") {
  SdpProblem p;
  p.blocks = {{3, BlockKind::PSD}};
  p.objective = {{0, HermMat::identity(3)}};
  p.constraints.push_back({{{0, HermMat::identity(3)}}, 1.0});
  auto sol = solve(p);
  REQUIRE(sol.status == SdpStatus::OPTIMAL);
  CHECK(sol.primal_obj == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.dual_obj == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(verify_certificate(p, sol));
}

TEST_CASE("planted instances recover the planted optimum") {
  {
    PlantSpec spec;
    spec.blocks = {{3, BlockKind::PSD}};
    spec.num_constraints = 4;
    auto [p, opt] = plant_instance(0, spec);
    auto sol = solve(p);
    REQUIRE(sol.status == SdpStatus::OPTIMAL);
    CHECK(std::abs(sol.primal_obj - opt) <= 1e-6 * (1.0 + std::abs(opt)));
    CHECK(verify_certificate(p, sol));
  }
  {
    PlantSpec spec;
    spec.blocks = {{2, BlockKind::PSD}, {1, BlockKind::FREE}};
    spec.num_constraints = 5;
    auto [p, opt] = plant_instance(1, spec);
    auto sol = solve(p);
    REQUIRE(sol.status == SdpStatus::OPTIMAL);
    CHECK(std::abs(sol.primal_obj - opt) <= 1e-6 * (1.0 + std::abs(opt)));
    CHECK(verify_certificate(p, sol));
  }
  {
    PlantSpec spec;
    spec.blocks = {{2, BlockKind::PSD}};
    spec.num_constraints = 3;
    spec.zero_primal = true;
    auto [p, opt] = plant_instance(2, spec);
    CHECK(opt == doctest::Approx(0.0));
    auto sol = solve(p);
    REQUIRE(sol.status == SdpStatus::OPTIMAL);
    CHECK(std::abs(sol.primal_obj - opt) <= 1e-6);
  }
}

TEST_CASE("weak duality holds along the iterate trace") {
  PlantSpec spec;
  spec.blocks = {{4, BlockKind::PSD}, {2, BlockKind::PSD}};
  spec.num_constraints = 8;
  auto [p, opt] = plant_instance(7, spec);
  auto sol = solve(p);
  REQUIRE(sol.status == SdpStatus::OPTIMAL);
  CHECK(std::abs(sol.primal_obj - opt) <= 1e-6 * (1.0 + std::abs(opt)));
  REQUIRE(!sol.xs_inner_trace.empty());
  for (double v : sol.xs_inner_trace) CHECK(v >= -1e-12 * (1.0 + std::abs(opt)));
  const auto& last = sol.objective_trace.back();
  CHECK(last.first - last.second >=
        -1e-7 * (1.0 + std::abs(last.first) + std::abs(last.second)));
}

TEST_CASE("verify_certificate rejects a perturbed primal block") {
  PlantSpec spec;
  spec.blocks = {{3, BlockKind::PSD}};
  spec.num_constraints = 4;
  auto [p, opt] = plant_instance(3, spec);
  (void)opt;
  auto sol = solve(p);
  REQUIRE(sol.status == SdpStatus::OPTIMAL);
  REQUIRE(verify_certificate(p, sol));
  HermMat bump(3);
  bump.set(0, 1, cplx(1e-3, 0.0));
  sol.X[0] += bump;
  CHECK_FALSE(verify_certificate(p, sol));
}

TEST_CASE("verify_certificate accepts the empty problem with X = 0") {
  SdpProblem p;
  p.blocks = {{2, BlockKind::PSD}};
  p.objective = {{0, HermMat::identity(2)}};
  SdpSolution sol;
  sol.status = SdpStatus::OPTIMAL;
  sol.X = {HermMat(2)};
  sol.S = {HermMat::identity(2)};
  sol.y = {};
  sol.primal_obj = 0.0;
  sol.dual_obj = 0.0;
  CHECK(verify_certificate(p, sol));
}

TEST_CASE("primal infeasibility yields a verified Farkas certificate") {
  SdpProblem p;
  p.blocks = {{2, BlockKind::PSD}};
  p.objective = {{0, HermMat::identity(2)}};
  p.constraints.push_back({{{0, HermMat::identity(2)}}, -1.0});
  auto sol = solve(p);
  REQUIRE(sol.status == SdpStatus::PRIMAL_INFEASIBLE);
  CHECK(verify_certificate(p, sol));
}

TEST_CASE("dual infeasibility (unbounded primal) yields a verified ray") {
  SdpProblem p;
  p.blocks = {{2, BlockKind::PSD}};
  p.objective = {{0, HermMat::identity(2) * -1.0}};
  auto sol = solve(p);
  REQUIRE(sol.status == SdpStatus::DUAL_INFEASIBLE);
  CHECK(verify_certificate(p, sol));
}

TEST_CASE("solve is deterministic") {
  PlantSpec spec;
  spec.blocks = {{3, BlockKind::PSD}, {1, BlockKind::FREE}};
  spec.num_constraints = 6;
  auto [p, opt] = plant_instance(11, spec);
  (void)opt;
  auto a = solve(p);
  auto b = solve(p);
  CHECK(a.status == b.status);
  CHECK(a.primal_obj == b.primal_obj);  // bitwise
  CHECK(a.dual_obj == b.dual_obj);
  REQUIRE(a.X.size() == b.X.size());
  for (size_t i = 0; i < a.X.size(); ++i)
    for (int r = 0; r < a.X[i].dim(); ++r)
      for (int c = 0; c < a.X[i].dim(); ++c)
        CHECK(a.X[i].at(r, c) == b.X[i].at(r, c));
}

TEST_CASE("dump_problem emits the triplet format") {
  auto p = correlation_problem();
  std::ostringstream os;
  dump_problem(os, p);
  const std::string s = os.str();
  CHECK(s.find("blocks 2") != std::string::npos);
  CHECK(s.find("sense MAX") != std::string::npos);
  CHECK(s.find("A0 0 0 0 1 0") != std::string::npos);
}
