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

// JSON dialects. Complex entries are always [re, im] pairs; a matrix is an
// array of rows. System kinds: "matrix_system" (ambient + basis),
// "function_system" (ambient + weights), "quotient" (ambient + null_basis),
// "function_quotient" (ambient + null_weights), "builtin" (name).

#pragma once

#include <string>

#include "json.hpp"
#include "opsystk/experiments.hpp"
#include "opsystk/opsys.hpp"
#include "opsystk/tensor.hpp"

namespace opsystk::io {

using json = nlohmann::ordered_json;

json herm_to_json(const linalg::HermMat& h);
linalg::HermMat herm_from_json(const json& j);

json system_to_json(const opsys::System& s);
opsys::System system_from_json(const json& j);

json tensor_element_to_json(const tensor::TensorElement& x);
tensor::TensorElement tensor_element_from_json(const json& j);

struct ElementFile {
  opsys::System system;
  opsys::LevelElement element;
};
ElementFile element_from_json(const json& j);

struct CpMapFile {
  opsys::System source;
  opsys::System target;
  linalg::RMat images;
};
CpMapFile cp_map_from_json(const json& j);

struct ExtensionFile {
  opsys::MatrixSystem sub;
  opsys::MatrixSystem super;
  opsys::MatrixSystem target;
  linalg::RMat images;
};
ExtensionFile extension_from_json(const json& j);

struct LiftFile {
  opsys::MatrixSystem left;
  opsys::QuotientSystem quotient;
  tensor::TensorElement element;
  double epsilon = 1e-6;
};
LiftFile lift_from_json(const json& j);

experiments::Catalog catalog_from_json(const json& j);

json verdict_to_json(const opsys::Verdict& v);
json report_to_json(const experiments::Report& r, bool include_times = true);
// Canonical bytes with wall-times stripped; the determinism comparison.
std::string canonical_report(const experiments::Report& r);

// Parses with line/column reporting mapped onto Error("MALFORMED_INPUT").
json parse_or_throw(const std::string& text);

}  // namespace opsystk::io
