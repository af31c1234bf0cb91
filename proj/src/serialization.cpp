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

#include "opsystk/serialization.hpp"

#include <algorithm>

namespace opsystk::io {

using linalg::CMat;
using linalg::HermMat;
using opsys::MatrixSystem;
using opsys::QuotientSystem;
using opsys::System;

namespace {

std::string type_error(const json& j, const std::string& what) {
  return what + " (got: " + j.dump().substr(0, 80) + ")";
}

double num(const json& j, const std::string& what) {
  if (!j.is_number()) throw Error("MALFORMED_INPUT", type_error(j, what));
  return j.get<double>();
}

CMat cmat_from_json(const json& j) {
  if (!j.is_array() || j.empty())
    throw Error("MALFORMED_INPUT", type_error(j, "matrix must be a row array"));
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  CMat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != cols)
      throw Error("MALFORMED_INPUT", "ragged matrix rows");
    for (int c = 0; c < cols; ++c) {
      const json& e = j[r][c];
      if (e.is_number()) {
        m.at(r, c) = cplx(e.get<double>(), 0.0);
      } else if (e.is_array() && e.size() == 2) {
        m.at(r, c) = cplx(num(e[0], "re"), num(e[1], "im"));
      } else {
        throw Error("MALFORMED_INPUT", type_error(e, "entry must be [re, im]"));
      }
    }
  }
  return m;
}

json cmat_to_json(const CMat& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c)
      row.push_back({m.at(r, c).real(), m.at(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::vector<long>> weights_from_json(const json& j) {
  std::vector<std::vector<long>> out;
  if (!j.is_array()) throw Error("MALFORMED_INPUT", "weights must be an array");
  for (const auto& row : j) {
    std::vector<long> r;
    for (const auto& v : row) {
      if (!v.is_number_integer())
        throw Error("MALFORMED_INPUT", "weights must be integers");
      r.push_back(v.get<long>());
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

json herm_to_json(const HermMat& h) { return cmat_to_json(h.mat()); }

HermMat herm_from_json(const json& j) {
  return HermMat::from_cmat(cmat_from_json(j), 1e-8);
}

json system_to_json(const System& s) {
  json j;
  if (std::holds_alternative<MatrixSystem>(s)) {
    const auto& m = std::get<MatrixSystem>(s);
    if (m.abelian && m.weights) {
      j["kind"] = "function_system";
      j["ambient"] = m.n;
      j["weights"] = *m.weights;
    } else {
      j["kind"] = "matrix_system";
      j["ambient"] = m.n;
      json basis = json::array();
      for (const auto& b : m.basis) basis.push_back(herm_to_json(b));
      j["basis"] = std::move(basis);
    }
    j["name"] = m.name;
    return j;
  }
  const auto& q = std::get<QuotientSystem>(s);
  if (q.diag_null_weights) {
    j["kind"] = "function_quotient";
    j["ambient"] = q.n;
    j["null_weights"] = *q.diag_null_weights;
  } else {
    j["kind"] = "quotient";
    j["ambient"] = q.n;
    json nb = json::array();
    for (const auto& b : q.null.basis) nb.push_back(herm_to_json(b));
    j["null_basis"] = std::move(nb);
  }
  j["name"] = q.name;
  return j;
}

System system_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw Error("MALFORMED_INPUT", "system object needs a \"kind\"");
  const std::string kind = j["kind"].get<std::string>();
  const std::string name = j.value("name", std::string());
  if (kind == "builtin") {
    auto s = experiments::find_builtin(j.value("name", std::string()));
    if (!s) throw Error("MALFORMED_INPUT", "unknown builtin system");
    return *s;
  }
  if (kind == "matrix_system") {
    const int n = j.at("ambient").get<int>();
    std::vector<CMat> gens;
    for (const auto& b : j.at("basis")) gens.push_back(cmat_from_json(b));
    return System(opsys::make_matrix_system(n, gens, name));
  }
  if (kind == "function_system") {
    const int n = j.at("ambient").get<int>();
    return System(
        opsys::make_function_system(n, weights_from_json(j.at("weights")), name));
  }
  if (kind == "quotient") {
    const int n = j.at("ambient").get<int>();
    std::vector<CMat> span;
    for (const auto& b : j.at("null_basis")) span.push_back(cmat_from_json(b));
    auto null = opsys::make_null_subspace(n, span);
    return System(opsys::make_quotient(n, std::move(null), name));
  }
  if (kind == "function_quotient") {
    const int n = j.at("ambient").get<int>();
    return System(opsys::make_function_quotient(
        n, weights_from_json(j.at("null_weights")), name));
  }
  throw Error("MALFORMED_INPUT", "unknown system kind \"" + kind + "\"");
}

json tensor_element_to_json(const tensor::TensorElement& x) {
  json j;
  j["kind"] = "tensor_element";
  j["left"] = system_to_json(x.left);
  j["right"] = system_to_json(x.right);
  j["level"] = x.level;
  json c = json::array();
  for (const auto& row : x.coeff) {
    json r = json::array();
    for (const auto& m : row) r.push_back(herm_to_json(m));
    c.push_back(std::move(r));
  }
  j["coeffs"] = std::move(c);
  return j;
}

tensor::TensorElement tensor_element_from_json(const json& j) {
  tensor::TensorElement x;
  x.left = system_from_json(j.at("left"));
  x.right = system_from_json(j.at("right"));
  x.level = j.value("level", 1);
  const int dl = opsys::system_dim(x.left), dr = opsys::system_dim(x.right);
  const auto& c = j.at("coeffs");
  if (static_cast<int>(c.size()) != dl)
    throw Error("MALFORMED_INPUT", "coeffs row count must match left dim");
  x.coeff.assign(dl, std::vector<HermMat>(dr));
  for (int k = 0; k < dl; ++k) {
    if (static_cast<int>(c[k].size()) != dr)
      throw Error("MALFORMED_INPUT", "coeffs column count must match right dim");
    for (int l = 0; l < dr; ++l) {
      if (c[k][l].is_number()) {
        HermMat h(x.level);
        if (x.level != 1)
          throw Error("MALFORMED_INPUT", "scalar coeff on a level > 1 element");
        h.set(0, 0, c[k][l].get<double>());
        x.coeff[k][l] = h;
      } else {
        x.coeff[k][l] = herm_from_json(c[k][l]);
        if (x.coeff[k][l].dim() != x.level)
          throw Error("MALFORMED_INPUT", "coeff dimension must equal level");
      }
    }
  }
  return x;
}

ElementFile element_from_json(const json& j) {
  ElementFile out;
  out.system = system_from_json(j.at("system"));
  out.element.level = j.value("level", 1);
  const int d = opsys::system_dim(out.system);
  const auto& c = j.at("coeffs");
  if (static_cast<int>(c.size()) != d)
    throw Error("MALFORMED_INPUT", "coeff count must match system dimension");
  for (const auto& e : c) {
    if (e.is_number()) {
      if (out.element.level != 1)
        throw Error("MALFORMED_INPUT", "scalar coeff on a level > 1 element");
      HermMat h(1);
      h.set(0, 0, e.get<double>());
      out.element.coeff.push_back(h);
    } else {
      out.element.coeff.push_back(herm_from_json(e));
    }
  }
  return out;
}

namespace {

linalg::RMat images_from_json(const json& j, int rows, int cols) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows)
    throw Error("MALFORMED_INPUT", "images must have one row per target basis");
  linalg::RMat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(j[r].size()) != cols)
      throw Error("MALFORMED_INPUT", "images row length must match source dim");
    for (int c = 0; c < cols; ++c) m.at(r, c) = num(j[r][c], "image entry");
  }
  return m;
}

MatrixSystem require_matrix(const System& s, const std::string& what) {
  if (!std::holds_alternative<MatrixSystem>(s))
    throw Error("MALFORMED_INPUT", what + " must be a matrix system");
  return std::get<MatrixSystem>(s);
}

}  // namespace

CpMapFile cp_map_from_json(const json& j) {
  CpMapFile out;
  out.source = system_from_json(j.at("source"));
  out.target = system_from_json(j.at("target"));
  out.images = images_from_json(j.at("images"), opsys::system_dim(out.target),
                                opsys::system_dim(out.source));
  return out;
}

ExtensionFile extension_from_json(const json& j) {
  ExtensionFile out;
  out.sub = require_matrix(system_from_json(j.at("sub")), "sub");
  out.super = require_matrix(system_from_json(j.at("super")), "super");
  out.target = require_matrix(system_from_json(j.at("target")), "target");
  out.images =
      images_from_json(j.at("images"), out.target.dim(), out.sub.dim());
  return out;
}

LiftFile lift_from_json(const json& j) {
  LiftFile out;
  out.left = require_matrix(system_from_json(j.at("left")), "left");
  auto q = system_from_json(j.at("quotient"));
  if (!std::holds_alternative<QuotientSystem>(q))
    throw Error("MALFORMED_INPUT", "lift quotient must be a quotient system");
  out.quotient = std::get<QuotientSystem>(q);
  out.epsilon = j.value("epsilon", 1e-6);
  tensor::TensorElement x;
  x.left = System(out.left);
  x.right = System(out.quotient);
  x.level = 1;
  const int dl = out.left.dim(), dr = out.quotient.dim();
  const auto& c = j.at("coeffs");
  if (static_cast<int>(c.size()) != dl)
    throw Error("MALFORMED_INPUT", "lift coeffs must match left dim");
  x.coeff.assign(dl, std::vector<HermMat>(dr));
  for (int k = 0; k < dl; ++k) {
    if (static_cast<int>(c[k].size()) != dr)
      throw Error("MALFORMED_INPUT", "lift coeff rows must match quotient dim");
    for (int l = 0; l < dr; ++l) {
      HermMat h(1);
      h.set(0, 0, num(c[k][l], "lift coeff"));
      x.coeff[k][l] = h;
    }
  }
  out.element = std::move(x);
  return out;
}

experiments::Catalog catalog_from_json(const json& j) {
  experiments::Catalog cat;
  if (j.contains("entries")) {
    int idx = 0;
    for (const auto& e : j.at("entries")) {
      auto sys = system_from_json(e);
      std::string id = opsys::system_name(sys);
      if (id.empty()) id = "entry" + std::to_string(idx);
      cat.entries.push_back({id, std::move(sys)});
      ++idx;
    }
  }
  if (j.contains("random_quotients")) {
    const auto& r = j.at("random_quotients");
    cat.append(experiments::Catalog::random_quotients(
        r.value("count", 1), r.value("ambient", 3), r.value("dim", 1),
        r.value("seed", 0)));
  }
  if (j.contains("random_matrix_systems")) {
    const auto& r = j.at("random_matrix_systems");
    cat.append(experiments::Catalog::random_matrix_systems(
        r.value("count", 1), r.value("ambient", 3), r.value("generators", 1),
        r.value("seed", 0)));
  }
  if (cat.entries.empty())
    throw Error("MALFORMED_INPUT", "catalog has no entries");
  return cat;
}

json verdict_to_json(const opsys::Verdict& v) {
  json j;
  j["status"] = opsys::to_string(v.status);
  j["grounded"] = v.grounded;
  j["value"] = v.value;
  j["route"] = v.route;
  if (!v.functional.empty()) j["functional"] = v.functional;
  if (v.density) j["density"] = herm_to_json(*v.density);
  if (!v.psd_certificate.empty()) {
    json c = json::array();
    for (const auto& m : v.psd_certificate) c.push_back(herm_to_json(m));
    j["psd_certificate"] = std::move(c);
  }
  return j;
}

json report_to_json(const experiments::Report& r, bool include_times) {
  json j;
  j["harness"] = r.harness;
  json cfg;
  for (const auto& [k, v] : r.config) cfg[k] = v;
  j["config"] = std::move(cfg);
  json instances = json::array();
  for (const auto& i : r.instances) {
    json ji;
    ji["id"] = i.id;
    ji["verdict"] = i.verdict;
    ji["grounded"] = i.grounded;
    ji["value"] = i.value;
    ji["route"] = i.route;
    ji["certificate_digest"] = i.certificate_digest;
    if (include_times) ji["time_ms"] = i.time_ms;
    instances.push_back(std::move(ji));
  }
  j["instances"] = std::move(instances);
  json s;
  s["total"] = r.summary.total;
  s["agreed"] = r.summary.agreed;
  s["witnesses"] = r.summary.witnesses;
  s["undecided"] = r.summary.undecided;
  s["mismatches"] = r.summary.mismatches;
  s["failures"] = r.summary.failures;
  if (!r.summary.note.empty()) s["note"] = r.summary.note;
  j["summary"] = std::move(s);
  if (include_times) j["total_time_ms"] = r.total_time_ms;
  return j;
}

std::string canonical_report(const experiments::Report& r) {
  return report_to_json(r, /*include_times=*/false).dump(2);
}

json parse_or_throw(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Map the byte offset onto line/column for the diagnostics contract.
    size_t line = 1, col = 1;
    for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error("MALFORMED_INPUT",
                "JSON parse error at line " + std::to_string(line) +
                    ", column " + std::to_string(col) + ": " + e.what());
  }
}

}  // namespace opsystk::io
