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

#include "opsystk/cli.hpp"

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "opsystk/serialization.hpp"

namespace opsystk::cli {

namespace {

using io::json;
using opsys::Membership;
using opsys::System;

constexpr int kExitMember = 0;
constexpr int kExitNonMember = 1;
constexpr int kExitUndecided = 2;
constexpr int kExitUsage = 64;
constexpr int kExitBadInput = 65;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("MALFORMED_INPUT", "cannot read \"" + path + "\"");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load_json(const std::string& path) {
  return io::parse_or_throw(read_file(path));
}

// Output is built fully, then written once.
void emit(const json& j, const std::string& out_path, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    out << text;
    out.flush();
    return;
  }
  std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("MALFORMED_INPUT", "cannot write \"" + out_path + "\"");
  f << text;
}

int verdict_exit(Membership m) {
  switch (m) {
    case Membership::MEMBER: return kExitMember;
    case Membership::NON_MEMBER: return kExitNonMember;
    case Membership::UNDECIDED: return kExitUndecided;
  }
  return kExitUndecided;
}

int scan_exit(const experiments::Report& r) {
  if (r.summary.witnesses > 0 || r.summary.mismatches > 0 ||
      r.summary.failures > 0)
    return kExitNonMember;
  if (r.summary.undecided > 0) return kExitUndecided;
  return kExitMember;
}

struct CommonFlags {
  double tol = 1e-7;
  int level = 0;  // 0: take from the input file
  int samples = 20;
  std::uint64_t seed = 0;
  int cap = 0;
  std::string out_path;
  std::string catalog_path;

  void attach(CLI::App* cmd, bool with_catalog) {
    cmd->add_option("--tol", tol, "verdict tolerance");
    cmd->add_option("--level", level, "matrix level");
    cmd->add_option("--samples", samples, "samples per instance");
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--cap", cap, "generator size cap");
    cmd->add_option("--out", out_path, "write the report here (default stdout)");
    if (with_catalog)
      cmd->add_option("--catalog", catalog_path, "catalog JSON file")
          ->required();
  }

  experiments::ScanConfig scan_config() const {
    experiments::ScanConfig cfg;
    cfg.tol = tol;
    cfg.samples = samples;
    cfg.seed = seed;
    if (level > 0) cfg.levels = {level};
    return cfg;
  }

  tensor::OracleConfig oracle_config() const {
    tensor::OracleConfig cfg;
    cfg.tol = tol;
    cfg.seed = seed == 0 ? 1 : seed;
    if (cap > 0) cfg.generator_cap = cap;
    cfg.samples = samples;
    return cfg;
  }
};

json config_echo(const CommonFlags& f) {
  json j;
  j["tol"] = f.tol;
  j["samples"] = f.samples;
  j["seed"] = f.seed;
  if (f.level > 0) j["level"] = f.level;
  if (f.cap > 0) j["cap"] = f.cap;
  return j;
}

int do_validate(const std::string& path, const CommonFlags& flags,
                std::ostream& out) {
  const json j = load_json(path);
  const std::string kind = j.value("kind", "");
  json rep;
  if (kind == "tensor_element") {
    auto x = io::tensor_element_from_json(j);
    rep["kind"] = kind;
    rep["level"] = x.level;
    rep["left_dim"] = opsys::system_dim(x.left);
    rep["right_dim"] = opsys::system_dim(x.right);
  } else if (kind == "element") {
    auto e = io::element_from_json(j);
    rep["kind"] = kind;
    rep["level"] = e.element.level;
    rep["dim"] = opsys::system_dim(e.system);
  } else if (kind == "cp_map") {
    auto m = io::cp_map_from_json(j);
    rep["kind"] = kind;
    rep["source_dim"] = opsys::system_dim(m.source);
    rep["target_dim"] = opsys::system_dim(m.target);
  } else {
    auto s = io::system_from_json(j);
    rep["kind"] = j["kind"];
    rep["ambient"] = opsys::system_ambient(s);
    rep["dim"] = opsys::system_dim(s);
    rep["abelian"] = opsys::system_abelian(s);
    if (std::holds_alternative<opsys::QuotientSystem>(s))
      rep["null_dim"] = std::get<opsys::QuotientSystem>(s).null.dim();
    const auto& name = opsys::system_name(s);
    if (!name.empty()) rep["name"] = name;
  }
  rep["valid"] = true;
  emit(rep, flags.out_path, out);
  return kExitMember;
}

int do_dualize(const std::string& path, const CommonFlags& flags,
               std::ostream& out) {
  auto s = io::system_from_json(load_json(path));
  json rep;
  if (std::holds_alternative<opsys::MatrixSystem>(s)) {
    auto q = opsys::dual_of_matrix_system(std::get<opsys::MatrixSystem>(s), 20,
                                          flags.tol);
    rep = io::system_to_json(System(std::move(q)));
  } else {
    auto d = opsys::dual_of_quotient(std::get<opsys::QuotientSystem>(s),
                                     flags.tol);
    rep = io::system_to_json(System(std::move(d.system)));
  }
  emit(rep, flags.out_path, out);
  return kExitMember;
}

int do_member(const std::string& path, const std::string& which,
              const CommonFlags& flags, std::ostream& out) {
  const json j = load_json(path);
  opsys::Verdict v;
  json rep;
  if (j.value("kind", "") == "tensor_element") {
    auto x = io::tensor_element_from_json(j);
    if (flags.level > 0 && flags.level != x.level)
      throw Error("MALFORMED_INPUT", "--level disagrees with the element");
    auto cfg = flags.oracle_config();
    if (which == "max")
      v = tensor::max_member(x, cfg);
    else
      v = tensor::min_member(x, cfg);
    rep["tensor"] = which.empty() ? "min" : which;
  } else {
    auto e = io::element_from_json(j);
    if (flags.level > 0 && flags.level != e.element.level)
      throw Error("MALFORMED_INPUT", "--level disagrees with the element");
    v = opsys::level_positive(e.system, e.element, flags.tol);
  }
  rep["verdict"] = io::verdict_to_json(v);
  rep["config"] = config_echo(flags);
  emit(rep, flags.out_path, out);
  return verdict_exit(v.status);
}

int do_cp(const std::string& path, const CommonFlags& flags,
          std::ostream& out) {
  auto m = io::cp_map_from_json(load_json(path));
  tensor::CpMapCandidate phi{m.source, m.target, m.images};
  auto v = tensor::cp_check(phi, flags.oracle_config());
  json rep;
  rep["verdict"] = io::verdict_to_json(v);
  rep["config"] = config_echo(flags);
  emit(rep, flags.out_path, out);
  return verdict_exit(v.status);
}

int do_extend(const std::string& path, const CommonFlags& flags,
              std::ostream& out) {
  auto e = io::extension_from_json(load_json(path));
  auto v = tensor::ucp_extension_exists(e.sub, e.super, e.images, e.target,
                                        flags.oracle_config());
  json rep;
  rep["verdict"] = io::verdict_to_json(v);
  rep["config"] = config_echo(flags);
  emit(rep, flags.out_path, out);
  return verdict_exit(v.status);
}

int do_lift(const std::string& path, const CommonFlags& flags,
            std::ostream& out) {
  auto l = io::lift_from_json(load_json(path));
  auto v = tensor::positive_lift_exists(l.left, l.quotient, l.element,
                                        l.epsilon, flags.oracle_config());
  json rep;
  rep["verdict"] = io::verdict_to_json(v);
  rep["epsilon"] = l.epsilon;
  rep["config"] = config_echo(flags);
  emit(rep, flags.out_path, out);
  return verdict_exit(v.status);
}

int do_rays(const std::string& path, const CommonFlags& flags,
            std::ostream& out) {
  auto s = io::system_from_json(load_json(path));
  if (!std::holds_alternative<opsys::MatrixSystem>(s))
    throw Error("MALFORMED_INPUT", "rays needs a function system");
  auto rays = experiments::lp_extreme_rays(std::get<opsys::MatrixSystem>(s));
  json rep;
  rep["system"] = opsys::system_name(s);
  rep["count"] = rays.size();
  rep["rays"] = rays;
  emit(rep, flags.out_path, out);
  return kExitMember;
}

opsys::MatrixSystem load_matrix_system(const std::string& path) {
  auto s = io::system_from_json(load_json(path));
  if (!std::holds_alternative<opsys::MatrixSystem>(s))
    throw Error("MALFORMED_INPUT", "expected a matrix system");
  return std::get<opsys::MatrixSystem>(s);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"operator system toolkit"};
  app.require_subcommand(1);

  std::string in_path, super_path, right_path, np_which = "w6";
  int budget = 50;
  bool planted = false;
  std::string member_tensor;
  CommonFlags flags;

  auto* validate = app.add_subcommand("validate", "check an input file");
  validate->add_option("file", in_path)->required();
  flags.attach(validate, false);

  auto* dualize = app.add_subcommand("dualize", "dual of a system");
  dualize->add_option("file", in_path)->required();
  flags.attach(dualize, false);

  auto* member = app.add_subcommand("member", "cone membership of an element");
  member->add_option("file", in_path)->required();
  member->add_option("--tensor", member_tensor, "min or max");
  flags.attach(member, false);

  auto* cp = app.add_subcommand("cp", "complete positivity of a map");
  cp->add_option("file", in_path)->required();
  flags.attach(cp, false);

  auto* extend = app.add_subcommand("extend", "ucp extension existence");
  extend->add_option("file", in_path)->required();
  flags.attach(extend, false);

  auto* lift = app.add_subcommand("lift", "positive lift along id (x) q");
  lift->add_option("file", in_path)->required();
  flags.attach(lift, false);

  auto* wep = app.add_subcommand("wep", "WEP scan over matrix quotients");
  wep->add_option("file", in_path)->required();
  flags.attach(wep, true);

  auto* wri = app.add_subcommand("wri", "relative weak injectivity scan");
  wri->add_option("file", in_path)->required();
  wri->add_option("--super", super_path, "the larger system")->required();
  flags.attach(wri, true);

  auto* np = app.add_subcommand("np", "Namioka-Phelps test");
  np->add_option("file", in_path)->required();
  np->add_option("--test", np_which, "w6 or w23");
  flags.attach(np, false);

  auto* quasi = app.add_subcommand("quasi", "quasi-nuclearity scan");
  quasi->add_option("file", in_path)->required();
  flags.attach(quasi, true);

  auto* search = app.add_subcommand("search", "separation witness search");
  search->add_option("file", in_path)->required();
  search->add_option("--right", right_path, "right tensor factor");
  search->add_option("--budget", budget, "search budget");
  search->add_flag("--planted", planted, "planted self-test mode");
  flags.attach(search, false);

  auto* rays = app.add_subcommand("rays", "extreme rays of a function system");
  rays->add_option("file", in_path)->required();
  flags.attach(rays, false);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (validate->parsed()) return do_validate(in_path, flags, out);
    if (dualize->parsed()) return do_dualize(in_path, flags, out);
    if (member->parsed()) return do_member(in_path, member_tensor, flags, out);
    if (cp->parsed()) return do_cp(in_path, flags, out);
    if (extend->parsed()) return do_extend(in_path, flags, out);
    if (lift->parsed()) return do_lift(in_path, flags, out);
    if (rays->parsed()) return do_rays(in_path, flags, out);

    if (wep->parsed()) {
      auto s = load_matrix_system(in_path);
      auto cat = io::catalog_from_json(load_json(flags.catalog_path));
      auto rep = experiments::wep_scan(s, cat, flags.scan_config());
      emit(io::report_to_json(rep), flags.out_path, out);
      return scan_exit(rep);
    }
    if (wri->parsed()) {
      auto s1 = load_matrix_system(in_path);
      auto s2 = load_matrix_system(super_path);
      auto cat = io::catalog_from_json(load_json(flags.catalog_path));
      auto rep = experiments::wri_scan(s1, s2, cat, flags.scan_config());
      emit(io::report_to_json(rep), flags.out_path, out);
      return scan_exit(rep);
    }
    if (np->parsed()) {
      auto s = load_matrix_system(in_path);
      const auto variant = np_which == "w23" ? experiments::NpVariant::W23
                                             : experiments::NpVariant::W6;
      auto rep = experiments::np_test(s, variant, flags.scan_config());
      emit(io::report_to_json(rep), flags.out_path, out);
      return scan_exit(rep);
    }
    if (quasi->parsed()) {
      auto s = io::system_from_json(load_json(in_path));
      auto cat = io::catalog_from_json(load_json(flags.catalog_path));
      auto rep = experiments::quasi_nuclear_scan(s, cat, flags.scan_config());
      emit(io::report_to_json(rep), flags.out_path, out);
      return scan_exit(rep);
    }
    if (search->parsed()) {
      experiments::WitnessResult res;
      if (planted) {
        res = experiments::witness_search_planted(load_matrix_system(in_path),
                                                  budget, flags.seed);
      } else {
        if (right_path.empty())
          throw Error("MALFORMED_INPUT", "search needs --right or --planted");
        auto left = io::system_from_json(load_json(in_path));
        auto right = io::system_from_json(load_json(right_path));
        res = experiments::witness_search(left, right, budget, flags.seed,
                                          flags.tol);
      }
      json rep = io::report_to_json(res.report);
      rep["found"] = res.found;
      if (res.found && !res.functional.empty())
        rep["functional"] = res.functional;
      emit(rep, flags.out_path, out);
      return res.found ? kExitNonMember : kExitMember;
    }
  } catch (const Error& e) {
    json rep;
    rep["error"] = e.code();
    rep["message"] = e.what();
    err << rep.dump(2) << "\n";
    return kExitBadInput;
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return kExitBadInput;
  }
  return kExitUsage;
}

}  // namespace opsystk::cli
