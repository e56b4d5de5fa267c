/*
 * Copyright (c) 2026, The tristack authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tristack/c11ax.hpp"
#include "tristack/driver.hpp"
#include "tristack/litmus.hpp"
#include "tristack/mapping.hpp"
#include "tristack/uarchax.hpp"

namespace fs = std::filesystem;
using namespace tristack;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBugs = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInconclusive = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

// A suite argument is a built-in name, "all", or a template file path.
std::vector<std::pair<std::string, LitmusTemplate>> resolve_suites(const std::string& arg) {
  std::vector<std::pair<std::string, LitmusTemplate>> out;
  for (const auto& name : split_csv(arg)) {
    if (name == "all") {
      auto all = builtin_suite();
      out.insert(out.end(), all.begin(), all.end());
    } else if (auto t = find_builtin(name)) {
      out.emplace_back(name, *t);
    } else if (fs::exists(name)) {
      LitmusTemplate t = parse_template(read_file(name));
      out.emplace_back(t.skeleton.name, std::move(t));
    } else {
      throw Error("unknown suite '" + name + "'");
    }
  }
  return out;
}

std::vector<ModelConfig> resolve_models(const std::string& arg, Mcm mcm, const std::string& config_path) {
  std::vector<ModelConfig> out;
  for (const auto& id : split_csv(arg)) {
    if (id == "all") {
      for (const auto& m : model_ids()) out.push_back(model_preset(m, mcm));
    } else {
      out.push_back(model_preset(id, mcm));
    }
  }
  if (!config_path.empty())
    for (auto& m : out) m = load_model_config(read_file(config_path), m);
  return out;
}

int cmd_gen(const std::string& suite, const std::string& out_dir) {
  fs::create_directories(out_dir);
  int n = 0;
  for (const auto& [name, tpl] : resolve_suites(suite)) {
    for (const auto& t : expand_template(tpl)) {
      std::ofstream f(fs::path(out_dir) / (t.name + ".litmus"));
      if (!f) throw Error("cannot write into '" + out_dir + "'");
      f << render_litmus(t);
      ++n;
    }
  }
  std::cout << "wrote " << n << " tests to " << out_dir << "\n";
  return kExitOk;
}

int cmd_hll(const std::vector<std::string>& files, bool witness) {
  int mismatches = 0;
  for (const auto& path : files) {
    LitmusTest t = parse_litmus(read_file(path));
    HllVerdict v = eval_hll(t);
    std::cout << t.name << ": " << (v.permitted() ? "permitted" : "forbidden") << " (" << v.outcomes.size()
              << " consistent outcomes)";
    if (t.expected) {
      bool ok = *t.expected == v.target;
      mismatches += !ok;
      std::cout << (ok ? "" : " [expectation mismatch]");
    }
    std::cout << "\n";
    if (witness && v.witness) std::cout << v.witness->describe();
  }
  return mismatches ? kExitBugs : kExitOk;
}

int cmd_compile(const std::string& mapping, const std::vector<std::string>& files) {
  MappingId id = parse_mapping_id(mapping);
  for (const auto& path : files)
    std::cout << render_isa(compile_test(parse_litmus(read_file(path)), id, CompilePurpose::Emit));
  return kExitOk;
}

int cmd_uarch(const std::string& model, const std::string& mcm, const std::string& config_path,
              const std::vector<std::string>& files, bool witness) {
  ModelConfig cfg = resolve_models(model, parse_mcm(mcm), config_path).at(0);
  for (const auto& path : files) {
    IsaProgram p = parse_isa(read_file(path));
    Observability o = eval_uarch(p, cfg);
    std::cout << p.name << " on " << cfg.id << "/" << to_string(cfg.mcm) << ": "
              << (o.observable ? "observable" : "unobservable") << " (" << o.states << " states)\n";
    if (witness && o.witness) std::cout << describe_trace(p, *o.witness);
  }
  return kExitOk;
}

int cmd_check(const std::string& suite, const std::string& mapping, const std::string& models,
              const std::string& mcm, const std::string& config_path, unsigned jobs, bool witnesses,
              const std::string& format, const std::string& out_path) {
  RunOptions opt;
  opt.jobs = jobs;
  opt.witnesses = witnesses;
  ReportFormat fmt = parse_report_format(format);
  VerdictReport r = check_suites(resolve_suites(suite), parse_mapping_id(mapping),
                                 resolve_models(models, parse_mcm(mcm), config_path), opt);
  std::string text = emit_report(r, fmt);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out_path);
    if (!(f << text)) throw Error("cannot write '" + out_path + "'");
  }
  if (r.total_bugs) return kExitBugs;
  if (r.inconclusive) return kExitInconclusive;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full-stack memory consistency checker for C11 atomics on RISC-V models"};
  app.require_subcommand(1);

  std::string suite, out, mapping, model = "all", mcm = "curr", format = "text", config;
  std::vector<std::string> files;
  unsigned jobs = 0;
  bool witnesses = false;

  auto* gen = app.add_subcommand("gen", "Expand a template suite into litmus files");
  gen->add_option("--suite", suite, "Suite name, 'all', or template file")->required();
  gen->add_option("--out", out, "Output directory")->required();

  auto* hll = app.add_subcommand("hll", "Evaluate litmus tests against the C11 axioms");
  hll->add_option("files", files, "Litmus files")->required()->check(CLI::ExistingFile);
  hll->add_flag("--witnesses", witnesses, "Print a consistent execution reaching the target");

  auto* comp = app.add_subcommand("compile", "Compile litmus tests to ISA programs");
  comp->add_option("--mapping", mapping, "Mapping id")->required();
  comp->add_option("files", files, "Litmus files")->required()->check(CLI::ExistingFile);

  auto* ua = app.add_subcommand("uarch", "Evaluate ISA programs on a microarchitecture model");
  ua->add_option("--model", model, "Model id")->required();
  ua->add_option("--mcm", mcm, "curr or ours");
  ua->add_option("--config", config, "key=value overrides applied to the preset")->check(CLI::ExistingFile);
  ua->add_option("files", files, "ISA files")->required()->check(CLI::ExistingFile);
  ua->add_flag("--witnesses", witnesses, "Print the witness trace");

  auto* chk = app.add_subcommand("check", "Run the full pipeline and classify every variant");
  chk->add_option("--suite", suite, "Suite names (comma separated), 'all', or template files")->required();
  chk->add_option("--mapping", mapping, "Mapping id")->required();
  chk->add_option("--model", model, "Model ids (comma separated) or 'all'");
  chk->add_option("--mcm", mcm, "curr or ours");
  chk->add_option("--config", config, "key=value overrides applied to every preset")->check(CLI::ExistingFile);
  chk->add_option("--jobs", jobs, "Worker threads (0 = all cores)");
  chk->add_flag("--witnesses", witnesses, "Keep witnesses in the report");
  chk->add_option("--format", format, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));
  chk->add_option("--out", out, "Write the report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen) return cmd_gen(suite, out);
    if (*hll) return cmd_hll(files, witnesses);
    if (*comp) return cmd_compile(mapping, files);
    if (*ua) return cmd_uarch(model, mcm, config, files, witnesses);
    if (*chk) return cmd_check(suite, mapping, model, mcm, config, jobs, witnesses, format, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
