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

#ifndef TRISTACK_DRIVER_HPP_
#define TRISTACK_DRIVER_HPP_

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tristack/c11ax.hpp"
#include "tristack/common.hpp"
#include "tristack/litmus.hpp"
#include "tristack/mapping.hpp"
#include "tristack/uarchax.hpp"

namespace tristack {

enum class VerdictClass { Bug, OverlyStrict, Equivalent, Inconclusive };

inline const char* to_string(VerdictClass v) {
  switch (v) {
    case VerdictClass::Bug: return "bug";
    case VerdictClass::OverlyStrict: return "overly_strict";
    case VerdictClass::Equivalent: return "equivalent";
    case VerdictClass::Inconclusive: return "inconclusive";
  }
  return "?";
}

inline VerdictClass parse_verdict_class(const std::string& s) {
  for (auto v : {VerdictClass::Bug, VerdictClass::OverlyStrict, VerdictClass::Equivalent, VerdictClass::Inconclusive})
    if (s == to_string(v)) return v;
  throw Error("unknown verdict class '" + s + "'");
}

inline VerdictClass classify(bool hll_permitted, bool observable) {
  if (!hll_permitted && observable) return VerdictClass::Bug;
  if (hll_permitted && !observable) return VerdictClass::OverlyStrict;
  return VerdictClass::Equivalent;
}

inline VerdictClass classify(const HllVerdict& hll, const Observability& obs) {
  return classify(hll.permitted(), obs.observable);
}

struct VariantResult {
  std::string suite;
  std::string variant_name;
  int variant_index = 0;
  std::vector<MemOrder> orders;
  std::string mapping;
  std::string model;
  std::string mcm;
  std::optional<Expect> hll_verdict;  // unset if the HLL stage failed
  bool observable = false;
  VerdictClass cls = VerdictClass::Inconclusive;
  std::string error;
  std::string hll_witness;
  std::string uarch_witness;
};

struct SuiteAggregate {
  std::string suite, model, mcm, mapping;
  int bug = 0, overly_strict = 0, equivalent = 0, inconclusive = 0;
};

// Per-suite partition of variants over every model in the report.
struct SuiteRollup {
  std::string suite;
  int tests = 0;
  int ever_bug = 0;
  int ever_os_never_bug = 0;
  int always_equivalent = 0;

  double pct(int n) const { return tests ? 100.0 * n / tests : 0.0; }
};

struct VerdictReport {
  std::vector<VariantResult> records;  // canonical (suite, variant, model) order
  std::vector<SuiteAggregate> aggregates;
  std::vector<SuiteRollup> rollups;
  int total_bugs = 0;
  int inconclusive = 0;
};

struct RunOptions {
  unsigned jobs = 0;  // 0: hardware concurrency
  bool witnesses = false;
  std::size_t hll_cap = kDefaultCandidateCap;
  std::size_t state_cap = kDefaultStateCap;
};

inline std::vector<SuiteRollup> aggregate(const VerdictReport& r) {
  std::vector<SuiteRollup> out;
  std::map<std::pair<std::string, int>, std::vector<VerdictClass>> per_test;
  std::vector<std::string> suite_order;
  for (const auto& rec : r.records) {
    if (std::find(suite_order.begin(), suite_order.end(), rec.suite) == suite_order.end())
      suite_order.push_back(rec.suite);
    auto& v = per_test[{rec.suite, rec.variant_index}];
    if (rec.cls != VerdictClass::Inconclusive) v.push_back(rec.cls);
  }
  for (const auto& s : suite_order) {
    SuiteRollup ro;
    ro.suite = s;
    for (const auto& [key, classes] : per_test) {
      if (key.first != s || classes.empty()) continue;
      ++ro.tests;
      auto has = [&](VerdictClass c) { return std::find(classes.begin(), classes.end(), c) != classes.end(); };
      if (has(VerdictClass::Bug)) ++ro.ever_bug;
      else if (has(VerdictClass::OverlyStrict)) ++ro.ever_os_never_bug;
      else ++ro.always_equivalent;
    }
    out.push_back(ro);
  }
  return out;
}

inline void finalize_report(VerdictReport& r) {
  r.aggregates.clear();
  r.total_bugs = r.inconclusive = 0;
  for (const auto& rec : r.records) {
    auto it = std::find_if(r.aggregates.begin(), r.aggregates.end(), [&](const SuiteAggregate& a) {
      return a.suite == rec.suite && a.model == rec.model && a.mcm == rec.mcm && a.mapping == rec.mapping;
    });
    if (it == r.aggregates.end()) {
      r.aggregates.push_back({rec.suite, rec.model, rec.mcm, rec.mapping});
      it = std::prev(r.aggregates.end());
    }
    switch (rec.cls) {
      case VerdictClass::Bug: ++it->bug; ++r.total_bugs; break;
      case VerdictClass::OverlyStrict: ++it->overly_strict; break;
      case VerdictClass::Equivalent: ++it->equivalent; break;
      case VerdictClass::Inconclusive: ++it->inconclusive; ++r.inconclusive; break;
    }
  }
  r.rollups = aggregate(r);
}

namespace detail {

template <typename F>
void parallel_for(std::size_t n, unsigned jobs, F&& body) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) body(i);
  };
  if (jobs <= 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace detail

// Full cross product suites x variants x models. Each variant is evaluated
// at the HLL level and compiled once; (variant, model) pairs run in parallel
// and land at their canonical index.
inline VerdictReport check_suites(const std::vector<std::pair<std::string, LitmusTemplate>>& suites,
                                  MappingId mapping, const std::vector<ModelConfig>& models,
                                  const RunOptions& opt = {}) {
  struct Variant {
    std::string suite;
    int index = 0;
    LitmusTest test;
    std::optional<HllVerdict> hll;
    std::optional<IsaProgram> prog;
    std::string error;
  };
  std::vector<Variant> variants;
  for (const auto& [name, tpl] : suites) {
    int k = 0;
    for (auto& t : expand_template(tpl)) {
      Variant v;
      v.suite = name;
      v.index = k++;
      v.test = std::move(t);
      variants.push_back(std::move(v));
    }
  }

  detail::parallel_for(variants.size(), opt.jobs, [&](std::size_t i) {
    Variant& v = variants[i];
    try {
      v.hll = eval_hll(v.test, opt.hll_cap);
      v.prog = compile_test(v.test, mapping);
    } catch (const std::exception& e) {
      v.error = e.what();
    }
  });

  VerdictReport rep;
  rep.records.resize(variants.size() * models.size());
  detail::parallel_for(rep.records.size(), opt.jobs, [&](std::size_t k) {
    const Variant& v = variants[k / models.size()];
    const ModelConfig& m = models[k % models.size()];
    VariantResult& r = rep.records[k];
    r.suite = v.suite;
    r.variant_name = v.test.name;
    r.variant_index = v.index;
    r.orders = event_orders(v.test);
    r.mapping = to_string(mapping);
    r.model = m.id;
    r.mcm = to_string(m.mcm);
    if (v.hll) r.hll_verdict = v.hll->target;
    if (!v.error.empty()) {
      r.error = v.error;
      return;
    }
    try {
      const Observability obs = eval_uarch(*v.prog, m, opt.state_cap);
      r.observable = obs.observable;
      r.cls = classify(*v.hll, obs);
      if (opt.witnesses) {
        if (v.hll->witness) r.hll_witness = v.hll->witness->describe();
        if (obs.witness) r.uarch_witness = describe_trace(*v.prog, *obs.witness);
      }
    } catch (const std::exception& e) {
      r.error = e.what();
    }
  });
  finalize_report(rep);
  return rep;
}

inline VerdictReport check_suites(const std::vector<std::pair<std::string, LitmusTemplate>>& suites,
                                  MappingId mapping, const std::vector<std::string>& model_names, Mcm mcm,
                                  const RunOptions& opt = {}) {
  std::vector<ModelConfig> models;
  for (const auto& id : model_names) models.push_back(model_preset(id, mcm));
  return check_suites(suites, mapping, models, opt);
}

enum class ReportFormat { Text, Json, Csv };

inline ReportFormat parse_report_format(const std::string& s) {
  if (s == "text") return ReportFormat::Text;
  if (s == "json") return ReportFormat::Json;
  if (s == "csv") return ReportFormat::Csv;
  throw Error("unknown report format '" + s + "'");
}

namespace detail {

inline nlohmann::ordered_json report_to_json(const VerdictReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["records"] = ordered_json::array();
  for (const auto& rec : r.records) {
    ordered_json o;
    o["suite"] = rec.suite;
    o["variant_name"] = rec.variant_name;
    o["variant_index"] = rec.variant_index;
    o["orders"] = ordered_json::array();
    for (auto m : rec.orders) o["orders"].push_back(to_string(m));
    o["mapping"] = rec.mapping;
    o["model"] = rec.model;
    o["mcm"] = rec.mcm;
    if (rec.hll_verdict)
      o["hll_verdict"] = *rec.hll_verdict == Expect::Permitted ? "permitted" : "forbidden";
    else
      o["hll_verdict"] = nullptr;
    o["observable"] = rec.observable;
    o["class"] = to_string(rec.cls);
    if (!rec.error.empty()) o["error"] = rec.error;
    if (!rec.hll_witness.empty() || !rec.uarch_witness.empty()) {
      ordered_json w;
      if (!rec.hll_witness.empty()) w["hll"] = rec.hll_witness;
      if (!rec.uarch_witness.empty()) w["uarch"] = rec.uarch_witness;
      o["witness"] = w;
    }
    j["records"].push_back(o);
  }
  j["aggregates"] = ordered_json::array();
  for (const auto& a : r.aggregates)
    j["aggregates"].push_back({{"suite", a.suite},
                               {"model", a.model},
                               {"mcm", a.mcm},
                               {"mapping", a.mapping},
                               {"bug", a.bug},
                               {"overly_strict", a.overly_strict},
                               {"equivalent", a.equivalent},
                               {"inconclusive", a.inconclusive}});
  j["rollups"] = ordered_json::array();
  for (const auto& ro : r.rollups)
    j["rollups"].push_back({{"suite", ro.suite},
                            {"tests", ro.tests},
                            {"ever_bug", ro.ever_bug},
                            {"ever_overly_strict_never_bug", ro.ever_os_never_bug},
                            {"always_equivalent", ro.always_equivalent}});
  j["total_bugs"] = r.total_bugs;
  j["inconclusive"] = r.inconclusive;
  return j;
}

}  // namespace detail

inline std::string emit_report(const VerdictReport& r, ReportFormat fmt) {
  std::ostringstream os;
  switch (fmt) {
    case ReportFormat::Json:
      os << detail::report_to_json(r).dump(2) << "\n";
      break;
    case ReportFormat::Csv:
      os << "suite,model,mcm,mapping,bug,overly_strict,equivalent\n";
      for (const auto& a : r.aggregates)
        os << a.suite << "," << a.model << "," << a.mcm << "," << a.mapping << "," << a.bug << ","
           << a.overly_strict << "," << a.equivalent << "\n";
      break;
    case ReportFormat::Text: {
      os << std::left << std::setw(10) << "suite" << std::setw(8) << "model" << std::setw(6) << "mcm"
         << std::setw(20) << "mapping" << std::right << std::setw(6) << "bug" << std::setw(8) << "strict"
         << std::setw(8) << "equiv" << std::setw(8) << "incon" << "\n";
      for (const auto& a : r.aggregates)
        os << std::left << std::setw(10) << a.suite << std::setw(8) << a.model << std::setw(6) << a.mcm
           << std::setw(20) << a.mapping << std::right << std::setw(6) << a.bug << std::setw(8)
           << a.overly_strict << std::setw(8) << a.equivalent << std::setw(8) << a.inconclusive << "\n";
      for (const auto& ro : r.rollups) {
        os << ro.suite << ": " << ro.tests << " tests, " << std::fixed << std::setprecision(1)
           << ro.pct(ro.ever_bug) << "% ever bug, " << ro.pct(ro.ever_os_never_bug)
           << "% overly strict only, " << ro.pct(ro.always_equivalent) << "% always equivalent\n";
      }
      os << "total bugs: " << r.total_bugs << "\n";
      os << "inconclusive: " << r.inconclusive << "\n";
      break;
    }
  }
  return os.str();
}

inline VerdictReport load_report_json(const std::string& text) {
  VerdictReport r;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    for (const auto& o : j.at("records")) {
      VariantResult rec;
      rec.suite = o.at("suite").get<std::string>();
      rec.variant_name = o.at("variant_name").get<std::string>();
      rec.variant_index = o.value("variant_index", 0);
      for (const auto& m : o.at("orders")) {
        auto mo = parse_order(m.get<std::string>());
        if (!mo) throw Error("bad order in report");
        rec.orders.push_back(*mo);
      }
      rec.mapping = o.at("mapping").get<std::string>();
      rec.model = o.at("model").get<std::string>();
      rec.mcm = o.at("mcm").get<std::string>();
      const auto& hv = o.at("hll_verdict");
      if (!hv.is_null()) rec.hll_verdict = hv.get<std::string>() == "permitted" ? Expect::Permitted : Expect::Forbidden;
      rec.observable = o.at("observable").get<bool>();
      rec.cls = parse_verdict_class(o.at("class").get<std::string>());
      rec.error = o.value("error", "");
      if (o.contains("witness")) {
        rec.hll_witness = o["witness"].value("hll", "");
        rec.uarch_witness = o["witness"].value("uarch", "");
      }
      r.records.push_back(std::move(rec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed report: ") + e.what());
  }
  finalize_report(r);
  if (r.total_bugs != j.value("total_bugs", r.total_bugs) || r.inconclusive != j.value("inconclusive", r.inconclusive))
    throw Error("report totals disagree with its records");
  return r;
}

}  // namespace tristack

#endif  // TRISTACK_DRIVER_HPP_
