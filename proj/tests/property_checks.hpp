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

#ifndef TRISTACK_TESTS_PROPERTY_CHECKS_HPP_
#define TRISTACK_TESTS_PROPERTY_CHECKS_HPP_

// Each check returns its counterexamples; an empty result means it holds.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "oracles.hpp"
#include "tristack/c11ax.hpp"
#include "tristack/driver.hpp"
#include "tristack/litmus.hpp"
#include "tristack/mapping.hpp"
#include "tristack/uarchax.hpp"

namespace props {

using namespace tristack;
using Counterexamples = std::vector<std::string>;

inline bool subset(const std::set<Outcome>& a, const std::set<Outcome>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline LitmusTest all_one_order(const LitmusTemplate& tpl, MemOrder o) {
  LitmusTest t = tpl.skeleton;
  for (auto& th : t.threads)
    for (auto& e : th.events) {
      e.order = o;
      e.slot.clear();
    }
  return t;
}

// All-sc variants agree with sequential interleaving.
inline Counterexamples hll_sc_equivalence() {
  Counterexamples bad;
  for (const auto& [name, tpl] : builtin_suite()) {
    const LitmusTest t = all_one_order(tpl, MemOrder::Sc);
    if (eval_hll(t).outcomes != oracle::hll_sc_outcomes(t)) bad.push_back(name);
  }
  return bad;
}

// The library and the brute-force enumerator agree on candidates, on the
// consistency bit of each one, and on the permitted outcomes.
inline Counterexamples hll_bruteforce_agreement(std::size_t stride) {
  Counterexamples bad;
  for (const auto& [name, tpl] : builtin_suite()) {
    const auto variants = expand_template(tpl);
    for (std::size_t i = 0; i < variants.size(); i += stride) {
      const LitmusTest& t = variants[i];
      std::map<std::tuple<std::vector<int>, std::vector<std::vector<int>>, std::vector<int>>, bool> ref;
      for (const auto& c : oracle::hll_candidates(t)) ref[{c.rf, c.mo, c.scord}] = c.consistent;
      const auto mine = enumerate_candidates(t);
      bool ok = mine.size() == ref.size();
      for (const auto& c : mine) {
        auto it = ref.find({c.rf, c.mo, c.scord});
        if (it == ref.end() || it->second != check_consistent(c).consistent()) ok = false;
      }
      if (!ok || eval_hll(t).outcomes != oracle::hll_outcomes(t)) bad.push_back(t.name);
    }
  }
  return bad;
}

inline std::vector<MemOrder> stronger(MemOrder o, EventKind k) {
  if (o == MemOrder::Rlx) return {k == EventKind::Load ? MemOrder::Acq : MemOrder::Rel, MemOrder::Sc};
  if (o == MemOrder::Sc) return {};
  return {MemOrder::Sc};
}

// Strengthening one event never enlarges the permitted outcomes.
inline Counterexamples hll_monotonicity() {
  Counterexamples bad;
  for (const auto& [name, tpl] : builtin_suite()) {
    std::map<std::vector<MemOrder>, std::set<Outcome>> out;
    std::map<std::vector<MemOrder>, std::string> names;
    for (const auto& t : expand_template(tpl)) {
      out[event_orders(t)] = eval_hll(t).outcomes;
      names[event_orders(t)] = t.name;
    }
    std::vector<EventKind> kinds;
    for (const auto& th : tpl.skeleton.threads)
      for (const auto& e : th.events) kinds.push_back(e.kind);
    for (const auto& [orders, weak] : out)
      for (std::size_t i = 0; i < orders.size(); ++i)
        for (MemOrder s : stronger(orders[i], kinds[i])) {
          auto o2 = orders;
          o2[i] = s;
          if (!subset(out.at(o2), weak)) bad.push_back(names[o2] + " vs " + names[orders]);
        }
  }
  return bad;
}

// Every permitted verdict carries a consistent witness reaching the target.
inline Counterexamples hll_witnesses() {
  Counterexamples bad;
  for (const auto& [name, tpl] : builtin_suite())
    for (const auto& t : expand_template(tpl)) {
      const HllVerdict v = eval_hll(t);
      if (v.permitted() != v.witness.has_value()) {
        bad.push_back(t.name + ": witness presence");
      } else if (v.witness && (!check_consistent(*v.witness).consistent() ||
                               !condition_holds(t.condition, v.witness->outcome()))) {
        bad.push_back(t.name);
      }
    }
  return bad;
}

inline const std::vector<MappingId>& riscv_mappings() {
  static const std::vector<MappingId> ids = {MappingId::BaseIntuitive, MappingId::BaseRefined,
                                             MappingId::BaseAIntuitive, MappingId::BaseARefined};
  return ids;
}

// With no relaxation and MCA, the ISA evaluator equals sequential interleaving.
inline Counterexamples isa_sc_equivalence(std::size_t stride) {
  Counterexamples bad;
  const ModelConfig sc = sc_config();
  for (const auto& [name, tpl] : builtin_suite()) {
    const auto variants = expand_template(tpl);
    for (std::size_t i = 0; i < variants.size(); i += stride)
      for (MappingId m : riscv_mappings()) {
        const IsaProgram p = compile_test(variants[i], m);
        if (isa_outcomes(p, sc) != oracle::isa_sc_outcomes(p))
          bad.push_back(variants[i].name + " " + to_string(m));
      }
  }
  return bad;
}

// Observability keyed by (suite, variant, mapping, mcm) then model.
using ObsTable = std::map<std::tuple<std::string, std::string, std::string, std::string>,
                          std::map<std::string, bool>>;

inline ObsTable observability(const std::vector<VerdictReport>& reports) {
  ObsTable t;
  for (const auto& r : reports)
    for (const auto& rec : r.records)
      t[{rec.suite, rec.variant_name, rec.mapping, rec.mcm}][rec.model] = rec.observable;
  return t;
}

// observable(a) implies observable(b) along every edge of the model lattice.
inline Counterexamples model_lattice(const std::vector<VerdictReport>& reports) {
  static const std::vector<std::pair<std::string, std::string>> edges = {
      {"WR", "rWR"}, {"rWR", "rWM"}, {"rWM", "rMM"}, {"rWR", "nWR"}, {"rMM", "nMM"}, {"nWR", "nMM"}};
  Counterexamples bad;
  for (const auto& [key, obs] : observability(reports))
    for (const auto& [a, b] : edges)
      if (obs.count(a) && obs.count(b) && obs.at(a) && !obs.at(b))
        bad.push_back(std::get<1>(key) + " " + std::get<2>(key) + "/" + std::get<3>(key) + ": " + a + " > " + b);
  return bad;
}

inline Counterexamples a9like_matches_nmm(const std::vector<VerdictReport>& reports) {
  Counterexamples bad;
  for (const auto& [key, obs] : observability(reports))
    if (obs.count("A9like") && obs.count("nMM") && obs.at("A9like") != obs.at("nMM"))
      bad.push_back(std::get<1>(key) + " " + std::get<2>(key) + "/" + std::get<3>(key));
  return bad;
}

// Every observable record's witness passes the declarative checker.
inline Counterexamples uarch_witnesses(const std::vector<VerdictReport>& reports) {
  std::map<std::string, LitmusTest> by_name;
  for (const auto& [name, tpl] : builtin_suite())
    for (auto& t : expand_template(tpl)) by_name.emplace(t.name, std::move(t));
  std::vector<const VariantResult*> todo;
  for (const auto& r : reports)
    for (const auto& rec : r.records)
      if (rec.observable) todo.push_back(&rec);
  std::vector<std::string> verdict(todo.size());
  tristack::detail::parallel_for(todo.size(), 0, [&](std::size_t i) {
    const VariantResult& rec = *todo[i];
    const IsaProgram p = compile_test(by_name.at(rec.variant_name), parse_mapping_id(rec.mapping));
    const ModelConfig cfg = model_preset(rec.model, parse_mcm(rec.mcm));
    const Observability o = eval_uarch(p, cfg);
    if (!o.witness) {
      verdict[i] = rec.variant_name + " on " + rec.model + ": no witness";
      return;
    }
    const auto violated = check_execution(p, cfg, *o.witness);
    if (!violated.empty() || !target_holds(p, o.witness->outcome))
      verdict[i] = rec.variant_name + " on " + rec.model + ": " + (violated.empty() ? "target" : violated[0]);
  });
  Counterexamples bad;
  for (auto& v : verdict)
    if (!v.empty()) bad.push_back(v);
  return bad;
}

}  // namespace props

#endif  // TRISTACK_TESTS_PROPERTY_CHECKS_HPP_
