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

#ifndef TRISTACK_C11AX_HPP_
#define TRISTACK_C11AX_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tristack/common.hpp"
#include "tristack/litmus.hpp"

namespace tristack {

constexpr std::size_t kDefaultCandidateCap = 1000000;

// Final state: "T:r" keys for registers, bare location names for memory.
using Outcome = std::map<std::string, Value>;

inline std::string reg_key(const std::string& thread, const std::string& reg) {
  return thread + ":" + reg;
}

inline std::string outcome_str(const Outcome& o) {
  std::string s;
  for (const auto& [k, v] : o) {
    if (!s.empty()) s += " ";
    s += k + "=" + v.str();
  }
  return s;
}

inline bool condition_holds(const std::vector<CondAtom>& cond, const Outcome& o) {
  for (const auto& a : cond) {
    const std::string key = a.kind == CondAtom::Kind::Reg ? reg_key(a.thread, a.name) : a.name;
    auto it = o.find(key);
    if (it == o.end() || it->second != a.value) return false;
  }
  return true;
}

// Flattened event table. Ids [0, nlocs) are init writes, in location order.
struct HllProgram {
  struct Ev {
    int id = 0;
    int thread = -1;  // -1 for init writes
    int index = 0;
    EventKind kind = EventKind::Store;
    MemOrder order = MemOrder::Rlx;
    int static_loc = -1;  // -1 when the address is a register
    int addr_src = -1;    // load id producing the address
    int val_src = -1;     // load id producing the stored value
    Value const_val;      // stored constant when val_src < 0
    bool is_init() const { return thread < 0; }
    bool is_load() const { return kind == EventKind::Load; }
    bool is_store() const { return kind == EventKind::Store; }
    bool is_sc() const { return !is_init() && order == MemOrder::Sc; }
  };

  LitmusTest test;
  std::vector<Ev> events;
  int nlocs = 0;

  static std::shared_ptr<const HllProgram> build(const LitmusTest& t) {
    auto p = std::make_shared<HllProgram>();
    p->test = t;
    p->nlocs = static_cast<int>(t.locations.size());
    for (int l = 0; l < p->nlocs; ++l) {
      Ev e;
      e.id = l;
      e.static_loc = l;
      e.const_val = Value::Int(t.locations[l].second);
      p->events.push_back(e);
    }
    for (std::size_t ti = 0; ti < t.threads.size(); ++ti) {
      std::map<std::string, int> reg_src;
      for (const auto& he : t.threads[ti].events) {
        if (!he.order) throw Error("event without a concrete order in test " + t.name);
        Ev e;
        e.id = static_cast<int>(p->events.size());
        e.thread = static_cast<int>(ti);
        e.index = he.index;
        e.kind = he.kind;
        e.order = *he.order;
        if (he.addr.kind == Operand::Kind::Loc) {
          e.static_loc = t.location_index(he.addr.name);
        } else {
          e.addr_src = reg_src.at(he.addr.name);
        }
        if (he.is_store()) {
          switch (he.value.kind) {
            case Operand::Kind::Int: e.const_val = Value::Int(he.value.num); break;
            case Operand::Kind::Loc: e.const_val = Value::Loc(he.value.name); break;
            case Operand::Kind::Reg: e.val_src = reg_src.at(he.value.name); break;
          }
        } else {
          reg_src[he.dest] = e.id;
        }
        p->events.push_back(e);
      }
    }
    if (p->events.size() > 64) throw Error("tests are limited to 64 events including init writes");
    return p;
  }
};

struct CandidateExecution {
  std::shared_ptr<const HllProgram> prog;
  std::vector<int> rf;                // per event, write id for loads, -1 otherwise
  std::vector<int> loc;               // resolved location per event
  std::vector<Value> val;             // value read or written per event
  std::vector<std::vector<int>> mo;   // per location, init first
  std::vector<int> scord;             // all Sc events

  Outcome outcome() const {
    Outcome o;
    const auto& t = prog->test;
    for (const auto& e : prog->events)
      if (!e.is_init() && e.is_load()) {
        const auto& he = t.threads[e.thread].events[e.index];
        o[reg_key(t.threads[e.thread].name, he.dest)] = val[e.id];
      }
    for (int l = 0; l < prog->nlocs; ++l) o[t.locations[l].first] = val[mo[l].back()];
    return o;
  }

  std::string describe() const {
    std::string s;
    auto name = [&](int id) {
      const auto& e = prog->events[id];
      if (e.is_init()) return "init(" + prog->test.locations[id].first + ")";
      return prog->test.threads[e.thread].name + "." + std::to_string(e.index);
    };
    for (const auto& e : prog->events)
      if (e.is_load() && !e.is_init()) s += "rf " + name(rf[e.id]) + " -> " + name(e.id) + "; ";
    for (int l = 0; l < prog->nlocs; ++l) {
      s += "mo " + prog->test.locations[l].first + ":";
      for (int w : mo[l]) s += " " + name(w);
      s += "; ";
    }
    if (!scord.empty()) {
      s += "sc:";
      for (int e : scord) s += " " + name(e);
    }
    return s;
  }
};

// Bit-matrix relations over at most 64 events.
struct Relation {
  std::vector<std::uint64_t> row;

  explicit Relation(std::size_t n = 0) : row(n, 0) {}
  bool has(int a, int b) const { return (row[a] >> b) & 1u; }
  void add(int a, int b) { row[a] |= std::uint64_t{1} << b; }
  std::size_t size() const { return row.size(); }

  Relation& operator|=(const Relation& o) {
    for (std::size_t i = 0; i < row.size(); ++i) row[i] |= o.row[i];
    return *this;
  }

  void close() {
    for (std::size_t k = 0; k < row.size(); ++k)
      for (std::size_t i = 0; i < row.size(); ++i)
        if ((row[i] >> k) & 1u) row[i] |= row[k];
  }

  bool irreflexive() const {
    for (std::size_t i = 0; i < row.size(); ++i)
      if (has(static_cast<int>(i), static_cast<int>(i))) return false;
    return true;
  }
};

struct DerivedRelations {
  Relation sb, rf, sw, hb, mo;
};

inline DerivedRelations derive(const CandidateExecution& x) {
  const auto& ev = x.prog->events;
  const std::size_t n = ev.size();
  DerivedRelations d{Relation(n), Relation(n), Relation(n), Relation(n), Relation(n)};
  for (const auto& a : ev)
    for (const auto& b : ev) {
      if (b.is_init()) continue;
      if (a.is_init() || (a.thread == b.thread && a.index < b.index)) d.sb.add(a.id, b.id);
    }
  for (const auto& chain : x.mo)
    for (std::size_t i = 0; i < chain.size(); ++i)
      for (std::size_t j = i + 1; j < chain.size(); ++j) d.mo.add(chain[i], chain[j]);
  for (const auto& r : ev)
    if (r.is_load() && !r.is_init()) d.rf.add(x.rf[r.id], r.id);

  // Release sequence: the release plus contiguous same-thread mo-successors.
  for (const auto& w : ev) {
    if (w.is_init() || !w.is_store()) continue;
    if (w.order != MemOrder::Rel && w.order != MemOrder::Sc) continue;
    const auto& chain = x.mo[x.loc[w.id]];
    std::uint64_t rs = 0;
    auto pos = std::find(chain.begin(), chain.end(), w.id);
    for (auto it = pos; it != chain.end() && ev[*it].thread == w.thread; ++it)
      rs |= std::uint64_t{1} << *it;
    for (const auto& r : ev) {
      if (r.is_init() || !r.is_load()) continue;
      if (r.order != MemOrder::Acq && r.order != MemOrder::Sc) continue;
      if ((rs >> x.rf[r.id]) & 1u) d.sw.add(w.id, r.id);
    }
  }
  d.hb = d.sb;
  d.hb |= d.sw;
  d.hb.close();
  return d;
}

enum class Axiom { HbAcyclic, CoWW, CoRR, CoWR, CoRW, ScTotal, ScRead };

inline constexpr std::array<Axiom, 7> kAllAxioms = {Axiom::HbAcyclic, Axiom::CoWW, Axiom::CoRR,
                                                    Axiom::CoWR,      Axiom::CoRW, Axiom::ScTotal,
                                                    Axiom::ScRead};

inline const char* to_string(Axiom a) {
  switch (a) {
    case Axiom::HbAcyclic: return "A1 hb-acyclic";
    case Axiom::CoWW: return "A2 CoWW";
    case Axiom::CoRR: return "A3 CoRR";
    case Axiom::CoWR: return "A4 CoWR";
    case Axiom::CoRW: return "A5 CoRW";
    case Axiom::ScTotal: return "A6 sc-order";
    case Axiom::ScRead: return "A7 sc-read";
  }
  return "?";
}

struct AxiomReport {
  std::array<bool, 7> pass{true, true, true, true, true, true, true};

  bool ok(Axiom a) const { return pass[static_cast<int>(a)]; }
  bool consistent() const {
    return std::all_of(pass.begin(), pass.end(), [](bool b) { return b; });
  }
  std::vector<Axiom> failures() const {
    std::vector<Axiom> f;
    for (auto a : kAllAxioms)
      if (!ok(a)) f.push_back(a);
    return f;
  }
};

namespace detail {

inline void check_coherence(const CandidateExecution& x, const DerivedRelations& d, AxiomReport& rep) {
  const auto& ev = x.prog->events;
  auto fail = [&](Axiom a) { rep.pass[static_cast<int>(a)] = false; };
  if (!d.hb.irreflexive()) fail(Axiom::HbAcyclic);
  for (const auto& a : ev)
    for (const auto& b : ev) {
      if (a.id == b.id || !d.hb.has(a.id, b.id) || x.loc[a.id] != x.loc[b.id]) continue;
      const bool aw = a.is_store(), bw = b.is_store();
      if (aw && bw) {
        if (!d.mo.has(a.id, b.id)) fail(Axiom::CoWW);
      } else if (!aw && !bw) {
        const int wa = x.rf[a.id], wb = x.rf[b.id];
        if (wa != wb && d.mo.has(wb, wa)) fail(Axiom::CoRR);
      } else if (aw && !bw) {
        if (d.mo.has(x.rf[b.id], a.id)) fail(Axiom::CoWR);
      } else {
        const int wa = x.rf[a.id];
        if (wa == b.id || d.mo.has(b.id, wa)) fail(Axiom::CoRW);
      }
    }
}

inline void check_sc(const CandidateExecution& x, const DerivedRelations& d, AxiomReport& rep) {
  const auto& ev = x.prog->events;
  auto fail = [&](Axiom a) { rep.pass[static_cast<int>(a)] = false; };
  std::vector<int> pos(ev.size(), -1);
  for (std::size_t i = 0; i < x.scord.size(); ++i) pos[x.scord[i]] = static_cast<int>(i);
  for (const auto& a : ev)
    for (const auto& b : ev) {
      if (!a.is_sc() || !b.is_sc() || a.id == b.id) continue;
      if ((d.hb.has(a.id, b.id) || d.mo.has(a.id, b.id)) && pos[a.id] > pos[b.id]) fail(Axiom::ScTotal);
    }
  for (const auto& r : ev) {
    if (!r.is_sc() || !r.is_load()) continue;
    int last = -1;
    for (int e : x.scord) {
      if (e == r.id) break;
      if (ev[e].is_store() && x.loc[e] == x.loc[r.id]) last = e;
    }
    if (last >= 0 && d.mo.has(x.rf[r.id], last)) fail(Axiom::ScRead);
  }
}

}  // namespace detail

inline AxiomReport check_consistent(const CandidateExecution& x) {
  AxiomReport rep;
  const auto d = derive(x);
  detail::check_coherence(x, d, rep);
  detail::check_sc(x, d, rep);
  return rep;
}

namespace detail {

// Resolves loc/val from rf; false if a value cycle, location mismatch, or
// non-location dereference leaves some load unresolved.
inline bool resolve_values(const HllProgram& p, CandidateExecution& x) {
  const std::size_t n = p.events.size();
  std::vector<char> done(n, 0);
  for (const auto& e : p.events) {
    x.loc[e.id] = e.static_loc;
    if (e.is_store() && e.val_src < 0) {
      x.val[e.id] = e.const_val;
      done[e.id] = 1;
    }
  }
  bool progress = true;
  while (progress) {
    progress = false;
    for (const auto& e : p.events) {
      if (done[e.id]) continue;
      if (e.addr_src >= 0 && x.loc[e.id] < 0) {
        if (!done[e.addr_src]) continue;
        const Value& a = x.val[e.addr_src];
        if (!a.is_loc()) return false;
        x.loc[e.id] = p.test.location_index(a.loc);
      }
      if (e.is_store()) {
        if (!done[e.val_src]) continue;
        x.val[e.id] = x.val[e.val_src];
      } else {
        const int w = x.rf[e.id];
        if (!done[w]) continue;
        if (x.loc[w] != x.loc[e.id]) return false;
        x.val[e.id] = x.val[w];
      }
      done[e.id] = 1;
      progress = true;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!done[i]) return false;
  return true;
}

}  // namespace detail

// Visits candidates in canonical order: rf (odometer over loads, writes in id
// order), then mo per location, then scord. `keep_rfmo`, when given, prunes an
// (rf, mo) pair before scord expansion. `visit` returns false to stop early.
// Throws ResourceLimitError once more than `cap` candidates are produced.
inline void for_each_candidate(const LitmusTest& test,
                               const std::function<bool(const CandidateExecution&)>& visit,
                               std::size_t cap = kDefaultCandidateCap,
                               const std::function<bool(const CandidateExecution&)>& keep_rfmo = {}) {
  auto prog = HllProgram::build(test);
  const auto& ev = prog->events;
  const std::size_t n = ev.size();

  std::vector<int> loads, writes, scs;
  for (const auto& e : ev) {
    if (e.is_load()) loads.push_back(e.id);
    if (e.is_store()) writes.push_back(e.id);
    if (e.is_sc()) scs.push_back(e.id);
  }
  std::vector<std::vector<int>> choices(loads.size());
  for (std::size_t i = 0; i < loads.size(); ++i) {
    const int sl = ev[loads[i]].static_loc;
    for (int w : writes)
      if (sl < 0 || ev[w].static_loc < 0 || ev[w].static_loc == sl) choices[i].push_back(w);
  }

  CandidateExecution x;
  x.prog = prog;
  x.rf.assign(n, -1);
  x.loc.assign(n, -1);
  x.val.assign(n, Value::Int(0));
  x.mo.assign(prog->nlocs, {});

  std::size_t produced = 0;
  bool stop = false;

  auto emit_scord = [&]() {
    x.scord = scs;
    do {
      if (++produced > cap) throw ResourceLimitError("candidate enumeration", cap);
      if (!visit(x)) {
        stop = true;
        return;
      }
    } while (std::next_permutation(x.scord.begin(), x.scord.end()));
  };

  std::function<void(int)> enum_mo = [&](int l) {
    if (stop) return;
    if (l == prog->nlocs) {
      if (keep_rfmo && !keep_rfmo(x)) return;
      emit_scord();
      return;
    }
    std::vector<int> rest;
    for (int w : writes)
      if (!ev[w].is_init() && x.loc[w] == l) rest.push_back(w);
    do {
      x.mo[l] = {l};
      x.mo[l].insert(x.mo[l].end(), rest.begin(), rest.end());
      enum_mo(l + 1);
      if (stop) return;
    } while (std::next_permutation(rest.begin(), rest.end()));
  };

  if (loads.empty()) {
    if (detail::resolve_values(*prog, x)) enum_mo(0);
    return;
  }
  std::vector<std::size_t> digit(loads.size(), 0);
  for (const auto& c : choices)
    if (c.empty()) return;
  while (!stop) {
    for (std::size_t i = 0; i < loads.size(); ++i) x.rf[loads[i]] = choices[i][digit[i]];
    if (detail::resolve_values(*prog, x)) enum_mo(0);
    std::size_t k = loads.size();
    while (k > 0) {
      --k;
      if (++digit[k] < choices[k].size()) break;
      digit[k] = 0;
      if (k == 0) return;
    }
  }
}

inline std::vector<CandidateExecution> enumerate_candidates(const LitmusTest& test,
                                                            std::size_t cap = kDefaultCandidateCap) {
  std::vector<CandidateExecution> out;
  for_each_candidate(
      test,
      [&](const CandidateExecution& x) {
        out.push_back(x);
        return true;
      },
      cap);
  return out;
}

struct HllVerdict {
  Expect target = Expect::Forbidden;
  std::set<Outcome> outcomes;
  std::optional<CandidateExecution> witness;

  bool permitted() const { return target == Expect::Permitted; }
};

// Consistency is split so that scord permutations are only explored for
// (rf, mo) pairs that already satisfy A1-A5, and only until one passes.
inline HllVerdict eval_hll(const LitmusTest& test, std::size_t cap = kDefaultCandidateCap) {
  HllVerdict v;
  std::optional<DerivedRelations> cur;
  bool found = false;
  auto keep = [&](const CandidateExecution& x) {
    cur = derive(x);
    AxiomReport rep;
    detail::check_coherence(x, *cur, rep);
    found = false;
    return rep.consistent();
  };
  auto visit = [&](const CandidateExecution& x) {
    if (found) return true;
    AxiomReport rep;
    detail::check_sc(x, *cur, rep);
    if (!rep.consistent()) return true;
    found = true;
    Outcome o = x.outcome();
    if (!v.witness && condition_holds(test.condition, o)) v.witness = x;
    v.outcomes.insert(std::move(o));
    return true;
  };
  for_each_candidate(test, visit, cap, keep);
  v.target = v.witness ? Expect::Permitted : Expect::Forbidden;
  return v;
}

}  // namespace tristack

#endif  // TRISTACK_C11AX_HPP_
