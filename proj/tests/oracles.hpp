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

#ifndef TRISTACK_TESTS_ORACLES_HPP_
#define TRISTACK_TESTS_ORACLES_HPP_

// Deliberately naive reference implementations. They share only the parsed
// data types with the library, never its enumeration or checking code.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "tristack/c11ax.hpp"
#include "tristack/litmus.hpp"
#include "tristack/mapping.hpp"

namespace oracle {

using tristack::EventKind;
using tristack::LitmusTest;
using tristack::MemOrder;
using tristack::Operand;
using tristack::Outcome;
using tristack::Value;

struct Ev {
  int thread = -1;  // -1: init write
  int index = 0;
  bool load = false;
  MemOrder order = MemOrder::Rlx;
  int static_loc = -1;
  int addr_src = -1;
  int val_src = -1;
  Value const_val;
  std::string dest;
};

inline std::vector<Ev> flatten(const LitmusTest& t) {
  std::vector<Ev> ev;
  for (std::size_t l = 0; l < t.locations.size(); ++l) {
    Ev e;
    e.static_loc = static_cast<int>(l);
    e.const_val = Value::Int(t.locations[l].second);
    ev.push_back(e);
  }
  for (std::size_t ti = 0; ti < t.threads.size(); ++ti) {
    std::map<std::string, int> last_load;
    for (const auto& he : t.threads[ti].events) {
      Ev e;
      e.thread = static_cast<int>(ti);
      e.index = he.index;
      e.load = he.kind == EventKind::Load;
      e.order = *he.order;
      if (he.addr.kind == Operand::Kind::Loc) e.static_loc = t.location_index(he.addr.name);
      else e.addr_src = last_load.at(he.addr.name);
      if (!e.load) {
        if (he.value.kind == Operand::Kind::Int) e.const_val = Value::Int(he.value.num);
        else if (he.value.kind == Operand::Kind::Loc) e.const_val = Value::Loc(he.value.name);
        else e.val_src = last_load.at(he.value.name);
      } else {
        e.dest = he.dest;
        last_load[he.dest] = static_cast<int>(ev.size());
      }
      ev.push_back(e);
    }
  }
  return ev;
}

struct Candidate {
  std::vector<int> rf;               // -1 for non-loads
  std::vector<std::vector<int>> mo;  // per location, init first
  std::vector<int> scord;
  bool consistent = false;
  Outcome outcome;

  auto key() const { return std::tie(rf, mo, scord); }
};

namespace detail {

using Mat = std::vector<std::vector<bool>>;

inline Mat mat(std::size_t n) { return Mat(n, std::vector<bool>(n, false)); }

inline void warshall(Mat& m) {
  const std::size_t n = m.size();
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (m[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (m[k][j]) m[i][j] = true;
}

inline bool consistent(const std::vector<Ev>& ev, const std::vector<int>& loc, const std::vector<int>& rf,
                       const std::vector<std::vector<int>>& mo_chains, const std::vector<int>& scord) {
  const std::size_t n = ev.size();
  auto is_store = [&](std::size_t i) { return !ev[i].load; };
  Mat sb = mat(n), mo = mat(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (ev[b].thread >= 0 && (ev[a].thread < 0 || (ev[a].thread == ev[b].thread && ev[a].index < ev[b].index)))
        sb[a][b] = true;
  for (const auto& c : mo_chains)
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = i + 1; j < c.size(); ++j) mo[c[i]][c[j]] = true;

  // w2 heads-in the release sequence of w unless another thread's write sits between.
  auto in_release_seq = [&](std::size_t w, std::size_t w2) {
    if (w == w2) return true;
    if (loc[w] != loc[w2] || !mo[w][w2] || ev[w2].thread != ev[w].thread) return false;
    for (std::size_t k = 0; k < n; ++k)
      if (is_store(k) && loc[k] == loc[w] && mo[w][k] && mo[k][w2] && ev[k].thread != ev[w].thread) return false;
    return true;
  };
  Mat hb = sb;
  for (std::size_t w = 0; w < n; ++w) {
    if (ev[w].thread < 0 || ev[w].load) continue;
    if (ev[w].order != MemOrder::Rel && ev[w].order != MemOrder::Sc) continue;
    for (std::size_t r = 0; r < n; ++r)
      if (ev[r].load && (ev[r].order == MemOrder::Acq || ev[r].order == MemOrder::Sc) &&
          in_release_seq(w, static_cast<std::size_t>(rf[r])))
        hb[w][r] = true;
  }
  warshall(hb);

  for (std::size_t i = 0; i < n; ++i)
    if (hb[i][i]) return false;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b || !hb[a][b] || loc[a] != loc[b]) continue;
      if (is_store(a) && is_store(b) && mo[b][a]) return false;
      if (!is_store(a) && !is_store(b) && mo[rf[b]][rf[a]]) return false;
      if (is_store(a) && !is_store(b) && mo[rf[b]][a]) return false;
      if (!is_store(a) && is_store(b) && (rf[a] == static_cast<int>(b) || mo[b][rf[a]])) return false;
    }
  std::vector<int> pos(n, -1);
  for (std::size_t i = 0; i < scord.size(); ++i) pos[scord[i]] = static_cast<int>(i);
  for (int a : scord)
    for (int b : scord)
      if (a != b && (hb[a][b] || mo[a][b]) && pos[a] > pos[b]) return false;
  for (int r : scord) {
    if (!ev[r].load) continue;
    int latest = -1;
    for (int w : scord)
      if (!ev[w].load && loc[w] == loc[r] && pos[w] < pos[r] && (latest < 0 || pos[w] > pos[latest])) latest = w;
    if (latest >= 0 && mo[rf[r]][latest]) return false;
  }
  return true;
}

}  // namespace detail

// Every (rf, mo, scord) triple compatible with value flow, each marked with an
// independently computed consistency bit.
inline std::vector<Candidate> hll_candidates(const LitmusTest& t) {
  const std::vector<Ev> ev = flatten(t);
  const std::size_t n = ev.size();
  const int nlocs = static_cast<int>(t.locations.size());
  std::vector<int> loads, writes, scs;
  for (std::size_t i = 0; i < n; ++i) {
    (ev[i].load ? loads : writes).push_back(static_cast<int>(i));
    if (ev[i].thread >= 0 && ev[i].order == MemOrder::Sc) scs.push_back(static_cast<int>(i));
  }

  std::vector<Candidate> out;
  std::vector<std::size_t> pick(loads.size(), 0);
  for (;;) {
    std::vector<int> rf(n, -1);
    for (std::size_t k = 0; k < loads.size(); ++k) rf[loads[k]] = writes[pick[k]];

    std::vector<std::optional<int>> loc(n);
    std::vector<std::optional<Value>> val(n);
    bool bad = false;
    for (std::size_t pass = 0; pass <= n && !bad; ++pass)
      for (std::size_t i = 0; i < n; ++i) {
        const Ev& e = ev[i];
        if (!loc[i]) {
          if (e.static_loc >= 0) {
            loc[i] = e.static_loc;
          } else if (val[e.addr_src]) {
            if (!val[e.addr_src]->is_loc()) bad = true;
            else loc[i] = t.location_index(val[e.addr_src]->loc);
          }
        }
        if (!val[i]) {
          if (e.load) val[i] = val[rf[i]];
          else if (e.val_src >= 0) val[i] = val[e.val_src];
          else val[i] = e.const_val;
        }
      }
    std::vector<int> rloc(n, -1);
    for (std::size_t i = 0; i < n && !bad; ++i) {
      if (!loc[i] || !val[i]) bad = true;
      else rloc[i] = *loc[i];
    }
    for (int r : loads)
      if (!bad && rloc[r] != rloc[rf[r]]) bad = true;

    if (!bad) {
      // Cartesian product of per-location write permutations, then scord.
      std::vector<std::vector<int>> tails(nlocs);
      for (int w : writes)
        if (ev[w].thread >= 0) tails[rloc[w]].push_back(w);
      std::function<void(int, std::vector<std::vector<int>>&)> mo_rec = [&](int l,
                                                                          std::vector<std::vector<int>>& mo) {
        if (l == nlocs) {
          std::vector<int> sc = scs;
          do {
            Candidate c;
            c.rf = rf;
            c.mo = mo;
            c.scord = sc;
            c.consistent = detail::consistent(ev, rloc, rf, mo, sc);
            for (int r : loads)
              if (ev[r].thread >= 0) c.outcome[t.threads[ev[r].thread].name + ":" + ev[r].dest] = *val[r];
            for (int m = 0; m < nlocs; ++m) c.outcome[t.locations[m].first] = *val[mo[m].back()];
            out.push_back(std::move(c));
          } while (std::next_permutation(sc.begin(), sc.end()));
          return;
        }
        std::vector<int> tail = tails[l];
        std::sort(tail.begin(), tail.end());
        do {
          mo[l] = {l};
          mo[l].insert(mo[l].end(), tail.begin(), tail.end());
          mo_rec(l + 1, mo);
        } while (std::next_permutation(tail.begin(), tail.end()));
      };
      std::vector<std::vector<int>> mo(nlocs);
      mo_rec(0, mo);
    }

    std::size_t k = 0;
    while (k < pick.size() && ++pick[k] == writes.size()) pick[k++] = 0;
    if (k == pick.size()) break;
  }
  return out;
}

inline std::set<Outcome> hll_outcomes(const LitmusTest& t) {
  std::set<Outcome> s;
  for (const auto& c : hll_candidates(t))
    if (c.consistent) s.insert(c.outcome);
  return s;
}

// Final states of every sequential interleaving of the test's events.
inline std::set<Outcome> hll_sc_outcomes(const LitmusTest& t) {
  std::set<Outcome> out;
  const std::size_t nt = t.threads.size();
  std::map<std::string, Value> mem;
  for (const auto& [l, v] : t.locations) mem[l] = Value::Int(v);
  std::vector<std::map<std::string, Value>> regs(nt);
  std::vector<std::size_t> pc(nt, 0);

  std::function<void()> rec = [&] {
    bool any = false;
    for (std::size_t ti = 0; ti < nt; ++ti) {
      const auto& th = t.threads[ti];
      if (pc[ti] == th.events.size()) continue;
      any = true;
      const auto& e = th.events[pc[ti]];
      std::string addr = e.addr.name;
      if (e.addr.kind == Operand::Kind::Reg) {
        const Value& a = regs[ti].at(e.addr.name);
        if (!a.is_loc()) continue;  // stuck: this path yields nothing
        addr = a.loc;
      }
      auto saved_mem = mem;
      auto saved_regs = regs[ti];
      if (e.kind == EventKind::Load) {
        regs[ti][e.dest] = mem.at(addr);
      } else if (e.value.kind == Operand::Kind::Int) {
        mem[addr] = Value::Int(e.value.num);
      } else if (e.value.kind == Operand::Kind::Loc) {
        mem[addr] = Value::Loc(e.value.name);
      } else {
        mem[addr] = regs[ti].at(e.value.name);
      }
      ++pc[ti];
      rec();
      --pc[ti];
      mem = saved_mem;
      regs[ti] = saved_regs;
    }
    if (!any) {
      Outcome o;
      for (std::size_t ti = 0; ti < nt; ++ti)
        for (const auto& [r, v] : regs[ti]) o[t.threads[ti].name + ":" + r] = v;
      for (const auto& [l, v] : mem) o[l] = v;
      out.insert(o);
    }
  };
  rec();
  return out;
}

// Final states of every sequential interleaving of an ISA program.
inline std::set<Outcome> isa_sc_outcomes(const tristack::IsaProgram& p) {
  using tristack::InstrKind;
  std::set<Outcome> out;
  const std::size_t nt = p.threads.size();
  std::map<std::string, Value> mem;
  for (const auto& [l, v] : p.locations) mem[l] = Value::Int(v);
  std::vector<std::map<int, Value>> regs(nt);
  // A preloaded register always supplies its preload as a write operand, even
  // after a load reuses it; only registers without a preload carry loaded values.
  // Fences are no-ops under interleaving; dropping them keeps the search small.
  std::vector<std::vector<tristack::IsaInstr>> code(nt);
  for (std::size_t ti = 0; ti < nt; ++ti) {
    regs[ti] = p.threads[ti].regs;
    for (const auto& in : p.threads[ti].instrs)
      if (in.kind != InstrKind::Fence) code[ti].push_back(in);
  }
  std::vector<std::size_t> pc(nt, 0);
  auto get = [&](std::size_t ti, int r) {
    if (r == 0) return Value::Int(0);
    auto it = regs[ti].find(r);
    return it == regs[ti].end() ? Value::Int(0) : it->second;
  };

  std::function<void()> rec = [&] {
    bool any = false;
    for (std::size_t ti = 0; ti < nt; ++ti) {
      if (pc[ti] == code[ti].size()) continue;
      any = true;
      const auto& in = code[ti][pc[ti]];
      auto saved_mem = mem;
      auto saved_regs = regs[ti];
      bool stuck = false;
      {
        const Value a = get(ti, in.addr);
        if (!a.is_loc()) {
          stuck = true;
        } else {
          const Value old = mem.at(a.loc);
          const auto& pre = p.threads[ti].regs;
          const Value operand = pre.count(in.src) ? pre.at(in.src) : get(ti, in.src);
          if (in.kind == InstrKind::Store) {
            mem[a.loc] = operand;
          } else if (in.kind == InstrKind::Amo) {
            // Adding zero leaves memory untouched, including location values.
            if (in.op == tristack::AmoOp::Swap)
              mem[a.loc] = operand;
            else if (operand.is_loc() || operand.num != 0)
              mem[a.loc] = Value::Int(old.num + operand.num);
          }
          if (in.kind != InstrKind::Store && in.dest != 0) regs[ti][in.dest] = old;
        }
      }
      if (!stuck) {
        ++pc[ti];
        rec();
        --pc[ti];
      }
      mem = saved_mem;
      regs[ti] = saved_regs;
    }
    if (!any) {
      Outcome o;
      for (std::size_t ti = 0; ti < nt; ++ti)
        for (const auto& [r, v] : regs[ti]) o[p.threads[ti].name + ":x" + std::to_string(r)] = v;
      for (const auto& [l, v] : mem) o[l] = v;
      out.insert(o);
    }
  };
  rec();
  return out;
}

}  // namespace oracle

#endif  // TRISTACK_TESTS_ORACLES_HPP_
