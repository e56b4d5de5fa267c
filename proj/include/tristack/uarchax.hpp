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

#ifndef TRISTACK_UARCHAX_HPP_
#define TRISTACK_UARCHAX_HPP_

#include <algorithm>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "tristack/c11ax.hpp"
#include "tristack/common.hpp"
#include "tristack/mapping.hpp"

namespace tristack {

enum class Mcm { Curr, Ours };
enum class Atomicity { MCA, rMCA, nMCA };

inline const char* to_string(Mcm m) { return m == Mcm::Curr ? "curr" : "ours"; }

inline Mcm parse_mcm(const std::string& s) {
  if (s == "curr" || s == "riscv-curr") return Mcm::Curr;
  if (s == "ours" || s == "riscv-ours") return Mcm::Ours;
  throw Error("unknown mcm '" + s + "' (expected curr or ours)");
}

inline const char* to_string(Atomicity a) {
  switch (a) {
    case Atomicity::MCA: return "MCA";
    case Atomicity::rMCA: return "rMCA";
    case Atomicity::nMCA: return "nMCA";
  }
  return "?";
}

inline Atomicity parse_atomicity(const std::string& s) {
  if (s == "MCA") return Atomicity::MCA;
  if (s == "rMCA") return Atomicity::rMCA;
  if (s == "nMCA") return Atomicity::nMCA;
  throw Error("unknown atomicity '" + s + "'");
}

struct ModelConfig {
  std::string id = "custom";
  Mcm mcm = Mcm::Curr;
  bool relax_WR = false;
  bool relax_WW = false;
  bool relax_RM = false;
  Atomicity atomicity = Atomicity::MCA;
  bool same_addr_rr_ordered = true;
  bool fences_cumulative = false;
  bool amo_rl_cumulative = false;
  bool amo_sc_decoupled = false;
  bool lazy_cumulativity = false;
  bool deps_ordered = false;

  // Flag equality; the id is a label only.
  bool same_flags(const ModelConfig& o) const {
    return mcm == o.mcm && relax_WR == o.relax_WR && relax_WW == o.relax_WW && relax_RM == o.relax_RM &&
           atomicity == o.atomicity && same_addr_rr_ordered == o.same_addr_rr_ordered &&
           fences_cumulative == o.fences_cumulative && amo_rl_cumulative == o.amo_rl_cumulative &&
           amo_sc_decoupled == o.amo_sc_decoupled && lazy_cumulativity == o.lazy_cumulativity &&
           deps_ordered == o.deps_ordered;
  }
};

inline const std::vector<std::string>& model_ids() {
  static const std::vector<std::string> ids = {"WR", "rWR", "rWM", "rMM", "nWR", "nMM", "A9like"};
  return ids;
}

inline void apply_mcm(ModelConfig& c, Mcm mcm) {
  const bool ours = mcm == Mcm::Ours;
  c.mcm = mcm;
  c.same_addr_rr_ordered = ours || !c.relax_RM;
  c.fences_cumulative = ours;
  c.amo_rl_cumulative = ours;
  c.amo_sc_decoupled = ours;
  c.lazy_cumulativity = ours;
  c.deps_ordered = ours;
}

inline ModelConfig model_preset(const std::string& id, Mcm mcm) {
  ModelConfig c;
  c.id = id;
  c.relax_WR = true;
  if (id == "WR") {
    c.atomicity = Atomicity::MCA;
  } else if (id == "rWR") {
    c.atomicity = Atomicity::rMCA;
  } else if (id == "rWM") {
    c.relax_WW = true;
    c.atomicity = Atomicity::rMCA;
  } else if (id == "rMM") {
    c.relax_WW = c.relax_RM = true;
    c.atomicity = Atomicity::rMCA;
  } else if (id == "nWR") {
    c.atomicity = Atomicity::nMCA;
  } else if (id == "nMM" || id == "A9like") {
    c.relax_WW = c.relax_RM = true;
    c.atomicity = Atomicity::nMCA;
  } else {
    throw Error("unknown model id '" + id + "'");
  }
  apply_mcm(c, mcm);
  return c;
}

// No relaxation at all: sequential consistency.
inline ModelConfig sc_config() {
  ModelConfig c;
  c.id = "SC";
  apply_mcm(c, Mcm::Curr);
  return c;
}

// `name=true|false` lines plus `atomicity=`, `mcm=` and `id=`; `#` comments.
// Starts from `base`, so a file may override a preset.
inline ModelConfig load_model_config(std::istream& in, ModelConfig base = sc_config()) {
  std::map<std::string, bool ModelConfig::*> flags = {
      {"relax_WR", &ModelConfig::relax_WR},
      {"relax_WW", &ModelConfig::relax_WW},
      {"relax_RM", &ModelConfig::relax_RM},
      {"same_addr_rr_ordered", &ModelConfig::same_addr_rr_ordered},
      {"fences_cumulative", &ModelConfig::fences_cumulative},
      {"amo_rl_cumulative", &ModelConfig::amo_rl_cumulative},
      {"amo_sc_decoupled", &ModelConfig::amo_sc_decoupled},
      {"lazy_cumulativity", &ModelConfig::lazy_cumulativity},
      {"deps_ordered", &ModelConfig::deps_ordered},
  };
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    auto trim = [](std::string s) {
      const char* ws = " \t\r";
      s.erase(0, s.find_first_not_of(ws));
      s.erase(s.find_last_not_of(ws) + 1);
      return s;
    };
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected name=value", lineno, 1);
    const std::string k = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    if (k == "atomicity") {
      base.atomicity = parse_atomicity(v);
    } else if (k == "mcm") {
      base.mcm = parse_mcm(v);
    } else if (k == "id" || k == "name") {
      base.id = v;
    } else if (auto it = flags.find(k); it != flags.end()) {
      if (v != "true" && v != "false") throw ParseError("expected true or false for " + k, lineno, 1);
      base.*(it->second) = v == "true";
    } else {
      throw ParseError("unknown config key '" + k + "'", lineno, 1);
    }
  }
  return base;
}

inline ModelConfig load_model_config(const std::string& text, ModelConfig base = sc_config()) {
  std::istringstream in(text);
  return load_model_config(in, std::move(base));
}

// One step of a witness: an instruction executing on its core, or a write
// becoming visible to `dest` (-1: to all cores at once).
struct UEvent {
  enum class Type { Exec, Prop };

  Type type = Type::Exec;
  int core = 0;
  int instr = 0;  // access index within the core
  int dest = -1;
  int guess = -1;  // speculated location of a dynamic-address read

  friend bool operator==(const UEvent&, const UEvent&) = default;
};

struct IsaExecution {
  std::vector<UEvent> trace;
  std::map<std::pair<int, int>, int> rf;  // (core, access) -> write id
  std::vector<std::vector<int>> mo;       // per location, write ids
  Outcome outcome;
};

struct Observability {
  bool observable = false;
  std::optional<IsaExecution> witness;
  std::size_t states = 0;
};

constexpr std::size_t kDefaultStateCap = 20000000;

namespace detail {

// A memory access after fence removal, with operands resolved.
struct UAccess {
  int core = 0;
  int idx = 0;     // access index within the core
  int instr = 0;   // instruction index within the thread
  InstrKind kind = InstrKind::Load;
  bool rd = false, wr = false, amo = false;
  bool aq = false, rl = false, sc = false;
  AmoOp op = AmoOp::Add;
  int static_loc = -1;
  int addr_src = -1;  // access idx producing the address
  int val_src = -1;   // access idx producing the written operand
  Value const_val;
  int dest = 0;
  int wid = -1;  // write id
  int rid = -1;  // read id
};

enum ReqBits : unsigned {
  kExec = 1u << 0,
  kSameRR = 1u << 1,
  kSameRW = 1u << 2,
  kProp = 1u << 3,
  kFull = 1u << 4,
  kCumProp = 1u << 5,
  kCumFull = 1u << 6,
};

struct Analysis {
  const IsaProgram* prog = nullptr;
  ModelConfig cfg;
  int ncores = 0;
  int nlocs = 0;
  std::vector<std::vector<UAccess>> acc;
  std::vector<std::vector<std::vector<unsigned>>> req;  // [core][j][i], j < i
  std::vector<std::pair<int, int>> writes;              // wid -> (core, idx); init: (-1, loc)
  std::vector<std::pair<int, int>> reads;               // rid -> (core, idx)
  std::vector<int> write_loc;
  std::vector<Value> init_val;

  const UAccess& at(int c, int i) const { return acc[c][i]; }
  std::uint32_t all_cores() const { return ncores >= 32 ? 0xffffffffu : ((1u << ncores) - 1); }
  bool prop_all_exec(const UAccess& a) const {
    return a.wr && a.amo && (a.sc || cfg.atomicity != Atomicity::nMCA);
  }
  bool forwards() const { return cfg.atomicity != Atomicity::MCA; }
};

inline Analysis analyse(const IsaProgram& p, const ModelConfig& cfg) {
  if (p.family != IsaFamily::RiscV) throw Error("only RISC-V programs can be evaluated");
  Analysis an;
  an.prog = &p;
  an.cfg = cfg;
  an.ncores = static_cast<int>(p.threads.size());
  an.nlocs = static_cast<int>(p.locations.size());
  if (an.ncores > 31) throw Error("at most 31 threads are supported");
  for (int l = 0; l < an.nlocs; ++l) {
    an.writes.emplace_back(-1, l);
    an.write_loc.push_back(l);
    an.init_val.push_back(Value::Int(p.locations[l].second));
  }
  an.acc.resize(an.ncores);
  an.req.resize(an.ncores);
  const bool ours = cfg.mcm == Mcm::Ours;

  for (int c = 0; c < an.ncores; ++c) {
    const auto& th = p.threads[c];
    std::map<int, int> writer;  // register -> access idx
    std::vector<int> instr_of;
    auto constant = [&](int reg) -> std::optional<Value> {
      if (reg == 0) return Value::Int(0);
      auto b = th.regs.find(reg);
      if (b != th.regs.end()) return b->second;
      return std::nullopt;
    };
    for (std::size_t ii = 0; ii < th.instrs.size(); ++ii) {
      const auto& ins = th.instrs[ii];
      if (!ins.is_access()) continue;
      UAccess a;
      a.core = c;
      a.idx = static_cast<int>(an.acc[c].size());
      a.instr = static_cast<int>(ii);
      a.kind = ins.kind;
      a.amo = ins.kind == InstrKind::Amo;
      a.rd = ins.is_read();
      a.wr = ins.is_write();
      a.aq = ins.aq;
      a.rl = ins.rl;
      a.sc = ins.aq && ins.rl;
      if (ours && cfg.amo_sc_decoupled) a.sc = a.sc || ins.sc;
      a.op = ins.op;
      a.dest = ins.dest;
      if (auto v = constant(ins.addr)) {
        if (!v->is_loc()) throw Error("address register x" + std::to_string(ins.addr) + " holds a non-location");
        a.static_loc = p.location_index(v->loc);
      } else if (auto w = writer.find(ins.addr); w != writer.end()) {
        a.addr_src = w->second;
      } else {
        throw Error("register x" + std::to_string(ins.addr) + " used before definition");
      }
      if (a.wr) {
        if (auto v = constant(ins.src)) {
          a.const_val = *v;
        } else if (auto w = writer.find(ins.src); w != writer.end()) {
          a.val_src = w->second;
        } else {
          throw Error("register x" + std::to_string(ins.src) + " used before definition");
        }
        // An add of constant zero never changes memory: a read-only access.
        if (a.amo && a.op == AmoOp::Add && a.val_src < 0 && !a.const_val.is_loc() && a.const_val.num == 0)
          a.wr = false;
      }
      if (a.wr) {
        if (a.static_loc < 0) throw Error("writes to computed addresses are not supported");
        a.wid = static_cast<int>(an.writes.size());
        an.writes.emplace_back(c, a.idx);
        an.write_loc.push_back(a.static_loc);
      }
      if (a.rd) {
        a.rid = static_cast<int>(an.reads.size());
        an.reads.emplace_back(c, a.idx);
      }
      if (a.rd && a.dest != 0) writer[a.dest] = a.idx;
      an.acc[c].push_back(a);
      instr_of.push_back(static_cast<int>(ii));
    }

    const int n = static_cast<int>(an.acc[c].size());
    auto& R = an.req[c];
    R.assign(n, std::vector<unsigned>(n, 0));
    for (int i = 0; i < n; ++i) {
      const UAccess& ai = an.acc[c][i];
      for (int j = 0; j < i; ++j) {
        const UAccess& aj = an.acc[c][j];
        unsigned r = 0;
        // An AMO whose old value goes to x0 is a store as far as program-order
        // relaxation is concerned; its read half is never observed.
        const bool jr = aj.rd && !(aj.amo && aj.wr && aj.dest == 0);
        const bool ir = ai.rd && !(ai.amo && ai.wr && ai.dest == 0);
        if (jr && ir) {
          if (!cfg.relax_RM) r |= kExec;
          else if (cfg.same_addr_rr_ordered) r |= kSameRR;
        }
        if (jr && ai.wr) r |= cfg.relax_RM ? kSameRW : kExec;
        if (aj.wr && ai.wr && !cfg.relax_WW) r |= kProp;
        if (aj.wr && ir && !cfg.relax_WR) r |= kFull;
        if (ai.val_src == j) r |= kExec;
        if (ai.addr_src == j && cfg.deps_ordered) r |= kExec;
        if (aj.sc && ai.sc) r |= kExec;
        if (aj.amo && aj.aq) r |= kExec;
        if (ai.amo && ai.rl) {
          if (jr) r |= kExec;
          if (!cfg.lazy_cumulativity) {
            if (aj.wr) r |= kProp;
            if (aj.rd && cfg.amo_rl_cumulative) r |= kCumProp;
          }
        }
        // Fences strictly between the two accesses.
        for (int fi = instr_of[j] + 1; fi < instr_of[i]; ++fi) {
          const auto& f = th.instrs[fi];
          if (f.kind != InstrKind::Fence) continue;
          Cumulativity cum = cfg.fences_cumulative ? f.cum : Cumulativity::None;
          const bool pr = f.pred & kR, pw = f.pred & kW, sr = f.succ & kR, sw = f.succ & kW;
          switch (cum) {
            case Cumulativity::None:
              if (aj.rd && pr && ((ai.rd && sr) || (ai.wr && sw))) r |= kExec;
              if (aj.wr && pw && ai.wr && sw) r |= kProp;
              if (aj.wr && pw && ai.rd && sr) r |= kFull;
              break;
            case Cumulativity::Lightweight:
              if (aj.rd) r |= kExec;
              if (aj.wr && ai.wr) r |= kProp;
              if (aj.rd && ai.wr) r |= kCumProp;
              break;
            case Cumulativity::Heavyweight:
              if (aj.rd) r |= kExec | kCumFull;
              if (aj.wr) r |= kFull;
              break;
          }
        }
        R[j][i] = r;
      }
    }
  }
  return an;
}

struct UState {
  std::vector<std::uint64_t> exec;  // per core, executed access mask
  std::vector<std::uint32_t> prop;  // per write, cores it is visible to
  std::vector<int> rf;              // per read, source write or -1
  std::vector<int> addr;            // per read, resolved or guessed location
  std::vector<Value> wval;          // per write
  std::vector<Value> rval;          // per read

  std::string key() const {
    std::string k;
    auto put = [&](const void* p, std::size_t n) { k.append(static_cast<const char*>(p), n); };
    put(exec.data(), exec.size() * sizeof(exec[0]));
    put(prop.data(), prop.size() * sizeof(prop[0]));
    put(rf.data(), rf.size() * sizeof(rf[0]));
    put(addr.data(), addr.size() * sizeof(addr[0]));
    return k;
  }
};

// Modification order plus per-write position for one outer choice.
struct MoChoice {
  std::vector<std::vector<int>> order;  // per location
  std::vector<int> pos;                 // per write id
  std::vector<int> pred;                // per write id, -1 for init
};

inline std::vector<MoChoice> mo_choices(const Analysis& an) {
  std::vector<std::vector<std::vector<int>>> per_loc(an.nlocs);
  for (int l = 0; l < an.nlocs; ++l) {
    std::vector<int> ws;
    for (std::size_t w = an.nlocs; w < an.writes.size(); ++w)
      if (an.write_loc[w] == l) ws.push_back(static_cast<int>(w));
    do {
      bool ok = true;
      // Same-core writes keep program order.
      for (std::size_t a = 0; a < ws.size() && ok; ++a)
        for (std::size_t b = a + 1; b < ws.size() && ok; ++b)
          if (an.writes[ws[a]].first == an.writes[ws[b]].first &&
              an.writes[ws[a]].second > an.writes[ws[b]].second)
            ok = false;
      if (!ok) continue;
      std::vector<int> o = {l};
      o.insert(o.end(), ws.begin(), ws.end());
      per_loc[l].push_back(o);
    } while (std::next_permutation(ws.begin(), ws.end()));
  }
  std::vector<MoChoice> out;
  std::vector<std::size_t> digit(an.nlocs, 0);
  while (true) {
    MoChoice m;
    m.pos.assign(an.writes.size(), 0);
    m.pred.assign(an.writes.size(), -1);
    for (int l = 0; l < an.nlocs; ++l) {
      m.order.push_back(per_loc[l][digit[l]]);
      const auto& o = m.order.back();
      for (std::size_t k = 0; k < o.size(); ++k) {
        m.pos[o[k]] = static_cast<int>(k);
        m.pred[o[k]] = k ? o[k - 1] : -1;
      }
    }
    out.push_back(std::move(m));
    int k = an.nlocs;
    while (k > 0) {
      --k;
      if (++digit[k] < per_loc[k].size()) break;
      digit[k] = 0;
      if (k == 0) return out;
    }
    if (an.nlocs == 0) return out;
  }
}

inline Value amo_result(AmoOp op, const Value& old, const Value& operand) {
  if (op == AmoOp::Swap) return operand;
  if (old.is_loc() || operand.is_loc()) return Value::Int(0);  // never produced by compiled tests
  return Value::Int(old.num + operand.num);
}

inline Outcome final_outcome(const Analysis& an, const UState& s, const MoChoice& mo) {
  Outcome o;
  const auto& p = *an.prog;
  for (int c = 0; c < an.ncores; ++c) {
    const auto& th = p.threads[c];
    for (const auto& [r, v] : th.regs) o[th.name + ":x" + std::to_string(r)] = v;
    for (const auto& a : an.acc[c])
      if (a.rd && a.dest != 0) o[th.name + ":x" + std::to_string(a.dest)] = s.rval[a.rid];
  }
  for (int l = 0; l < an.nlocs; ++l) {
    const int w = mo.order[l].back();
    o[p.locations[l].first] = w < an.nlocs ? an.init_val[w] : s.wval[w];
  }
  return o;
}

inline bool target_holds(const IsaProgram& p, const Outcome& o) {
  for (const auto& a : p.target) {
    const std::string key = a.kind == IsaCondAtom::Kind::Mem ? a.loc : a.thread + ":x" + std::to_string(a.reg);
    auto it = o.find(key);
    if (it == o.end() || it->second != a.value) return false;
  }
  return true;
}

// Pred(R) of a release write, for the release-observation obligation.
inline void release_preds(const Analysis& an, const UState& s, int core, int idx, std::set<int>& out,
                          std::set<std::pair<int, int>>& seen) {
  if (!seen.insert({core, idx}).second) return;
  for (int j = 0; j < idx; ++j) {
    const UAccess& aj = an.acc[core][j];
    if (aj.wr) out.insert(aj.wid);
    if (aj.rd && an.cfg.amo_rl_cumulative) {
      const int w = s.rf[aj.rid];
      out.insert(w);
      if (w >= an.nlocs) {
        const auto [wc, wi] = an.writes[w];
        const UAccess& src = an.acc[wc][wi];
        if (src.rl && wc != core && (!an.cfg.lazy_cumulativity || aj.aq))
          release_preds(an, s, wc, wi, out, seen);
      }
    }
  }
}

// Release observation: once a remote load that binds reads a release, later
// same-location accesses on the loading core see at least the release's
// predecessors.
inline bool release_obligations_hold(const Analysis& an, const UState& s, const MoChoice& mo) {
  for (int c = 0; c < an.ncores; ++c) {
    for (const UAccess& l : an.acc[c]) {
      if (!l.rd) continue;
      const int w = s.rf[l.rid];
      if (w < an.nlocs) continue;
      const auto [rc, ri] = an.writes[w];
      const UAccess& rel = an.acc[rc][ri];
      if (!rel.rl || rc == c) continue;
      if (an.cfg.lazy_cumulativity && !l.aq) continue;
      std::set<int> preds;
      std::set<std::pair<int, int>> seen;
      release_preds(an, s, rc, ri, preds, seen);
      for (int p : preds) {
        const int ploc = an.write_loc[p];
        for (std::size_t k = l.idx + 1; k < an.acc[c].size(); ++k) {
          const UAccess& a = an.acc[c][k];
          const int aloc = a.rd ? s.addr[a.rid] : a.static_loc;
          if (aloc != ploc) continue;
          if (a.rd && mo.pos[s.rf[a.rid]] < mo.pos[p]) return false;
          if (a.wr && mo.pos[a.wid] <= mo.pos[p]) return false;
        }
      }
    }
  }
  return true;
}

class Explorer {
 public:
  Explorer(const Analysis& an, const MoChoice& mo, std::size_t cap, std::size_t& states)
      : an_(an), mo_(mo), cap_(cap), states_(states) {}

  // Calls `on_final` for each distinct final behaviour reachable under this mo.
  // Returns false if `on_final` asked to stop.
  bool run(const std::function<bool(const IsaExecution&)>& on_final) {
    on_final_ = &on_final;
    UState s;
    s.exec.assign(an_.ncores, 0);
    s.prop.assign(an_.writes.size(), 0);
    for (int l = 0; l < an_.nlocs; ++l) s.prop[l] = an_.all_cores();
    s.rf.assign(an_.reads.size(), -1);
    s.addr.assign(an_.reads.size(), -1);
    s.wval.assign(an_.writes.size(), Value::Int(0));
    s.rval.assign(an_.reads.size(), Value::Int(0));
    for (int l = 0; l < an_.nlocs; ++l) s.wval[l] = an_.init_val[l];
    for (const auto& core : an_.acc)
      for (const auto& a : core)
        if (a.rd && a.static_loc >= 0) s.addr[a.rid] = a.static_loc;
    dfs(s);
    return !stopped_;
  }

 private:
  bool executed(const UState& s, int c, int i) const { return (s.exec[c] >> i) & 1u; }
  bool visible(const UState& s, int w, int d) const { return (s.prop[w] >> d) & 1u; }
  bool fully(const UState& s, int w) const { return s.prop[w] == an_.all_cores(); }

  int addr_of(const UState& s, const UAccess& a) const { return a.rd ? s.addr[a.rid] : a.static_loc; }

  // Write w may become visible to core d.
  bool can_prop(const UState& s, int w, int d) const {
    if (visible(s, w, d)) return false;
    const int p = mo_.pred[w];
    if (p >= 0 && !visible(s, p, d)) return false;
    const auto [c, i] = an_.writes[w];
    for (int j = 0; j < i; ++j) {
      const unsigned r = an_.req[c][j][i];
      const UAccess& aj = an_.acc[c][j];
      if ((r & kProp) && aj.wr && !visible(s, aj.wid, d)) return false;
      if ((r & kCumProp) && aj.rd && (!executed(s, c, j) || !visible(s, s.rf[aj.rid], d))) return false;
    }
    return true;
  }

  // Ordering constraints on exec(i) other than value and address choice.
  bool exec_ordered(const UState& s, const UAccess& a, int loc) const {
    const int c = a.core;
    for (int j = 0; j < a.idx; ++j) {
      const unsigned r = an_.req[c][j][a.idx];
      const UAccess& aj = an_.acc[c][j];
      const bool done = executed(s, c, j);
      if (!done) {
        if (r & kExec) return false;
        if (r & (kSameRR | kSameRW)) {
          const int jl = addr_of(s, aj);
          if (jl < 0 || jl == loc) {
            if ((r & kSameRR) && a.rd) return false;
            if ((r & kSameRW) && a.wr) return false;
          }
        }
        // Reads wait for earlier same-address writes to execute.
        if (a.rd && aj.wr && aj.static_loc == loc) return false;
        if (r & (kFull | kCumFull)) return false;
        continue;
      }
      if ((r & kFull) && aj.wr && !fully(s, aj.wid)) return false;
      if ((r & kCumFull) && aj.rd && !fully(s, s.rf[aj.rid])) return false;
      // Without forwarding a read waits for its own earlier store to drain.
      if (a.rd && aj.wr && aj.static_loc == loc && !an_.forwards() && !fully(s, aj.wid)) return false;
    }
    if (a.wr && a.val_src >= 0 && !executed(s, c, a.val_src)) return false;
    return true;
  }

  Value operand(const UState& s, const UAccess& a) const {
    if (a.val_src < 0) return a.const_val;
    return s.rval[an_.acc[a.core][a.val_src].rid];
  }

  void step(UState& s, const UEvent& ev) {
    trace_.push_back(ev);
    dfs(s);
    trace_.pop_back();
  }

  void try_exec(const UState& s, const UAccess& a) {
    const int c = a.core;
    std::vector<int> locs;
    if (a.static_loc >= 0) {
      locs.push_back(a.static_loc);
    } else if (executed(s, c, a.addr_src)) {
      const Value v = s.rval[an_.acc[c][a.addr_src].rid];
      if (!v.is_loc()) return;  // non-location dereference
      locs.push_back(an_.prog->location_index(v.loc));
    } else {
      for (int l = 0; l < an_.nlocs; ++l) locs.push_back(l);
    }
    for (int loc : locs) {
      if (stopped_) return;
      if (!exec_ordered(s, a, loc)) continue;
      UState n = s;
      int guess = -1;
      if (a.rd) {
        if (a.static_loc < 0 && !executed(s, c, a.addr_src)) guess = loc;
        n.addr[a.rid] = loc;
      }
      if (a.wr) {
        std::uint32_t targets = an_.prop_all_exec(a) ? an_.all_cores()
                                : a.amo                ? (1u << c)
                                                       : 0u;
        bool ok = true;
        for (int d = 0; d < an_.ncores && ok; ++d)
          if (((targets >> d) & 1u) && !can_prop(s, a.wid, d)) ok = false;
        if (!ok) continue;
        n.prop[a.wid] |= targets;
      }
      if (a.rd) {
        int src = -1;
        if (a.wr) {
          src = mo_.pred[a.wid];
        } else {
          if (an_.forwards()) {
            for (int j = a.idx - 1; j >= 0; --j) {
              const UAccess& aj = an_.acc[c][j];
              if (aj.wr && aj.static_loc == loc) {
                if (!visible(s, aj.wid, c)) src = aj.wid;
                break;
              }
            }
          }
          if (src < 0) {
            for (int w : mo_.order[loc])
              if (visible(s, w, c)) src = w;
          }
        }
        n.rf[a.rid] = src;
        n.rval[a.rid] = s.wval[src];
      }
      if (a.wr) n.wval[a.wid] = a.amo ? amo_result(a.op, n.rval[a.rid], operand(s, a)) : operand(s, a);
      n.exec[c] |= std::uint64_t{1} << a.idx;
      // Validate guesses that depended on this read.
      if (a.rd) {
        bool ok = true;
        for (const UAccess& b : an_.acc[c])
          if (b.rd && b.addr_src == a.idx && executed(n, c, b.idx)) {
            const Value& v = n.rval[a.rid];
            if (!v.is_loc() || an_.prog->location_index(v.loc) != n.addr[b.rid]) ok = false;
          }
        if (!ok) continue;
      }
      step(n, UEvent{UEvent::Type::Exec, c, a.idx, -1, guess});
    }
  }

  // Core d still has a read that may observe location l.
  bool pending_read(const UState& s, int d, int l) const {
    for (const UAccess& a : an_.acc[d])
      if (a.rd && !executed(s, d, a.idx) && (a.static_loc == l || a.static_loc < 0)) return true;
    return false;
  }

  // Plain-store executes and propagations no pending read can observe only
  // ever enable other events, so one of them is explored alone.
  bool take_invisible(UState& s) {
    for (int c = 0; c < an_.ncores; ++c)
      for (const UAccess& a : an_.acc[c])
        if (a.wr && !a.amo && !executed(s, c, a.idx) && exec_ordered(s, a, a.static_loc)) {
          try_exec(s, a);
          return true;
        }
    for (std::size_t w = an_.nlocs; w < an_.writes.size(); ++w) {
      const int wi = static_cast<int>(w);
      const auto [c, i] = an_.writes[w];
      if (fully(s, wi) || !executed(s, c, i)) continue;
      const int l = an_.write_loc[w];
      if (an_.cfg.atomicity == Atomicity::nMCA) {
        for (int d = 0; d < an_.ncores; ++d) {
          if (!can_prop(s, wi, d) || pending_read(s, d, l)) continue;
          UState n = s;
          n.prop[w] |= 1u << d;
          step(n, UEvent{UEvent::Type::Prop, c, i, d, -1});
          return true;
        }
      } else {
        bool ok = true;
        for (int d = 0; d < an_.ncores && ok; ++d)
          if (!visible(s, wi, d) && (!can_prop(s, wi, d) || pending_read(s, d, l))) ok = false;
        if (!ok) continue;
        UState n = s;
        n.prop[w] = an_.all_cores();
        step(n, UEvent{UEvent::Type::Prop, c, i, -1, -1});
        return true;
      }
    }
    return false;
  }

  void dfs(UState& s) {
    if (stopped_) return;
    if (!seen_.insert(s.key()).second) return;
    if (++states_ > cap_) throw ResourceLimitError("microarchitectural state search", cap_);

    if (take_invisible(s)) return;

    bool all_done = true;
    for (int c = 0; c < an_.ncores; ++c) {
      for (const UAccess& a : an_.acc[c]) {
        if (executed(s, c, a.idx)) continue;
        all_done = false;
        try_exec(s, a);
        if (stopped_) return;
      }
    }
    for (std::size_t w = an_.nlocs; w < an_.writes.size(); ++w) {
      if (fully(s, static_cast<int>(w))) continue;
      all_done = false;
      const auto [c, i] = an_.writes[w];
      if (!executed(s, c, i)) continue;
      if (an_.cfg.atomicity == Atomicity::nMCA) {
        for (int d = 0; d < an_.ncores; ++d) {
          if (!can_prop(s, static_cast<int>(w), d)) continue;
          UState n = s;
          n.prop[w] |= 1u << d;
          step(n, UEvent{UEvent::Type::Prop, c, i, d, -1});
          if (stopped_) return;
        }
      } else {
        bool ok = true;
        for (int d = 0; d < an_.ncores && ok; ++d)
          if (!visible(s, static_cast<int>(w), d) && !can_prop(s, static_cast<int>(w), d)) ok = false;
        if (!ok) continue;
        UState n = s;
        n.prop[w] = an_.all_cores();
        step(n, UEvent{UEvent::Type::Prop, c, i, -1, -1});
        if (stopped_) return;
      }
    }
    if (!all_done) return;
    if (!release_obligations_hold(an_, s, mo_)) return;
    IsaExecution x;
    x.trace = trace_;
    for (std::size_t r = 0; r < an_.reads.size(); ++r) x.rf[an_.reads[r]] = s.rf[r];
    x.mo = mo_.order;
    x.outcome = final_outcome(an_, s, mo_);
    if (!(*on_final_)(x)) stopped_ = true;
  }

  const Analysis& an_;
  const MoChoice& mo_;
  std::size_t cap_;
  std::size_t& states_;
  std::unordered_set<std::string> seen_;
  std::vector<UEvent> trace_;
  const std::function<bool(const IsaExecution&)>* on_final_ = nullptr;
  bool stopped_ = false;
};

inline std::size_t explore(const IsaProgram& prog, const ModelConfig& cfg, std::size_t cap,
                           const std::function<bool(const IsaExecution&)>& on_final) {
  const Analysis an = analyse(prog, cfg);
  std::size_t states = 0;
  for (const auto& mo : mo_choices(an)) {
    Explorer ex(an, mo, cap, states);
    if (!ex.run(on_final)) break;
  }
  return states;
}

}  // namespace detail

// Distinct final behaviours, each with the first trace found for it.
inline std::vector<IsaExecution> enumerate_isa_executions(const IsaProgram& prog, const ModelConfig& cfg,
                                                          std::size_t cap = kDefaultStateCap) {
  std::vector<IsaExecution> out;
  std::set<std::pair<Outcome, std::map<std::pair<int, int>, int>>> seen;
  detail::explore(prog, cfg, cap, [&](const IsaExecution& x) {
    if (seen.insert({x.outcome, x.rf}).second) out.push_back(x);
    return true;
  });
  return out;
}

inline std::set<Outcome> isa_outcomes(const IsaProgram& prog, const ModelConfig& cfg,
                                      std::size_t cap = kDefaultStateCap) {
  std::set<Outcome> out;
  detail::explore(prog, cfg, cap, [&](const IsaExecution& x) {
    out.insert(x.outcome);
    return true;
  });
  return out;
}

inline bool target_holds(const IsaProgram& p, const Outcome& o) { return detail::target_holds(p, o); }

inline Observability eval_uarch(const IsaProgram& prog, const ModelConfig& cfg,
                                std::size_t cap = kDefaultStateCap) {
  Observability obs;
  obs.states = detail::explore(prog, cfg, cap, [&](const IsaExecution& x) {
    if (!detail::target_holds(prog, x.outcome)) return true;
    obs.observable = true;
    obs.witness = x;
    return false;
  });
  return obs;
}

// Declarative re-check of a witness: every constraint is evaluated over the
// positions of its events. Returns the violated constraints, empty if valid.
inline std::vector<std::string> check_execution(const IsaProgram& prog, const ModelConfig& cfg,
                                                const IsaExecution& x) {
  using namespace detail;
  std::vector<std::string> bad;
  const Analysis an = analyse(prog, cfg);
  const int nw = static_cast<int>(an.writes.size());
  const int never = 1 << 30;
  std::vector<std::vector<int>> exec_pos(an.ncores);
  for (int c = 0; c < an.ncores; ++c) exec_pos[c].assign(an.acc[c].size(), never);
  std::vector<std::vector<int>> prop_pos(nw, std::vector<int>(an.ncores, never));
  for (int w = 0; w < an.nlocs; ++w) prop_pos[w].assign(an.ncores, -1);
  std::vector<int> guess(an.reads.size(), -1);

  for (int k = 0; k < static_cast<int>(x.trace.size()); ++k) {
    const UEvent& e = x.trace[k];
    if (e.core < 0 || e.core >= an.ncores || e.instr < 0 || e.instr >= static_cast<int>(an.acc[e.core].size())) {
      bad.push_back("C1: event refers to a missing instruction");
      return bad;
    }
    const UAccess& a = an.acc[e.core][e.instr];
    if (e.type == UEvent::Type::Exec) {
      if (exec_pos[e.core][e.instr] != never) bad.push_back("C1: instruction executed twice");
      exec_pos[e.core][e.instr] = k;
      if (a.rd) guess[a.rid] = e.guess;
      if (a.wr) {
        if (an.prop_all_exec(a)) prop_pos[a.wid].assign(an.ncores, k);
        else if (a.amo) prop_pos[a.wid][e.core] = k;
      }
    } else {
      if (!a.wr) {
        bad.push_back("C1: propagation of a non-write");
        continue;
      }
      if (e.dest < 0) {
        if (cfg.atomicity == Atomicity::nMCA) bad.push_back("C2: atomic propagation on an nMCA model");
        for (int d = 0; d < an.ncores; ++d)
          if (prop_pos[a.wid][d] == never) prop_pos[a.wid][d] = k;
      } else {
        if (cfg.atomicity != Atomicity::nMCA) bad.push_back("C2: per-core propagation on a store-atomic model");
        if (prop_pos[a.wid][e.dest] != never) bad.push_back("C3: write propagated twice to one core");
        prop_pos[a.wid][e.dest] = k;
      }
    }
  }
  for (int c = 0; c < an.ncores; ++c)
    for (const auto& p : exec_pos[c])
      if (p == never) bad.push_back("C1: instruction never executed");
  for (int w = an.nlocs; w < nw; ++w)
    for (int d = 0; d < an.ncores; ++d) {
      const auto [c, i] = an.writes[w];
      if (prop_pos[w][d] == never) bad.push_back("C1: write never propagated");
      else if (prop_pos[w][d] < exec_pos[c][i]) bad.push_back("C1: write visible before it executes");
    }
  if (!bad.empty()) return bad;

  // mo must be a per-location order with init first and same-core writes in po.
  if (static_cast<int>(x.mo.size()) != an.nlocs) return {"C3: malformed modification order"};
  MoChoice mo;
  mo.order = x.mo;
  mo.pos.assign(nw, -1);
  mo.pred.assign(nw, -1);
  for (int l = 0; l < an.nlocs; ++l) {
    const auto& o = x.mo[l];
    if (o.empty() || o[0] != l) bad.push_back("C3: init write not first in mo");
    for (std::size_t k = 0; k < o.size(); ++k) {
      if (o[k] < 0 || o[k] >= nw || an.write_loc[o[k]] != l) return {"C3: mo mixes locations"};
      mo.pos[o[k]] = static_cast<int>(k);
      mo.pred[o[k]] = k ? o[k - 1] : -1;
    }
  }
  for (int w = 0; w < nw; ++w)
    if (mo.pos[w] < 0) return {"C3: write missing from mo"};
  for (int w = an.nlocs; w < nw; ++w) {
    for (int v = an.nlocs; v < nw; ++v)
      if (an.writes[w].first == an.writes[v].first && an.write_loc[w] == an.write_loc[v] &&
          an.writes[w].second < an.writes[v].second && mo.pos[w] > mo.pos[v])
        bad.push_back("C3: mo contradicts program order");
    const int p = mo.pred[w];
    for (int d = 0; d < an.ncores; ++d)
      if (p >= 0 && prop_pos[p][d] > prop_pos[w][d]) bad.push_back("C3: propagation order contradicts mo");
  }

  // Replay values in trace order, checking the read rule at each read.
  UState s;
  s.rf.assign(an.reads.size(), -1);
  s.addr.assign(an.reads.size(), -1);
  s.rval.assign(an.reads.size(), Value::Int(0));
  s.wval.assign(nw, Value::Int(0));
  for (int l = 0; l < an.nlocs; ++l) s.wval[l] = an.init_val[l];
  for (const UEvent& e : x.trace) {
    if (e.type != UEvent::Type::Exec) continue;
    const UAccess& a = an.acc[e.core][e.instr];
    const int k = exec_pos[e.core][e.instr];
    if (a.rd) {
      int loc = a.static_loc;
      if (loc < 0) {
        const UAccess& src = an.acc[a.core][a.addr_src];
        const bool src_done = exec_pos[a.core][a.addr_src] < k;
        if (!src_done && cfg.deps_ordered) bad.push_back("C10: dependency order violated");
        // The address value is final once the whole trace has run; check below.
        loc = src_done ? (s.rval[src.rid].is_loc() ? prog.location_index(s.rval[src.rid].loc) : -1) : guess[a.rid];
        if (loc < 0) {
          bad.push_back("C1: read from an unresolved address");
          continue;
        }
      }
      s.addr[a.rid] = loc;
      int expect = -1;
      if (a.wr) {
        expect = mo.pred[a.wid];
        if (prop_pos[expect][a.core] > k) bad.push_back("C7: AMO read source not yet visible");
      } else {
        if (cfg.atomicity != Atomicity::MCA) {
          for (int j = a.idx - 1; j >= 0; --j) {
            const UAccess& aj = an.acc[a.core][j];
            if (aj.wr && aj.static_loc == loc) {
              if (exec_pos[a.core][j] < k && prop_pos[aj.wid][a.core] > k) expect = aj.wid;
              break;
            }
          }
        }
        if (expect < 0)
          for (int w : mo.order[loc])
            if (prop_pos[w][a.core] < k) expect = w;
      }
      const auto it = x.rf.find({a.core, a.idx});
      if (it == x.rf.end() || it->second != expect) bad.push_back("C1: read does not see the visible write");
      s.rf[a.rid] = expect;
      s.rval[a.rid] = s.wval[expect];
    }
    if (a.wr) {
      Value op = a.val_src < 0 ? a.const_val : s.rval[an.acc[a.core][a.val_src].rid];
      s.wval[a.wid] = a.amo ? amo_result(a.op, s.rval[a.rid], op) : op;
    }
  }
  // Guessed addresses must match the value finally produced.
  for (int c = 0; c < an.ncores; ++c)
    for (const UAccess& a : an.acc[c])
      if (a.rd && a.static_loc < 0) {
        const Value& v = s.rval[an.acc[c][a.addr_src].rid];
        if (!v.is_loc() || prog.location_index(v.loc) != s.addr[a.rid])
          bad.push_back("C1: speculated address does not match");
      }

  // Ordering constraints (C4-C6, C8, C9) as position inequalities.
  auto full_pos = [&](int w) { return *std::max_element(prop_pos[w].begin(), prop_pos[w].end()); };
  for (int c = 0; c < an.ncores; ++c) {
    const int n = static_cast<int>(an.acc[c].size());
    for (int i = 0; i < n; ++i) {
      const UAccess& ai = an.acc[c][i];
      const int ei = exec_pos[c][i];
      const int li = ai.rd ? s.addr[ai.rid] : ai.static_loc;
      for (int j = 0; j < i; ++j) {
        const UAccess& aj = an.acc[c][j];
        const unsigned r = an.req[c][j][i];
        const int ej = exec_pos[c][j];
        const int lj = aj.rd ? s.addr[aj.rid] : aj.static_loc;
        if ((r & kExec) && ej > ei) bad.push_back("C4/C6/C8: execution order violated");
        if ((r & kSameRR) && ai.rd && lj == li && ej > ei) bad.push_back("C5: same-address read order violated");
        if ((r & kSameRW) && ai.wr && lj == li && ej > ei) bad.push_back("C5: same-address read-write order violated");
        if (ai.rd && aj.wr && aj.static_loc == li && ej > ei) bad.push_back("C1: read before earlier same-address write");
        if ((r & kFull) && aj.wr && full_pos(aj.wid) > ei) bad.push_back("C4/C6: write not globally visible in time");
        if ((r & kCumFull) && aj.rd && full_pos(s.rf[aj.rid]) > ei) bad.push_back("C6: cumulative fence violated");
        for (int d = 0; d < an.ncores && ai.wr; ++d) {
          if ((r & kProp) && aj.wr && prop_pos[aj.wid][d] > prop_pos[ai.wid][d])
            bad.push_back("C4/C6/C8: propagation order violated");
          if ((r & kCumProp) && aj.rd && prop_pos[s.rf[aj.rid]][d] > prop_pos[ai.wid][d])
            bad.push_back("C6/C8: cumulative propagation violated");
        }
      }
      if (ai.wr && ai.val_src >= 0 && exec_pos[c][ai.val_src] > ei) bad.push_back("C1: write before its operand");
      if (ai.wr && ai.sc && cfg.atomicity == Atomicity::nMCA) {
        for (int d = 0; d < an.ncores; ++d)
          if (prop_pos[ai.wid][d] != ei) bad.push_back("C9: sc AMO not atomically visible");
      }
      if (!an.forwards() && ai.rd && !ai.wr)
        for (int j = 0; j < i; ++j) {
          const UAccess& aj = an.acc[c][j];
          if (aj.wr && aj.static_loc == li && full_pos(aj.wid) > ei) bad.push_back("C2: read of own unpropagated write");
        }
    }
  }
  if (!release_obligations_hold(an, s, mo)) bad.push_back("C10: release observation obligation violated");
  if (final_outcome(an, s, mo) != x.outcome) bad.push_back("C1: recorded outcome does not match replay");
  return bad;
}

// Per-core timelines derived from a witness: each core's executes plus every
// propagation that reaches it, in witness order.
inline std::vector<std::vector<UEvent>> timelines(const IsaExecution& x, int ncores) {
  std::vector<std::vector<UEvent>> t(ncores);
  for (const auto& e : x.trace) {
    if (e.type == UEvent::Type::Exec) {
      t[e.core].push_back(e);
    } else if (e.dest < 0) {
      for (int d = 0; d < ncores; ++d) t[d].push_back(e);
    } else {
      t[e.dest].push_back(e);
    }
  }
  return t;
}

inline std::string describe_trace(const IsaProgram& p, const IsaExecution& x) {
  std::string s;
  for (const auto& e : x.trace) {
    if (!s.empty()) s += "; ";
    const auto& th = p.threads[e.core];
    s += (e.type == UEvent::Type::Exec ? "exec " : "prop ") + th.name + "." + std::to_string(e.instr);
    if (e.type == UEvent::Type::Prop) s += e.dest < 0 ? "->all" : "->" + p.threads[e.dest].name;
    if (e.guess >= 0) s += "[guess " + p.locations[e.guess].first + "]";
  }
  return s;
}

}  // namespace tristack

#endif  // TRISTACK_UARCHAX_HPP_
