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

#ifndef TRISTACK_MAPPING_HPP_
#define TRISTACK_MAPPING_HPP_

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tristack/common.hpp"
#include "tristack/litmus.hpp"

namespace tristack {

enum class MappingId { BaseIntuitive, BaseRefined, BaseAIntuitive, BaseARefined, PowerLeadingSync };

inline const std::vector<MappingId>& all_mapping_ids() {
  static const std::vector<MappingId> ids = {MappingId::BaseIntuitive, MappingId::BaseRefined,
                                             MappingId::BaseAIntuitive, MappingId::BaseARefined,
                                             MappingId::PowerLeadingSync};
  return ids;
}

inline const char* to_string(MappingId id) {
  switch (id) {
    case MappingId::BaseIntuitive: return "base-intuitive";
    case MappingId::BaseRefined: return "base-refined";
    case MappingId::BaseAIntuitive: return "basea-intuitive";
    case MappingId::BaseARefined: return "basea-refined";
    case MappingId::PowerLeadingSync: return "power-leading-sync";
  }
  return "?";
}

inline MappingId parse_mapping_id(const std::string& s) {
  for (auto id : all_mapping_ids())
    if (s == to_string(id)) return id;
  throw Error("unknown mapping id '" + s + "'");
}

inline bool is_riscv(MappingId id) { return id != MappingId::PowerLeadingSync; }

// Access-class bit set for fence predecessor/successor sets.
enum AccessBits : int { kR = 1, kW = 2, kRW = 3 };

enum class Cumulativity { None, Lightweight, Heavyweight };
enum class InstrKind { Load, Store, Fence, Amo };
enum class AmoOp { Swap, Add };

// One row element. Load/Store/Amo stand for the HLL access itself.
struct TemplateInstr {
  InstrKind kind = InstrKind::Load;
  int pred = 0;
  int succ = 0;
  Cumulativity cum = Cumulativity::None;
  bool aq = false, rl = false, sc = false;

  friend bool operator==(const TemplateInstr&, const TemplateInstr&) = default;
};

struct MappingTable {
  MappingId id = MappingId::BaseIntuitive;
  std::map<std::pair<EventKind, MemOrder>, std::vector<TemplateInstr>> rows;

  const std::vector<TemplateInstr>& row(EventKind k, MemOrder o) const {
    auto it = rows.find({k, o});
    if (it == rows.end()) throw Error(std::string("no mapping row for ") + to_string(o));
    return it->second;
  }
};

namespace detail {

inline TemplateInstr acc(EventKind k) { return {k == EventKind::Load ? InstrKind::Load : InstrKind::Store}; }
inline TemplateInstr fence(int p, int s, Cumulativity c = Cumulativity::None) {
  return {InstrKind::Fence, p, s, c};
}
inline TemplateInstr amo(bool aq, bool rl, bool sc) { return {InstrKind::Amo, 0, 0, Cumulativity::None, aq, rl, sc}; }

}  // namespace detail

inline MappingTable mapping_table(MappingId id) {
  using detail::acc;
  using detail::amo;
  using detail::fence;
  const auto L = EventKind::Load;
  const auto S = EventKind::Store;
  const auto lw = Cumulativity::Lightweight;
  const auto hw = Cumulativity::Heavyweight;
  MappingTable t;
  t.id = id;
  auto& r = t.rows;
  r[{L, MemOrder::Rlx}] = {acc(L)};
  r[{S, MemOrder::Rlx}] = {acc(S)};
  switch (id) {
    case MappingId::BaseIntuitive:
      r[{L, MemOrder::Acq}] = {acc(L), fence(kR, kRW)};
      r[{L, MemOrder::Sc}] = {fence(kRW, kRW), acc(L), fence(kRW, kRW)};
      r[{S, MemOrder::Rel}] = {fence(kRW, kW), acc(S)};
      r[{S, MemOrder::Sc}] = {fence(kRW, kRW), acc(S)};
      break;
    case MappingId::BaseRefined:
      r[{L, MemOrder::Acq}] = {acc(L), fence(kR, kRW)};
      r[{L, MemOrder::Sc}] = {fence(kRW, kRW, hw), acc(L), fence(kR, kRW)};
      r[{S, MemOrder::Rel}] = {fence(kRW, kW, lw), acc(S)};
      r[{S, MemOrder::Sc}] = {fence(kRW, kRW, hw), acc(S)};
      break;
    case MappingId::BaseAIntuitive:
      r[{L, MemOrder::Acq}] = {amo(true, false, false)};
      r[{L, MemOrder::Sc}] = {amo(true, true, false)};
      r[{S, MemOrder::Rel}] = {amo(false, true, false)};
      r[{S, MemOrder::Sc}] = {amo(true, true, false)};
      break;
    case MappingId::BaseARefined:
      r[{L, MemOrder::Acq}] = {amo(true, false, false)};
      r[{L, MemOrder::Sc}] = {amo(true, false, true)};
      r[{S, MemOrder::Rel}] = {amo(false, true, false)};
      r[{S, MemOrder::Sc}] = {amo(false, true, true)};
      break;
    case MappingId::PowerLeadingSync:
      r[{L, MemOrder::Acq}] = {acc(L), fence(kR, kRW)};
      r[{L, MemOrder::Sc}] = {fence(kRW, kRW, hw), acc(L), fence(kR, kRW)};
      r[{S, MemOrder::Rel}] = {fence(kRW, kRW, lw), acc(S)};
      r[{S, MemOrder::Sc}] = {fence(kRW, kRW, hw), acc(S)};
      break;
  }
  return t;
}

inline std::string access_set_str(int bits, bool m_style) {
  if (bits == kRW) return m_style ? "m" : "rw";
  return bits == kR ? "r" : "w";
}

// Row in table notation, e.g. "f[m,w];st" or "AMO.aq.rl".
inline std::string row_text(const std::vector<TemplateInstr>& row, bool power = false) {
  std::string s;
  for (const auto& ti : row) {
    if (!s.empty()) s += ";";
    switch (ti.kind) {
      case InstrKind::Load: s += "ld"; break;
      case InstrKind::Store: s += "st"; break;
      case InstrKind::Fence:
        if (power) {
          s += ti.cum == Cumulativity::Heavyweight   ? "hwsync"
               : ti.cum == Cumulativity::Lightweight ? "lwsync"
                                                     : "ctrlisync";
        } else if (ti.cum == Cumulativity::Lightweight) {
          s += "lwf";
        } else if (ti.cum == Cumulativity::Heavyweight) {
          s += "hwf";
        } else {
          s += "f[" + access_set_str(ti.pred, true) + "," + access_set_str(ti.succ, true) + "]";
        }
        break;
      case InstrKind::Amo:
        s += "AMO";
        if (ti.aq) s += ".aq";
        if (ti.rl) s += ".rl";
        if (ti.sc) s += ".sc";
        break;
    }
  }
  return s;
}

// Registers are numbered x<n>; x0 is the constant-zero register.
struct IsaInstr {
  InstrKind kind = InstrKind::Load;
  int addr = 0;  // address register
  int src = 0;   // store value / AMO operand register
  int dest = 0;  // load / AMO destination register
  int pred = 0, succ = 0;
  Cumulativity cum = Cumulativity::None;
  AmoOp op = AmoOp::Add;
  bool aq = false, rl = false, sc = false;
  int origin = -1;  // index of the originating HLL event in its thread

  bool is_read() const { return kind == InstrKind::Load || kind == InstrKind::Amo; }
  bool is_write() const { return kind == InstrKind::Store || kind == InstrKind::Amo; }
  bool is_access() const { return kind != InstrKind::Fence; }

  friend bool operator==(const IsaInstr&, const IsaInstr&) = default;
};

struct IsaThread {
  std::string name;
  std::map<int, Value> regs;  // constant and address bindings
  std::vector<IsaInstr> instrs;

  friend bool operator==(const IsaThread&, const IsaThread&) = default;
};

struct IsaCondAtom {
  enum class Kind { Reg, Mem };

  Kind kind = Kind::Reg;
  std::string thread;
  int reg = 0;
  std::string loc;
  Value value;

  friend bool operator==(const IsaCondAtom&, const IsaCondAtom&) = default;
};

enum class IsaFamily { RiscV, Power };

struct IsaProgram {
  std::string name;
  IsaFamily family = IsaFamily::RiscV;
  std::vector<std::pair<std::string, std::int64_t>> locations;
  std::vector<IsaThread> threads;
  std::vector<IsaCondAtom> target;

  int location_index(const std::string& l) const {
    for (std::size_t i = 0; i < locations.size(); ++i)
      if (locations[i].first == l) return static_cast<int>(i);
    return -1;
  }

  friend bool operator==(const IsaProgram&, const IsaProgram&) = default;
};

enum class CompilePurpose { Evaluate, Emit };

// Register allocation: one counter from x1, walking threads then events.
// Constant store values reuse a po-earlier same-thread register bound or
// pinned by the target to that constant; location-valued stores use the
// location's address register; each load gets a fresh destination. Address
// registers follow, one per location, bound in every thread.
inline IsaProgram compile_test(const LitmusTest& test, MappingId id,
                               CompilePurpose purpose = CompilePurpose::Evaluate) {
  if (!is_riscv(id) && purpose == CompilePurpose::Evaluate)
    throw Error(std::string(to_string(id)) + " is emission-only and cannot be evaluated");
  const MappingTable table = mapping_table(id);
  IsaProgram p;
  p.name = test.name;
  p.family = is_riscv(id) ? IsaFamily::RiscV : IsaFamily::Power;
  p.locations = test.locations;

  // Target values of HLL registers, used for pinning.
  std::map<std::string, Value> pinned;
  for (const auto& a : test.condition)
    if (a.kind == CondAtom::Kind::Reg) pinned[a.thread + ":" + a.name] = a.value;

  int next = 1;
  const int nthreads = static_cast<int>(test.threads.size());
  std::vector<std::map<std::string, int>> hll_reg(nthreads);
  // Per thread, per event: value register, or -(loc index + 1) pending address.
  std::vector<std::vector<int>> value_reg(nthreads);
  std::vector<std::vector<int>> dest_reg(nthreads);
  std::vector<std::vector<std::pair<int, Value>>> known(nthreads);  // register -> constant
  std::vector<std::vector<int>> alloc_order(nthreads);

  for (int ti = 0; ti < nthreads; ++ti) {
    const auto& th = test.threads[ti];
    for (const auto& e : th.events) {
      int vr = 0, dr = 0;
      if (e.is_store()) {
        if (e.value.kind == Operand::Kind::Reg) {
          vr = hll_reg[ti].at(e.value.name);
        } else if (e.value.kind == Operand::Kind::Loc) {
          vr = -(test.location_index(e.value.name) + 1);
        } else {
          const Value want = Value::Int(e.value.num);
          for (const auto& [r, v] : known[ti])
            if (v == want) {
              vr = r;
              break;
            }
          if (vr == 0) {
            vr = next++;
            known[ti].emplace_back(vr, want);
            alloc_order[ti].push_back(vr);
          }
        }
      } else {
        dr = next++;
        hll_reg[ti][e.dest] = dr;
        auto pin = pinned.find(th.name + ":" + e.dest);
        if (pin != pinned.end() && !pin->second.is_loc()) known[ti].emplace_back(dr, pin->second);
      }
      value_reg[ti].push_back(vr);
      dest_reg[ti].push_back(dr);
    }
  }
  std::vector<int> addr_reg;
  for (std::size_t l = 0; l < test.locations.size(); ++l) addr_reg.push_back(next++);

  p.threads.resize(nthreads);
  for (int ti = 0; ti < nthreads; ++ti) {
    const auto& th = test.threads[ti];
    IsaThread& it = p.threads[ti];
    it.name = th.name;
    for (int ai : alloc_order[ti])
      for (const auto& [r, v] : known[ti])
        if (r == ai) it.regs[r] = v;
    for (std::size_t l = 0; l < test.locations.size(); ++l)
      it.regs[addr_reg[l]] = Value::Loc(test.locations[l].first);
    for (std::size_t ei = 0; ei < th.events.size(); ++ei) {
      const auto& e = th.events[ei];
      int vr = value_reg[ti][ei];
      if (vr < 0) vr = addr_reg[-vr - 1];
      // A reused pinned load register carries the store constant.
      if (e.is_store() && e.value.kind == Operand::Kind::Int && !it.regs.count(vr))
        it.regs[vr] = Value::Int(e.value.num);
      const int ar = e.addr.kind == Operand::Kind::Loc ? addr_reg[test.location_index(e.addr.name)]
                                                       : hll_reg[ti].at(e.addr.name);
      for (const auto& ti_row : table.row(e.kind, *e.order)) {
        IsaInstr ins;
        ins.kind = ti_row.kind;
        ins.origin = static_cast<int>(ei);
        switch (ti_row.kind) {
          case InstrKind::Fence:
            ins.pred = ti_row.pred;
            ins.succ = ti_row.succ;
            ins.cum = ti_row.cum;
            break;
          case InstrKind::Load:
            ins.addr = ar;
            ins.dest = dest_reg[ti][ei];
            break;
          case InstrKind::Store:
            ins.addr = ar;
            ins.src = vr;
            break;
          case InstrKind::Amo:
            ins.addr = ar;
            ins.aq = ti_row.aq;
            ins.rl = ti_row.rl;
            ins.sc = ti_row.sc;
            if (e.is_load()) {
              ins.op = AmoOp::Add;
              ins.src = 0;
              ins.dest = dest_reg[ti][ei];
            } else {
              ins.op = AmoOp::Swap;
              ins.src = vr;
              ins.dest = 0;
            }
            break;
        }
        it.instrs.push_back(ins);
      }
    }
  }

  // Target: constant and pinned registers in number order, then memory.
  std::map<int, IsaCondAtom> regs_out;
  for (int ti = 0; ti < nthreads; ++ti) {
    for (const auto& [r, v] : p.threads[ti].regs)
      if (std::find(addr_reg.begin(), addr_reg.end(), r) == addr_reg.end())
        regs_out[r] = {IsaCondAtom::Kind::Reg, p.threads[ti].name, r, {}, v};
  }
  for (const auto& a : test.condition) {
    if (a.kind != CondAtom::Kind::Reg) continue;
    int ti = 0;
    while (test.threads[ti].name != a.thread) ++ti;
    const int r = hll_reg[ti].at(a.name);
    regs_out[r] = {IsaCondAtom::Kind::Reg, a.thread, r, {}, a.value};
  }
  for (auto& [r, atom] : regs_out) p.target.push_back(atom);
  for (const auto& a : test.condition)
    if (a.kind == CondAtom::Kind::Mem) p.target.push_back({IsaCondAtom::Kind::Mem, {}, 0, a.name, a.value});
  return p;
}

enum class DepKind { Addr, Data, Ctrl };

inline const char* to_string(DepKind k) {
  switch (k) {
    case DepKind::Addr: return "addr";
    case DepKind::Data: return "data";
    case DepKind::Ctrl: return "ctrl";
  }
  return "?";
}

struct Dependency {
  int thread = 0;
  int from = 0;  // instruction index of the producing read
  int to = 0;
  DepKind kind = DepKind::Addr;

  friend bool operator==(const Dependency&, const Dependency&) = default;
};

// Bound registers are constants and never carry a dependency.
inline std::vector<Dependency> compute_dependencies(const IsaProgram& p) {
  std::vector<Dependency> out;
  for (std::size_t ti = 0; ti < p.threads.size(); ++ti) {
    const auto& th = p.threads[ti];
    std::map<int, int> writer;
    for (std::size_t i = 0; i < th.instrs.size(); ++i) {
      const auto& ins = th.instrs[i];
      auto use = [&](int reg, DepKind k) {
        if (reg == 0 || th.regs.count(reg)) return;
        auto w = writer.find(reg);
        if (w != writer.end())
          out.push_back({static_cast<int>(ti), w->second, static_cast<int>(i), k});
      };
      if (ins.is_access()) use(ins.addr, DepKind::Addr);
      if (ins.is_write()) use(ins.src, DepKind::Data);
      if (ins.is_read() && ins.dest != 0) writer[ins.dest] = static_cast<int>(i);
    }
  }
  return out;
}

inline std::string render_instr(const IsaInstr& ins, IsaFamily fam) {
  auto x = [](int r) { return "x" + std::to_string(r); };
  if (fam == IsaFamily::Power) {
    switch (ins.kind) {
      case InstrKind::Load: return "ld " + x(ins.dest) + ", (" + x(ins.addr) + ")";
      case InstrKind::Store: return "st " + x(ins.src) + ", (" + x(ins.addr) + ")";
      case InstrKind::Fence:
        return ins.cum == Cumulativity::Heavyweight   ? "hwsync"
               : ins.cum == Cumulativity::Lightweight ? "lwsync"
                                                      : "ctrlisync";
      case InstrKind::Amo: break;
    }
    throw Error("AMO has no Power rendering");
  }
  switch (ins.kind) {
    case InstrKind::Load: return "lw " + x(ins.dest) + ", (" + x(ins.addr) + ")";
    case InstrKind::Store: return "sw " + x(ins.src) + ", (" + x(ins.addr) + ")";
    case InstrKind::Fence:
      if (ins.cum == Cumulativity::Lightweight) return "lwf";
      if (ins.cum == Cumulativity::Heavyweight) return "hwf";
      return "fence " + access_set_str(ins.pred, false) + ", " + access_set_str(ins.succ, false);
    case InstrKind::Amo: {
      std::string m = ins.op == AmoOp::Swap ? "amoswap.w" : "amoadd.w";
      if (ins.aq) m += ".aq";
      if (ins.rl) m += ".rl";
      if (ins.sc) m += ".sc";
      return m + " " + x(ins.src) + ", " + x(ins.dest) + ", (" + x(ins.addr) + ")";
    }
  }
  return "?";
}

inline std::string render_isa(const IsaProgram& p) {
  std::ostringstream os;
  os << (p.family == IsaFamily::RiscV ? "riscv " : "power ") << p.name << "\n";
  os << "locations";
  for (const auto& [l, v] : p.locations) os << " " << l << "=" << v;
  os << "\n";
  std::map<int, int> owners;
  for (const auto& th : p.threads) {
    std::set<int> seen;
    for (const auto& [r, v] : th.regs) seen.insert(r);
    for (const auto& ins : th.instrs)
      if (ins.is_read() && ins.dest) seen.insert(ins.dest);
    for (int r : seen) ++owners[r];
  }
  for (const auto& th : p.threads) {
    os << "thread " << th.name << " regs(";
    bool first = true;
    for (const auto& [r, v] : th.regs) {
      os << (first ? "" : ", ") << "x" << r << "=" << v.str();
      first = false;
    }
    os << ") {\n";
    for (const auto& ins : th.instrs) {
      os << "  ";
      if (ins.origin >= 0) os << ins.origin << ": ";
      os << render_instr(ins, p.family) << ";\n";
    }
    os << "}\n";
  }
  os << "exists (";
  for (std::size_t i = 0; i < p.target.size(); ++i) {
    const auto& a = p.target[i];
    if (i) os << " /\\ ";
    if (a.kind == IsaCondAtom::Kind::Mem) {
      os << a.loc;
    } else {
      if (owners[a.reg] > 1) os << a.thread << ":";
      os << "x" << a.reg;
    }
    os << "=" << a.value.str();
  }
  os << ")\n";
  return os.str();
}

namespace detail {

inline int parse_reg(Lexer& lx) {
  const Token t = lx.peek();
  std::string s = lx.ident("register");
  if (s.size() < 2 || s[0] != 'x' || s.find_first_not_of("0123456789", 1) != std::string::npos)
    lx.fail("expected register x<n>, found '" + s + "'", t);
  return std::stoi(s.substr(1));
}

inline int parse_access_set(Lexer& lx) {
  const Token t = lx.peek();
  std::string s = lx.ident("access set");
  if (s == "r") return kR;
  if (s == "w") return kW;
  if (s == "rw" || s == "m") return kRW;
  lx.fail("bad fence access set '" + s + "'", t);
}

inline Value parse_isa_value(Lexer& lx, const IsaProgram& p) {
  const Token t = lx.peek();
  if (t.kind == Token::Kind::Int) return Value::Int(lx.integer("value"));
  std::string n = lx.ident("value");
  if (p.location_index(n) < 0) lx.fail("undeclared location '" + n + "'", t);
  return Value::Loc(n);
}

inline IsaInstr parse_isa_instr(Lexer& lx, IsaFamily fam) {
  IsaInstr ins;
  if (lx.peek().kind == Token::Kind::Int && lx.peek(1).text == ":") {
    ins.origin = static_cast<int>(lx.integer("origin"));
    lx.expect(":");
  }
  const Token mt = lx.peek();
  const std::string m = lx.ident("mnemonic");
  auto addr = [&] {
    lx.expect("(");
    int r = parse_reg(lx);
    lx.expect(")");
    return r;
  };
  const bool riscv = fam == IsaFamily::RiscV;
  if (m == (riscv ? "lw" : "ld")) {
    ins.kind = InstrKind::Load;
    ins.dest = parse_reg(lx);
    lx.expect(",");
    ins.addr = addr();
  } else if (m == (riscv ? "sw" : "st")) {
    ins.kind = InstrKind::Store;
    ins.src = parse_reg(lx);
    lx.expect(",");
    ins.addr = addr();
  } else if (riscv && m == "fence") {
    ins.kind = InstrKind::Fence;
    ins.pred = parse_access_set(lx);
    lx.expect(",");
    ins.succ = parse_access_set(lx);
  } else if ((riscv && m == "lwf") || (!riscv && m == "lwsync")) {
    ins = {InstrKind::Fence, 0, 0, 0, kRW, riscv ? kW : kRW, Cumulativity::Lightweight, AmoOp::Add, false, false, false, ins.origin};
  } else if ((riscv && m == "hwf") || (!riscv && m == "hwsync")) {
    ins = {InstrKind::Fence, 0, 0, 0, kRW, kRW, Cumulativity::Heavyweight, AmoOp::Add, false, false, false, ins.origin};
  } else if (!riscv && m == "ctrlisync") {
    ins = {InstrKind::Fence, 0, 0, 0, kR, kRW, Cumulativity::None, AmoOp::Add, false, false, false, ins.origin};
  } else if (riscv && (m.rfind("amoswap.w", 0) == 0 || m.rfind("amoadd.w", 0) == 0)) {
    ins.kind = InstrKind::Amo;
    ins.op = m.rfind("amoswap", 0) == 0 ? AmoOp::Swap : AmoOp::Add;
    std::string bits = m.substr(ins.op == AmoOp::Swap ? 9 : 8);
    std::istringstream bs(bits);
    std::string b;
    std::getline(bs, b, '.');
    while (std::getline(bs, b, '.')) {
      if (b == "aq") ins.aq = true;
      else if (b == "rl") ins.rl = true;
      else if (b == "sc") ins.sc = true;
      else lx.fail("unknown AMO suffix '." + b + "'", mt);
    }
    if (ins.sc && !ins.aq && !ins.rl) lx.fail(".sc requires .aq or .rl", mt);
    ins.src = parse_reg(lx);
    lx.expect(",");
    ins.dest = parse_reg(lx);
    lx.expect(",");
    ins.addr = addr();
  } else {
    lx.fail("unknown instruction '" + m + "'", mt);
  }
  return ins;
}

}  // namespace detail

inline IsaProgram parse_isa(const std::string& text) {
  using detail::Lexer;
  using detail::Token;
  Lexer lx(text);
  IsaProgram p;
  if (lx.accept_keyword("riscv")) {
    p.family = IsaFamily::RiscV;
  } else if (lx.accept_keyword("power")) {
    p.family = IsaFamily::Power;
  } else {
    lx.fail("expected 'riscv <name>' or 'power <name>'", lx.peek());
  }
  p.name = lx.ident("program name");
  if (lx.accept_keyword("locations")) {
    while (lx.peek().kind == Token::Kind::Ident && lx.peek(1).text == "=") {
      std::string l = lx.ident("location");
      lx.expect("=");
      p.locations.emplace_back(l, lx.integer("initial value"));
    }
  }
  while (lx.accept_keyword("thread")) {
    IsaThread th;
    th.name = lx.ident("thread name");
    if (lx.accept_keyword("regs")) {
      lx.expect("(");
      if (!lx.accept(")")) {
        do {
          int r = detail::parse_reg(lx);
          lx.expect("=");
          th.regs[r] = detail::parse_isa_value(lx, p);
        } while (lx.accept(","));
        lx.expect(")");
      }
    }
    lx.expect("{");
    while (!lx.accept("}")) {
      th.instrs.push_back(detail::parse_isa_instr(lx, p.family));
      if (!lx.accept(";") && lx.peek().text != "}") lx.fail("expected ';'", lx.peek());
    }
    p.threads.push_back(std::move(th));
  }
  if (lx.accept_keyword("exists")) {
    lx.expect("(");
    if (!lx.accept(")")) {
      do {
        IsaCondAtom a;
        const Token at = lx.peek();
        std::string first = lx.ident("register or location");
        std::string thread;
        if (lx.accept(":")) {
          thread = first;
          first = lx.ident("register");
        }
        if (thread.empty() && p.location_index(first) >= 0) {
          a.kind = IsaCondAtom::Kind::Mem;
          a.loc = first;
        } else {
          if (first.size() < 2 || first[0] != 'x') lx.fail("undeclared register '" + first + "'", at);
          a.reg = std::stoi(first.substr(1));
          int owners = 0;
          for (const auto& th : p.threads) {
            if (!thread.empty() && th.name != thread) continue;
            bool has = th.regs.count(a.reg) > 0;
            for (const auto& ins : th.instrs)
              if (ins.is_read() && ins.dest == a.reg) has = true;
            if (has) {
              ++owners;
              a.thread = th.name;
            }
          }
          if (owners == 0) lx.fail("undeclared register '" + first + "'", at);
          if (owners > 1) lx.fail("ambiguous register '" + first + "'", at);
        }
        lx.expect("=");
        a.value = detail::parse_isa_value(lx, p);
        p.target.push_back(std::move(a));
      } while (lx.accept("/\\"));
      lx.expect(")");
    }
  }
  if (!lx.at_end()) lx.fail("unexpected '" + Lexer::describe(lx.peek()) + "'", lx.peek());
  return p;
}

}  // namespace tristack

#endif  // TRISTACK_MAPPING_HPP_
