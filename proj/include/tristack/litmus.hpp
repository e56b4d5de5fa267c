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

#ifndef TRISTACK_LITMUS_HPP_
#define TRISTACK_LITMUS_HPP_

#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tristack/common.hpp"

namespace tristack {

enum class MemOrder { Rlx, Acq, Rel, Sc };

inline const char* to_string(MemOrder o) {
  switch (o) {
    case MemOrder::Rlx: return "rlx";
    case MemOrder::Acq: return "acq";
    case MemOrder::Rel: return "rel";
    case MemOrder::Sc: return "sc";
  }
  return "?";
}

inline std::optional<MemOrder> parse_order(const std::string& s) {
  if (s == "rlx") return MemOrder::Rlx;
  if (s == "acq") return MemOrder::Acq;
  if (s == "rel") return MemOrder::Rel;
  if (s == "sc") return MemOrder::Sc;
  return std::nullopt;
}

enum class EventKind { Load, Store };

// Integer literal, location literal, or register reference.
struct Operand {
  enum class Kind { Int, Loc, Reg };

  Kind kind = Kind::Int;
  std::int64_t num = 0;
  std::string name;

  static Operand Int(std::int64_t n) { return {Kind::Int, n, {}}; }
  static Operand Loc(std::string s) { return {Kind::Loc, 0, std::move(s)}; }
  static Operand Reg(std::string s) { return {Kind::Reg, 0, std::move(s)}; }

  std::string str() const { return kind == Kind::Int ? std::to_string(num) : name; }

  friend bool operator==(const Operand&, const Operand&) = default;
};

struct HllEvent {
  int thread = 0;
  int index = 0;
  EventKind kind = EventKind::Load;
  Operand addr;                  // Loc, or Reg for loads only
  Operand value;                 // stores only
  std::string dest;              // loads only
  std::optional<MemOrder> order; // unset while a template placeholder
  std::string slot;              // placeholder id, empty when concrete

  bool is_load() const { return kind == EventKind::Load; }
  bool is_store() const { return kind == EventKind::Store; }

  friend bool operator==(const HllEvent&, const HllEvent&) = default;
};

struct HllThread {
  std::string name;
  std::vector<HllEvent> events;

  friend bool operator==(const HllThread&, const HllThread&) = default;
};

// One conjunct of the final condition: a register of a thread, or the final
// value of a location.
struct CondAtom {
  enum class Kind { Reg, Mem };

  Kind kind = Kind::Reg;
  std::string thread;  // resolved owner thread for Reg atoms
  std::string name;
  Value value;

  friend bool operator==(const CondAtom&, const CondAtom&) = default;
};

enum class Expect { Permitted, Forbidden };

struct LitmusTest {
  std::string name;
  std::vector<std::pair<std::string, std::int64_t>> locations;
  std::vector<HllThread> threads;
  std::vector<CondAtom> condition;
  std::optional<Expect> expected;

  bool has_location(const std::string& l) const {
    for (const auto& [n, v] : locations)
      if (n == l) return true;
    return false;
  }

  int location_index(const std::string& l) const {
    for (std::size_t i = 0; i < locations.size(); ++i)
      if (locations[i].first == l) return static_cast<int>(i);
    return -1;
  }

  std::size_t event_count() const {
    std::size_t n = 0;
    for (const auto& t : threads) n += t.events.size();
    return n;
  }

  friend bool operator==(const LitmusTest&, const LitmusTest&) = default;
};

enum class SlotClass { LoadSlot, StoreSlot };

struct Slot {
  std::string id;
  SlotClass cls = SlotClass::LoadSlot;
  int thread = 0;
  int index = 0;

  friend bool operator==(const Slot&, const Slot&) = default;
};

struct LitmusTemplate {
  LitmusTest skeleton;
  std::vector<Slot> slots;  // in skeleton order

  friend bool operator==(const LitmusTemplate&, const LitmusTemplate&) = default;
};

inline const std::vector<MemOrder>& slot_domain(SlotClass c) {
  static const std::vector<MemOrder> loads = {MemOrder::Rlx, MemOrder::Acq, MemOrder::Sc};
  static const std::vector<MemOrder> stores = {MemOrder::Rlx, MemOrder::Rel, MemOrder::Sc};
  return c == SlotClass::LoadSlot ? loads : stores;
}

inline bool order_valid_for(EventKind k, MemOrder o) {
  if (k == EventKind::Load) return o != MemOrder::Rel;
  return o != MemOrder::Acq;
}

namespace detail {

struct Token {
  enum class Kind { Ident, Int, Punct, End };

  Kind kind = Kind::End;
  std::string text;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : s_(text) { lex(); }

  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  Token next() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool at_end() const { return peek().kind == Token::Kind::End; }

  [[noreturn]] void fail(const std::string& msg, const Token& t) const {
    throw ParseError(msg, t.line, t.col);
  }

  bool accept(const std::string& punct) {
    if (peek().kind == Token::Kind::Punct && peek().text == punct) {
      next();
      return true;
    }
    return false;
  }
  void expect(const std::string& punct) {
    if (!accept(punct)) fail("expected '" + punct + "', found '" + describe(peek()) + "'", peek());
  }
  std::string ident(const std::string& what) {
    if (peek().kind != Token::Kind::Ident)
      fail("expected " + what + ", found '" + describe(peek()) + "'", peek());
    return next().text;
  }
  bool accept_keyword(const std::string& kw) {
    if (peek().kind == Token::Kind::Ident && peek().text == kw) {
      next();
      return true;
    }
    return false;
  }
  std::int64_t integer(const std::string& what) {
    if (peek().kind != Token::Kind::Int)
      fail("expected " + what + ", found '" + describe(peek()) + "'", peek());
    return std::stoll(next().text);
  }

  static std::string describe(const Token& t) {
    return t.kind == Token::Kind::End ? "end of input" : t.text;
  }

 private:
  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '+' ||
           c == '-';
  }

  void lex() {
    int line = 1, col = 1;
    std::size_t i = 0;
    auto adv = [&](std::size_t n) {
      for (std::size_t k = 0; k < n; ++k) {
        if (s_[i] == '\n') {
          ++line;
          col = 1;
        } else {
          ++col;
        }
        ++i;
      }
    };
    while (i < s_.size()) {
      char c = s_[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
        adv(1);
        continue;
      }
      if (c == '#') {
        while (i < s_.size() && s_[i] != '\n') adv(1);
        continue;
      }
      Token t;
      t.line = line;
      t.col = col;
      if (ident_start(c)) {
        std::size_t j = i;
        while (j < s_.size() && ident_char(s_[j])) ++j;
        t.kind = Token::Kind::Ident;
        t.text = s_.substr(i, j - i);
        adv(j - i);
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '-' && i + 1 < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i + 1])))) {
        std::size_t j = i + 1;
        while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
        t.kind = Token::Kind::Int;
        t.text = s_.substr(i, j - i);
        adv(j - i);
      } else if (s_.compare(i, 2, "/\\") == 0 || s_.compare(i, 2, "&&") == 0) {
        t.kind = Token::Kind::Punct;
        t.text = "/\\";
        adv(2);
      } else if (std::string("(){};,=@:").find(c) != std::string::npos) {
        t.kind = Token::Kind::Punct;
        t.text = std::string(1, c);
        adv(1);
      } else {
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
      }
      toks_.push_back(std::move(t));
    }
    Token end;
    end.line = line;
    end.col = col;
    toks_.push_back(end);
  }

  std::string s_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

inline void parse_order_slot(Lexer& lx, HllEvent& ev, bool allow_slots) {
  const Token at = lx.peek();
  if (lx.accept("@")) {
    if (!allow_slots) lx.fail("order placeholder outside a template", at);
    const Token t = lx.next();
    if (t.kind != Token::Kind::Ident && t.kind != Token::Kind::Int)
      lx.fail("expected slot id after '@'", t);
    ev.slot = t.text;
    return;
  }
  const Token t = lx.peek();
  std::string o = lx.ident("memory order");
  auto mo = parse_order(o);
  if (!mo) lx.fail("unknown memory order '" + o + "'", t);
  if (!order_valid_for(ev.kind, *mo)) {
    std::string n = o;
    n[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(n[0])));
    lx.fail(n + " invalid on " + (ev.is_load() ? "load" : "store"), t);
  }
  ev.order = mo;
}

inline Operand parse_value_operand(Lexer& lx, const LitmusTest& t,
                                   const std::set<std::string>& regs) {
  const Token tok = lx.peek();
  if (tok.kind == Token::Kind::Int) return Operand::Int(lx.integer("value"));
  std::string n = lx.ident("value");
  if (t.has_location(n)) return Operand::Loc(n);
  if (regs.count(n)) return Operand::Reg(n);
  lx.fail("undeclared location or register '" + n + "'", tok);
}

inline Value parse_cond_value(Lexer& lx, const LitmusTest& t) {
  const Token tok = lx.peek();
  if (tok.kind == Token::Kind::Int) return Value::Int(lx.integer("value"));
  std::string n = lx.ident("value");
  if (!t.has_location(n)) lx.fail("undeclared location '" + n + "'", tok);
  return Value::Loc(n);
}

inline LitmusTest parse_impl(const std::string& text, bool allow_slots) {
  Lexer lx(text);
  LitmusTest t;
  if (!lx.accept_keyword("test")) lx.fail("expected 'test <name>'", lx.peek());
  t.name = lx.ident("test name");

  if (lx.accept_keyword("locations")) {
    while (lx.peek().kind == Token::Kind::Ident && lx.peek(1).text == "=") {
      const Token lt = lx.peek();
      std::string l = lx.ident("location");
      if (t.has_location(l)) lx.fail("duplicate location '" + l + "'", lt);
      lx.expect("=");
      t.locations.emplace_back(l, lx.integer("initial value"));
    }
  }

  while (lx.accept_keyword("thread")) {
    HllThread th;
    const Token nt = lx.peek();
    th.name = lx.ident("thread name");
    for (const auto& o : t.threads)
      if (o.name == th.name) lx.fail("duplicate thread '" + th.name + "'", nt);
    const int tid = static_cast<int>(t.threads.size());
    std::set<std::string> regs;
    lx.expect("{");
    while (!lx.accept("}")) {
      HllEvent ev;
      ev.thread = tid;
      ev.index = static_cast<int>(th.events.size());
      const Token head = lx.peek();
      if (lx.accept_keyword("st")) {
        ev.kind = EventKind::Store;
        lx.expect("(");
        const Token lt = lx.peek();
        std::string l = lx.ident("location");
        if (!t.has_location(l)) lx.fail("undeclared location '" + l + "'", lt);
        ev.addr = Operand::Loc(l);
        lx.expect(",");
        ev.value = parse_value_operand(lx, t, regs);
        lx.expect(",");
        parse_order_slot(lx, ev, allow_slots);
        lx.expect(")");
      } else if (head.kind == Token::Kind::Ident && lx.peek(1).text == "=") {
        ev.kind = EventKind::Load;
        ev.dest = lx.ident("register");
        if (t.has_location(ev.dest)) lx.fail("register name '" + ev.dest + "' clashes with a location", head);
        if (regs.count(ev.dest)) lx.fail("register '" + ev.dest + "' assigned twice", head);
        lx.expect("=");
        if (!lx.accept_keyword("ld")) lx.fail("expected 'ld'", lx.peek());
        lx.expect("(");
        const Token at = lx.peek();
        std::string a = lx.ident("location or register");
        if (t.has_location(a)) {
          ev.addr = Operand::Loc(a);
        } else if (regs.count(a)) {
          ev.addr = Operand::Reg(a);
        } else {
          lx.fail("undeclared location or register '" + a + "'", at);
        }
        lx.expect(",");
        parse_order_slot(lx, ev, allow_slots);
        lx.expect(")");
        regs.insert(ev.dest);
      } else {
        lx.fail("expected event, found '" + Lexer::describe(head) + "'", head);
      }
      th.events.push_back(std::move(ev));
      if (!lx.accept(";") && lx.peek().text != "}") lx.fail("expected ';'", lx.peek());
    }
    t.threads.push_back(std::move(th));
  }

  if (lx.accept_keyword("exists")) {
    lx.expect("(");
    if (!lx.accept(")")) {
      do {
        CondAtom a;
        const Token at = lx.peek();
        std::string first = lx.ident("register or location");
        std::string thread;
        if (lx.accept(":")) {
          thread = first;
          first = lx.ident("register");
        }
        a.name = first;
        if (!thread.empty()) {
          a.kind = CondAtom::Kind::Reg;
          bool found = false;
          for (const auto& th : t.threads) {
            if (th.name != thread) continue;
            for (const auto& e : th.events)
              if (e.is_load() && e.dest == first) found = true;
          }
          if (!found) lx.fail("undeclared register '" + thread + ":" + first + "'", at);
          a.thread = thread;
        } else if (t.has_location(first)) {
          a.kind = CondAtom::Kind::Mem;
        } else {
          a.kind = CondAtom::Kind::Reg;
          int owners = 0;
          for (const auto& th : t.threads)
            for (const auto& e : th.events)
              if (e.is_load() && e.dest == first) {
                ++owners;
                a.thread = th.name;
              }
          if (owners == 0) lx.fail("undeclared register '" + first + "'", at);
          if (owners > 1) lx.fail("ambiguous register '" + first + "'; qualify as <thread>:" + first, at);
        }
        lx.expect("=");
        a.value = parse_cond_value(lx, t);
        t.condition.push_back(std::move(a));
      } while (lx.accept("/\\"));
      lx.expect(")");
    }
  }

  if (lx.accept_keyword("expect")) {
    const Token et = lx.peek();
    std::string e = lx.ident("permitted or forbidden");
    if (e == "permitted") {
      t.expected = Expect::Permitted;
    } else if (e == "forbidden") {
      t.expected = Expect::Forbidden;
    } else {
      lx.fail("expected 'permitted' or 'forbidden'", et);
    }
  }

  if (!lx.at_end()) lx.fail("unexpected '" + Lexer::describe(lx.peek()) + "'", lx.peek());
  return t;
}

}  // namespace detail

// Throws ParseError on any grammar or invariant violation.
inline LitmusTest parse_litmus(const std::string& text) { return detail::parse_impl(text, false); }

inline LitmusTemplate parse_template(const std::string& text) {
  LitmusTemplate tpl;
  tpl.skeleton = detail::parse_impl(text, true);
  std::set<std::string> seen;
  for (const auto& th : tpl.skeleton.threads) {
    for (const auto& e : th.events) {
      if (e.slot.empty()) continue;
      if (!seen.insert(e.slot).second) throw ParseError("duplicate slot '@" + e.slot + "'", 1, 1);
      tpl.slots.push_back({e.slot, e.is_load() ? SlotClass::LoadSlot : SlotClass::StoreSlot,
                           e.thread, e.index});
    }
  }
  return tpl;
}

inline std::string render_event(const HllEvent& e) {
  std::string ord = e.order ? to_string(*e.order) : "@" + e.slot;
  if (e.is_store()) return "st(" + e.addr.str() + ", " + e.value.str() + ", " + ord + ")";
  return e.dest + " = ld(" + e.addr.str() + ", " + ord + ")";
}

inline std::string render_litmus(const LitmusTest& t) {
  std::ostringstream os;
  os << "test " << t.name << "\n";
  os << "locations";
  for (const auto& [l, v] : t.locations) os << " " << l << "=" << v;
  os << "\n";
  for (const auto& th : t.threads) {
    os << "thread " << th.name << " {";
    for (const auto& e : th.events) os << " " << render_event(e) << ";";
    os << " }\n";
  }
  std::map<std::string, int> owners;
  for (const auto& th : t.threads)
    for (const auto& e : th.events)
      if (e.is_load()) ++owners[e.dest];
  os << "exists (";
  for (std::size_t i = 0; i < t.condition.size(); ++i) {
    const auto& a = t.condition[i];
    if (i) os << " /\\ ";
    if (a.kind == CondAtom::Kind::Reg && owners[a.name] > 1) os << a.thread << ":";
    os << a.name << "=" << a.value.str();
  }
  os << ")\n";
  if (t.expected) os << "expect " << (*t.expected == Expect::Permitted ? "permitted" : "forbidden") << "\n";
  return os.str();
}

inline std::string render_template(const LitmusTemplate& tpl) { return render_litmus(tpl.skeleton); }

// Orders of the concrete events in skeleton order.
inline std::vector<MemOrder> event_orders(const LitmusTest& t) {
  std::vector<MemOrder> out;
  for (const auto& th : t.threads)
    for (const auto& e : th.events)
      if (e.order) out.push_back(*e.order);
  return out;
}

inline std::string order_suffix(const std::vector<MemOrder>& orders) {
  std::string s;
  for (auto o : orders) s += std::string("+") + to_string(o);
  return s;
}

// All order assignments, first slot most significant, domain order
// Rlx < Acq|Rel < Sc.
inline std::vector<LitmusTest> expand_template(const LitmusTemplate& tpl) {
  std::vector<LitmusTest> out;
  const std::size_t n = tpl.slots.size();
  std::vector<std::size_t> digit(n, 0);
  while (true) {
    LitmusTest t = tpl.skeleton;
    std::vector<MemOrder> chosen;
    for (std::size_t s = 0; s < n; ++s) {
      const Slot& sl = tpl.slots[s];
      MemOrder o = slot_domain(sl.cls)[digit[s]];
      HllEvent& e = t.threads[sl.thread].events[sl.index];
      e.order = o;
      e.slot.clear();
      chosen.push_back(o);
    }
    t.name = tpl.skeleton.name + order_suffix(chosen);
    if (n == 0) t.name = tpl.skeleton.name;
    out.push_back(std::move(t));
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (++digit[k] < slot_domain(tpl.slots[k].cls).size()) break;
      digit[k] = 0;
      if (k == 0) return out;
    }
    if (n == 0) return out;
  }
}

namespace detail {

inline const std::vector<std::pair<std::string, std::string>>& builtin_sources() {
  static const std::vector<std::pair<std::string, std::string>> src = {
      {"WRC",
       "test WRC\nlocations x=0 y=0\n"
       "thread T0 { st(x, 1, @a); }\n"
       "thread T1 { r0 = ld(x, @b); st(y, 1, @c); }\n"
       "thread T2 { r1 = ld(y, @d); r2 = ld(x, @e); }\n"
       "exists (r0=1 /\\ r1=1 /\\ r2=0)\n"},
      {"IRIW",
       "test IRIW\nlocations x=0 y=0\n"
       "thread T0 { st(x, 1, @a); }\n"
       "thread T1 { st(y, 1, @b); }\n"
       "thread T2 { r0 = ld(x, @c); r1 = ld(y, @d); }\n"
       "thread T3 { r2 = ld(y, @e); r3 = ld(x, @f); }\n"
       "exists (r0=1 /\\ r1=0 /\\ r2=1 /\\ r3=0)\n"},
      {"RWC",
       "test RWC\nlocations x=0 y=0\n"
       "thread T0 { st(x, 1, @a); }\n"
       "thread T1 { r0 = ld(x, @b); r1 = ld(y, @c); }\n"
       "thread T2 { st(y, 1, @d); r2 = ld(x, @e); }\n"
       "exists (r0=1 /\\ r1=0 /\\ r2=0)\n"},
      {"CoRR",
       "test CoRR\nlocations x=0\n"
       "thread T0 { st(x, 1, @a); }\n"
       "thread T1 { st(x, 2, @b); }\n"
       "thread T2 { r0 = ld(x, @c); r1 = ld(x, @d); }\n"
       "exists (r0=2 /\\ r1=1 /\\ x=2)\n"},
      {"CO-RSDWI",
       "test CO-RSDWI\nlocations x=0\n"
       "thread T0 { st(x, 1, @a); }\n"
       "thread T1 { st(x, 2, @b); r2 = ld(x, @c); }\n"
       "thread T2 { r0 = ld(x, @d); r1 = ld(x, @e); }\n"
       "exists (r0=2 /\\ r1=1 /\\ r2=2 /\\ x=2)\n"},
      {"MP-RM",
       "test MP-RM\nlocations x=0 y=0\n"
       "thread T0 { st(x, 1, @a); st(y, 1, @b); }\n"
       "thread T1 { r0 = ld(y, @c); r1 = ld(x, @d); }\n"
       "exists (r0=1 /\\ r1=0)\n"},
      {"MP-LZ",
       "test MP-LZ\nlocations x=0 y=0\n"
       "thread T0 { st(x, 1, @a); st(y, x, @b); }\n"
       "thread T1 { r0 = ld(y, @c); r1 = ld(r0, @d); }\n"
       "exists (r0=x /\\ r1=0)\n"},
      {"SB",
       "test SB\nlocations x=0 y=0\n"
       "thread T0 { st(x, 1, @a); r0 = ld(y, @b); }\n"
       "thread T1 { st(y, 1, @c); r1 = ld(x, @d); }\n"
       "exists (r0=0 /\\ r1=0)\n"},
  };
  return src;
}

}  // namespace detail

// Suite name to template. Keys iterate in the canonical report order.
inline std::vector<std::pair<std::string, LitmusTemplate>> builtin_suite() {
  std::vector<std::pair<std::string, LitmusTemplate>> out;
  for (const auto& [name, text] : detail::builtin_sources()) out.emplace_back(name, parse_template(text));
  return out;
}

inline std::optional<LitmusTemplate> find_builtin(const std::string& name) {
  for (auto& [n, tpl] : builtin_suite())
    if (n == name) return tpl;
  return std::nullopt;
}

}  // namespace tristack

#endif  // TRISTACK_LITMUS_HPP_
