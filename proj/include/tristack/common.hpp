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

#ifndef TRISTACK_COMMON_HPP_
#define TRISTACK_COMMON_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <tuple>

namespace tristack {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line, int col)
      : Error("line " + std::to_string(line) + ", column " +
              std::to_string(col) + ": " + msg),
        line_(line),
        col_(col) {}

  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

// Raised when an enumeration exceeds its configured candidate cap. Never a
// verdict: callers must treat it as "inconclusive".
class ResourceLimitError : public Error {
 public:
  explicit ResourceLimitError(const std::string& what, std::uint64_t cap)
      : Error(what + " exceeded cap of " + std::to_string(cap)), cap_(cap) {}

  std::uint64_t cap() const { return cap_; }

 private:
  std::uint64_t cap_;
};

// A value is either an integer or the address of a named location.
struct Value {
  enum class Kind { Int, Loc };

  Kind kind = Kind::Int;
  std::int64_t num = 0;
  std::string loc;

  static Value Int(std::int64_t n) { return Value{Kind::Int, n, {}}; }
  static Value Loc(std::string name) { return Value{Kind::Loc, 0, std::move(name)}; }

  bool is_loc() const { return kind == Kind::Loc; }

  std::string str() const { return is_loc() ? loc : std::to_string(num); }

  friend bool operator==(const Value& a, const Value& b) {
    return a.kind == b.kind && a.num == b.num && a.loc == b.loc;
  }
  friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }
  friend bool operator<(const Value& a, const Value& b) {
    return std::tie(a.kind, a.num, a.loc) < std::tie(b.kind, b.num, b.loc);
  }
};

}  // namespace tristack

#endif  // TRISTACK_COMMON_HPP_
