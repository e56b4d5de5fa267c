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

#ifndef TRISTACK_TESTS_FIXTURES_HPP_
#define TRISTACK_TESTS_FIXTURES_HPP_

#include <string>
#include <vector>

#include "tristack/mapping.hpp"

namespace fixtures {

// WRC with a release/acquire pair in the middle; the target is forbidden.
inline const char* const kWrcRelAcq =
    "test WRC\n"
    "locations x=0 y=0\n"
    "thread T0 { st(x, 1, rlx); }\n"
    "thread T1 { r0 = ld(x, rlx); st(y, 1, rel); }\n"
    "thread T2 { r1 = ld(y, acq); r2 = ld(x, rlx); }\n"
    "exists (r0=1 /\\ r1=1 /\\ r2=0)\n";

// IRIW with every access sc; the target is forbidden.
inline const char* const kIriwSc =
    "test IRIW\n"
    "locations x=0 y=0\n"
    "thread T0 { st(x, 1, sc); }\n"
    "thread T1 { st(y, 1, sc); }\n"
    "thread T2 { r0 = ld(x, sc); r1 = ld(y, sc); }\n"
    "thread T3 { r2 = ld(y, sc); r3 = ld(x, sc); }\n"
    "exists (r0=1 /\\ r1=0 /\\ r2=1 /\\ r3=0)\n";

// MP whose relaxed flag store may move above the sc data store.
inline const char* const kMpRoachMotel =
    "test MP\n"
    "locations x=0 y=0\n"
    "thread T0 { st(x, 1, sc); st(y, 1, rlx); }\n"
    "thread T1 { r0 = ld(y, sc); r1 = ld(x, sc); }\n"
    "exists (r0=1 /\\ r1=0)\n";

// MP publishing a pointer; the consumer's relaxed load feeds an acquire.
inline const char* const kMpLazy =
    "test MP\n"
    "locations x=0 y=0\n"
    "thread T0 { st(x, 1, rel); st(y, x, rel); }\n"
    "thread T1 { r0 = ld(y, rlx); r1 = ld(r0, acq); }\n"
    "exists (r0=x /\\ r1=0)\n";

using Listing = std::vector<std::vector<std::string>>;  // per thread, rendered instructions

inline const Listing kWrcBaseIntuitive = {
    {"sw x1, (x5)"},
    {"lw x2, (x5)", "fence rw, w", "sw x2, (x6)"},
    {"lw x3, (x6)", "fence r, rw", "lw x4, (x5)"},
};

inline const Listing kIriwBaseIntuitive = {
    {"fence rw, rw", "sw x1, (x7)"},
    {"fence rw, rw", "sw x2, (x8)"},
    {"fence rw, rw", "lw x3, (x7)", "fence rw, rw", "fence rw, rw", "lw x4, (x8)", "fence rw, rw"},
    {"fence rw, rw", "lw x5, (x8)", "fence rw, rw", "fence rw, rw", "lw x6, (x7)", "fence rw, rw"},
};

inline const Listing kWrcBaseAIntuitive = {
    {"sw x1, (x5)"},
    {"lw x2, (x5)", "amoswap.w.rl x2, x0, (x6)"},
    {"amoadd.w.aq x0, x3, (x6)", "lw x4, (x5)"},
};

inline const Listing kMpRoachMotelBaseAIntuitive = {
    {"amoswap.w.aq.rl x1, x0, (x4)", "sw x1, (x5)"},
    {"amoadd.w.aq.rl x0, x2, (x5)", "amoadd.w.aq.rl x0, x3, (x4)"},
};

inline const Listing kMpLazyBaseAIntuitive = {
    {"amoswap.w.rl x1, x0, (x4)", "amoswap.w.rl x4, x0, (x5)"},
    {"lw x2, (x5)", "amoadd.w.aq x0, x3, (x2)"},
};

inline Listing listing(const tristack::IsaProgram& p) {
  Listing out;
  for (const auto& th : p.threads) {
    out.emplace_back();
    for (const auto& in : th.instrs) out.back().push_back(tristack::render_instr(in, p.family));
  }
  return out;
}

}  // namespace fixtures

#endif  // TRISTACK_TESTS_FIXTURES_HPP_
