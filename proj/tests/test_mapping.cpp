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

#include <gtest/gtest.h>

#include <map>
#include <string>

#include "fixtures.hpp"
#include "tristack/mapping.hpp"

using namespace tristack;

namespace {

std::string text(MappingId id, EventKind k, MemOrder o) {
  return row_text(mapping_table(id).row(k, o), id == MappingId::PowerLeadingSync);
}

constexpr auto L = EventKind::Load;
constexpr auto S = EventKind::Store;

}  // namespace

TEST(MappingTable, IntuitiveBaseRows) {
  const auto id = MappingId::BaseIntuitive;
  EXPECT_EQ(text(id, L, MemOrder::Rlx), "ld");
  EXPECT_EQ(text(id, L, MemOrder::Acq), "ld;f[r,m]");
  EXPECT_EQ(text(id, L, MemOrder::Sc), "f[m,m];ld;f[m,m]");
  EXPECT_EQ(text(id, S, MemOrder::Rlx), "st");
  EXPECT_EQ(text(id, S, MemOrder::Rel), "f[m,w];st");
  EXPECT_EQ(text(id, S, MemOrder::Sc), "f[m,m];st");
}

TEST(MappingTable, RefinedBaseRows) {
  const auto id = MappingId::BaseRefined;
  EXPECT_EQ(text(id, L, MemOrder::Acq), "ld;f[r,m]");
  EXPECT_EQ(text(id, L, MemOrder::Sc), "hwf;ld;f[r,m]");
  EXPECT_EQ(text(id, S, MemOrder::Rel), "lwf;st");
  EXPECT_EQ(text(id, S, MemOrder::Sc), "hwf;st");
}

TEST(MappingTable, AtomicRows) {
  EXPECT_EQ(text(MappingId::BaseAIntuitive, L, MemOrder::Acq), "AMO.aq");
  EXPECT_EQ(text(MappingId::BaseAIntuitive, L, MemOrder::Sc), "AMO.aq.rl");
  EXPECT_EQ(text(MappingId::BaseAIntuitive, S, MemOrder::Rel), "AMO.rl");
  EXPECT_EQ(text(MappingId::BaseAIntuitive, S, MemOrder::Sc), "AMO.aq.rl");
  EXPECT_EQ(text(MappingId::BaseARefined, L, MemOrder::Sc), "AMO.aq.sc");
  EXPECT_EQ(text(MappingId::BaseARefined, S, MemOrder::Sc), "AMO.rl.sc");
}

TEST(MappingTable, LeadingSyncRows) {
  EXPECT_EQ(text(MappingId::PowerLeadingSync, L, MemOrder::Sc), "hwsync;ld;ctrlisync");
  EXPECT_EQ(text(MappingId::PowerLeadingSync, S, MemOrder::Sc), "hwsync;st");
  EXPECT_EQ(text(MappingId::PowerLeadingSync, S, MemOrder::Rel), "lwsync;st");
}

TEST(MappingTable, StructuredRows) {
  const auto rel = mapping_table(MappingId::BaseIntuitive).row(S, MemOrder::Rel);
  ASSERT_EQ(rel.size(), 2u);
  EXPECT_EQ(rel[0].kind, InstrKind::Fence);
  EXPECT_EQ(rel[0].pred, kRW);
  EXPECT_EQ(rel[0].succ, kW);
  EXPECT_EQ(rel[0].cum, Cumulativity::None);
  EXPECT_EQ(rel[1].kind, InstrKind::Store);

  const auto sc = mapping_table(MappingId::BaseARefined).row(L, MemOrder::Sc);
  ASSERT_EQ(sc.size(), 1u);
  EXPECT_EQ(sc[0].kind, InstrKind::Amo);
  EXPECT_TRUE(sc[0].aq && sc[0].sc && !sc[0].rl);

  const auto hw = mapping_table(MappingId::BaseRefined).row(L, MemOrder::Sc);
  EXPECT_EQ(hw[0].cum, Cumulativity::Heavyweight);
  EXPECT_EQ(mapping_table(MappingId::BaseRefined).row(S, MemOrder::Rel)[0].cum, Cumulativity::Lightweight);
}

TEST(MappingTable, EveryValidPairHasOneRow) {
  for (MappingId id : all_mapping_ids()) {
    const MappingTable t = mapping_table(id);
    int rows = 0;
    for (EventKind k : {L, S})
      for (MemOrder o : {MemOrder::Rlx, MemOrder::Acq, MemOrder::Rel, MemOrder::Sc}) {
        if (!order_valid_for(k, o)) {
          EXPECT_THROW(t.row(k, o), Error);
          continue;
        }
        EXPECT_FALSE(t.row(k, o).empty());
        ++rows;
      }
    EXPECT_EQ(rows, 6);
    EXPECT_EQ(t.rows.size(), 6u);
  }
}

TEST(MappingTable, IdsRoundTrip) {
  for (MappingId id : all_mapping_ids()) EXPECT_EQ(parse_mapping_id(to_string(id)), id);
  EXPECT_THROW(parse_mapping_id("arm-v8"), Error);
}

TEST(MappingCompile, GoldenListings) {
  struct Case {
    const char* src;
    MappingId id;
    const fixtures::Listing* want;
  };
  const Case cases[] = {
      {fixtures::kWrcRelAcq, MappingId::BaseIntuitive, &fixtures::kWrcBaseIntuitive},
      {fixtures::kIriwSc, MappingId::BaseIntuitive, &fixtures::kIriwBaseIntuitive},
      {fixtures::kWrcRelAcq, MappingId::BaseAIntuitive, &fixtures::kWrcBaseAIntuitive},
      {fixtures::kMpRoachMotel, MappingId::BaseAIntuitive, &fixtures::kMpRoachMotelBaseAIntuitive},
      {fixtures::kMpLazy, MappingId::BaseAIntuitive, &fixtures::kMpLazyBaseAIntuitive},
  };
  for (const auto& c : cases)
    EXPECT_EQ(fixtures::listing(compile_test(parse_litmus(c.src), c.id)), *c.want) << to_string(c.id);
}

TEST(MappingCompile, TargetUsesAllocatedRegisters) {
  const IsaProgram p = compile_test(parse_litmus(fixtures::kWrcRelAcq), MappingId::BaseIntuitive);
  const std::string r = render_isa(p);
  EXPECT_NE(r.find("exists (x1=1 /\\ x2=1 /\\ x3=1 /\\ x4=0)"), std::string::npos) << r;
}

TEST(MappingCompile, PowerIsEmissionOnly) {
  const LitmusTest t = parse_litmus(fixtures::kIriwSc);
  EXPECT_THROW(compile_test(t, MappingId::PowerLeadingSync), Error);
  const IsaProgram p = compile_test(t, MappingId::PowerLeadingSync, CompilePurpose::Emit);
  EXPECT_EQ(p.family, IsaFamily::Power);
  const std::string r = render_isa(p);
  EXPECT_NE(r.find("hwsync"), std::string::npos);
  EXPECT_NE(r.find("ctrlisync"), std::string::npos);
  EXPECT_EQ(parse_isa(r), p);
}

TEST(MappingCompile, InstructionCountLaw) {
  for (const auto& [name, tpl] : builtin_suite())
    for (const auto& t : expand_template(tpl))
      for (MappingId id : all_mapping_ids()) {
        const IsaProgram p = compile_test(t, id, CompilePurpose::Emit);
        const MappingTable table = mapping_table(id);
        ASSERT_EQ(p.threads.size(), t.threads.size());
        for (std::size_t ti = 0; ti < t.threads.size(); ++ti) {
          std::map<int, int> len, anchors;
          for (const auto& in : p.threads[ti].instrs) {
            ++len[in.origin];
            anchors[in.origin] += in.is_access();
          }
          for (const auto& e : t.threads[ti].events) {
            ASSERT_EQ(len[e.index], static_cast<int>(table.row(e.kind, *e.order).size())) << t.name;
            ASSERT_EQ(anchors[e.index], 1) << t.name;
          }
          ASSERT_EQ(len.size(), t.threads[ti].events.size()) << t.name;
        }
      }
}

TEST(MappingCompile, Deterministic) {
  const LitmusTest t = parse_litmus(fixtures::kMpLazy);
  for (MappingId id : all_mapping_ids())
    EXPECT_EQ(compile_test(t, id, CompilePurpose::Emit), compile_test(t, id, CompilePurpose::Emit));
}

TEST(MappingCompile, AtomicLoadsAndStoresUseZeroRegister) {
  const IsaProgram p = compile_test(parse_litmus(fixtures::kWrcRelAcq), MappingId::BaseAIntuitive);
  const IsaInstr& swap = p.threads[1].instrs[1];
  EXPECT_EQ(swap.op, AmoOp::Swap);
  EXPECT_EQ(swap.dest, 0);
  const IsaInstr& add = p.threads[2].instrs[0];
  EXPECT_EQ(add.op, AmoOp::Add);
  EXPECT_EQ(add.src, 0);
}

TEST(MappingDeps, PointerChaseIsAddressDependency) {
  const IsaProgram p = compile_test(parse_litmus(fixtures::kMpLazy), MappingId::BaseAIntuitive);
  const auto d = compute_dependencies(p);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0], (Dependency{1, 0, 1, DepKind::Addr}));
}

TEST(MappingDeps, NoneWhenRegistersAreConstants) {
  EXPECT_TRUE(compute_dependencies(compile_test(parse_litmus(fixtures::kWrcRelAcq), MappingId::BaseIntuitive))
                  .empty());
}

TEST(MappingDeps, LoadFeedingStoreValueIsData) {
  const LitmusTest t = parse_litmus(
      "test LB\nlocations x=0 y=0\nthread T0 { r0 = ld(x, rlx); st(y, r0, rlx); }\nexists (y=0)\n");
  const auto d = compute_dependencies(compile_test(t, MappingId::BaseIntuitive));
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].kind, DepKind::Data);
}

TEST(MappingRender, FigureSyntax) {
  const std::string a = render_isa(compile_test(parse_litmus(fixtures::kWrcRelAcq), MappingId::BaseAIntuitive));
  EXPECT_NE(a.find("amoswap.w.rl x2, x0, (x6)"), std::string::npos);
  const std::string b =
      render_isa(compile_test(parse_litmus(fixtures::kMpRoachMotel), MappingId::BaseAIntuitive));
  EXPECT_NE(b.find("amoadd.w.aq.rl x0, x2, (x5)"), std::string::npos);
  const std::string c = render_isa(compile_test(parse_litmus(fixtures::kMpRoachMotel), MappingId::BaseARefined));
  EXPECT_NE(c.find(".sc"), std::string::npos);
}

TEST(MappingRender, EmptyProgramIsHeaderOnly) {
  IsaProgram p;
  p.name = "Nothing";
  const std::string r = render_isa(p);
  EXPECT_EQ(r.rfind("riscv Nothing\n", 0), 0u);
  EXPECT_EQ(r.find("thread"), std::string::npos);
  EXPECT_EQ(parse_isa(r), p);
}

TEST(MappingRender, RoundTripEveryVariant) {
  for (const auto& [name, tpl] : builtin_suite())
    for (const auto& t : expand_template(tpl))
      for (MappingId id : all_mapping_ids()) {
        const IsaProgram p = compile_test(t, id, CompilePurpose::Emit);
        ASSERT_EQ(parse_isa(render_isa(p)), p) << t.name << " " << to_string(id);
      }
}

TEST(MappingRender, MalformedIsaRejected) {
  EXPECT_THROW(parse_isa("riscv X\nlocations x=0\nthread T0 regs(x5=x) {\n  0: frob x1, (x5);\n}\nexists (x=0)\n"),
               ParseError);
}
