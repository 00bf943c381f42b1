#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>
#include <set>
#include <sstream>

#include "bwset/profiler.hpp"
#include "test_util.hpp"

using namespace bwset;

namespace {

ProfileConfig pc_only(double theta = 0.95) { return {ProfileMode::kPcOnly, 0, 0, theta}; }
ProfileConfig global_cfg(unsigned n, double theta = 0.95) {
  return {ProfileMode::kGlobalTuple, n, 0, theta};
}

}  // namespace

TEST_CASE("pc-only counting") {
  auto records = testutil::records_from({{0xa0, 1}, {0xa0, 0}, {0xb0, 1}});
  auto run = profile_trace(records, pc_only());
  REQUIRE(run.table.size() == 2);
  CHECK(run.table.at({0xa0, 0, 0}).occurrence == 2);
  CHECK(run.table.at({0xa0, 0, 0}).taken == 1);
  CHECK(run.table.at({0xb0, 0, 0}).occurrence == 1);
  CHECK(run.total_occurrences == 3);
  CHECK(run.static_branch_count() == 2);
}

TEST_CASE("global-tuple warm-up on a monotone trace") {
  // 1000x (A, taken) with N=8: keys walk 0x00,0x01,0x03,...,0x7f during
  // warm-up, then 0xff absorbs the remaining 992 occurrences.
  std::vector<BranchRecord> records(1000, BranchRecord{0xa0, true});
  auto run = profile_trace(records, global_cfg(8));
  CHECK(run.table.size() == 9);
  CHECK(run.table.at({0xa0, 0xff, 0}).occurrence == 992);
  CHECK(run.table.at({0xa0, 0x00, 0}).occurrence == 1);
  CHECK(run.table.at({0xa0, 0x7f, 0}).occurrence == 1);
}

TEST_CASE("seven dominant contexts exceed 95 percent of occurrences") {
  // One branch cycling a period-7 pattern whose 4-bit windows are all
  // distinct, plus a rare noise branch: the 7 phase tuples dominate.
  const std::string pattern = "TTTNTNN";
  std::vector<BranchRecord> records;
  std::size_t occ = 0;
  for (std::size_t i = 0; i < 20000; ++i) {
    if (i % 150 == 149) {
      records.push_back({0x9000, i % 300 == 299});
    } else {
      records.push_back({0x8000, pattern[occ % 7] == 'T'});
      ++occ;
    }
  }
  auto run = profile_trace(records, global_cfg(4));
  auto sorted = sorted_tuples(run);
  REQUIRE(sorted.size() >= 7);
  std::uint64_t top7 = 0;
  for (std::size_t i = 0; i < 7; ++i) top7 += sorted[i].second.occurrence;
  CHECK(static_cast<double>(top7) > 0.95 * static_cast<double>(run.total_occurrences));
}

TEST_CASE("mispredict counters follow the attached stream") {
  auto records = testutil::records_from({{0xa0, 1}, {0xa0, 1}, {0xa0, 0}});
  std::vector<bool> predictions = {true, false, false};  // one wrong in the middle
  auto run = profile_trace(records, pc_only(), &predictions);
  CHECK(run.table.at({0xa0, 0, 0}).mispredict == 1);
}

TEST_CASE("misaligned prediction stream names the index") {
  auto records = testutil::records_from({{0xa0, 1}, {0xa0, 1}});
  std::vector<bool> predictions = {true};
  try {
    profile_trace(records, pc_only(), &predictions);
    FAIL("expected AlignmentError");
  } catch (const AlignmentError& e) {
    CHECK(e.index() == 1);
  }
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(profile_trace({}, ProfileConfig{ProfileMode::kPcOnly, 8, 0, 0.95}), ConfigError);
  CHECK_THROWS_AS(profile_trace({}, ProfileConfig{ProfileMode::kGlobalTuple, 65, 0, 0.95}),
                  ConfigError);
  CHECK_THROWS_AS(profile_trace({}, ProfileConfig{ProfileMode::kGlobalTuple, 0, 0, 0.95}),
                  ConfigError);
  CHECK_THROWS_AS(profile_trace({}, ProfileConfig{ProfileMode::kGlobalLocalTuple, 8, 25, 0.95}),
                  ConfigError);
  CHECK_THROWS_AS(profile_trace({}, ProfileConfig{ProfileMode::kGlobalTuple, 8, 0, 0.0}),
                  ConfigError);
  CHECK_THROWS_AS(profile_trace({}, ProfileConfig{ProfileMode::kGlobalTuple, 8, 0, 1.5}),
                  ConfigError);
}

TEST_CASE("dynamic/static split") {
  auto all_taken = testutil::records_from({{0xa0, 1}, {0xb0, 1}, {0xc0, 1}, {0xa0, 1}});
  auto [s1, d1] = dynamic_static_split(profile_trace(all_taken, pc_only()));
  CHECK(s1 == 3);
  CHECK(d1 == 0);

  auto alternating = testutil::records_from({{0xa0, 1}, {0xa0, 0}, {0xa0, 1}});
  auto [s2, d2] = dynamic_static_split(profile_trace(alternating, pc_only()));
  CHECK(s2 == 0);
  CHECK(d2 == 1);
}

TEST_CASE("dynamic/static split matches a brute-force grouping") {
  std::mt19937_64 rng(9);
  auto records = testutil::random_trace(rng, 40, 4000);
  auto run = profile_trace(records, pc_only());
  auto [stat, dyn] = dynamic_static_split(run);

  std::map<std::uint64_t, std::set<bool>> outcomes;
  for (const auto& r : records) outcomes[r.pc].insert(r.taken);
  std::uint64_t expect_dyn = 0;
  for (const auto& [pc, set] : outcomes) expect_dyn += set.size() == 2;
  CHECK(dyn == expect_dyn);
  CHECK(stat + dyn == outcomes.size());
}

TEST_CASE("conservation and determinism invariants on random traces") {
  std::mt19937_64 rng(31337);
  for (int round = 0; round < 5; ++round) {
    auto records = testutil::random_trace(rng, 16 + round * 16, 5000);
    std::uint64_t taken_records = 0;
    for (const auto& r : records) taken_records += r.taken;

    for (const auto& cfg :
         {pc_only(), global_cfg(8), ProfileConfig{ProfileMode::kGlobalLocalTuple, 8, 4, 0.95}}) {
      auto run = profile_trace(records, cfg);
      std::uint64_t occ = 0, taken = 0;
      for (const auto& [key, st] : run.table) {
        occ += st.occurrence;
        taken += st.taken;
      }
      CHECK(occ == records.size());
      CHECK(taken == taken_records);
      CHECK(run.total_occurrences == records.size());

      auto rerun = profile_trace(records, cfg);
      CHECK(rerun.table.size() == run.table.size());
      for (const auto& [key, st] : run.table) {
        auto it = rerun.table.find(key);
        REQUIRE(it != rerun.table.end());
        CHECK(it->second.occurrence == st.occurrence);
        CHECK(it->second.taken == st.taken);
      }
    }
  }
}

TEST_CASE("mode refinement: global keys project onto pc keys") {
  std::mt19937_64 rng(77);
  auto records = testutil::random_trace(rng, 24, 6000);
  auto pc_run = profile_trace(records, pc_only());
  auto tuple_run = profile_trace(records, global_cfg(8));

  std::map<std::uint64_t, std::uint64_t> projected;
  for (const auto& [key, st] : tuple_run.table) projected[key.pc] += st.occurrence;
  CHECK(projected.size() == pc_run.table.size());
  for (const auto& [key, st] : pc_run.table) CHECK(projected.at(key.pc) == st.occurrence);
  CHECK(tuple_run.table.size() >= pc_run.table.size());
}

TEST_CASE("distinct tuple count is monotone in history length") {
  std::mt19937_64 rng(5);
  auto records = testutil::random_trace(rng, 12, 4000);
  std::size_t prev = 0;
  for (unsigned n : {1u, 2u, 4u, 8u, 16u, 32u}) {
    auto run = profile_trace(records, global_cfg(n));
    CHECK(run.table.size() >= prev);
    prev = run.table.size();
  }
  auto gl = profile_trace(records, ProfileConfig{ProfileMode::kGlobalLocalTuple, 8, 4, 0.95});
  CHECK(gl.table.size() >= profile_trace(records, global_cfg(8)).table.size());
}

TEST_CASE("profile dump is sorted and stable") {
  auto records = testutil::records_from({{0xb0, 1}, {0xa0, 1}, {0xa0, 1}, {0xc0, 0}});
  auto run = profile_trace(records, pc_only());
  std::ostringstream os;
  dump_profile(run, os);
  CHECK(os.str() ==
        "pc,global_bits,local_bits,occurrence,taken,mispredict\n"
        "0xa0,0x0,0x0,2,2,0\n"
        "0xb0,0x0,0x0,1,1,0\n"
        "0xc0,0x0,0x0,1,0,0\n");
}

TEST_CASE("transition bookkeeping") {
  // a: T,N,T -> 2 transitions over 2 pairs; b: T,T -> 0 over 1 pair
  auto records =
      testutil::records_from({{0xa0, 1}, {0xb0, 1}, {0xa0, 0}, {0xb0, 1}, {0xa0, 1}});
  auto run = profile_trace(records, pc_only());
  CHECK(run.transition_count == 2);
  CHECK(run.transition_pairs() == 3);
}
