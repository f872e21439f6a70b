#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "support/traces.hpp"
#include "wearcache/fifo.hpp"

using namespace wearcache;
using wearcache::synth::blocks_of;
using wearcache::synth::naive_fifo_misses;

namespace {

// A=1, B=2, C=3
const SubTrace kT1 = blocks_of({1, 2, 1, 3, 2, 1});

std::vector<Assoc> range_assocs(Assoc lo, Assoc hi) {
  std::vector<Assoc> v;
  for (Assoc m = lo; m <= hi; ++m) v.push_back(m);
  return v;
}

}  // namespace

TEST(SimulateSet, T1MissesMatchHandReplay) {
  // Frozen from the naive reference: 6, 4, 3.
  ASSERT_EQ(naive_fifo_misses(kT1, 1), 6u);
  ASSERT_EQ(naive_fifo_misses(kT1, 2), 4u);
  ASSERT_EQ(naive_fifo_misses(kT1, 3), 3u);
  std::vector<Assoc> ms{1, 2, 3};
  auto r = simulate_set(kT1, ms);
  EXPECT_EQ(r.misses_by_assoc, (std::map<Assoc, MissCount>{{1, 6}, {2, 4}, {3, 3}}));
  EXPECT_EQ(r.designated_assoc, 3u);
}

TEST(SimulateSet, EmptyTrace) {
  auto r = simulate_set(SubTrace{}, Assoc{5});
  EXPECT_EQ(r.misses(5), 0u);
  EXPECT_EQ(r.way_fills, std::vector<MissCount>(5, 0));
}

TEST(SimulateSet, WayFillsAtDesignatedAssoc) {
  // A->w0, B->w1, C evicts A->w0, A evicts B->w1
  auto r = simulate_set(kT1, Assoc{2});
  EXPECT_EQ(r.way_fills, (std::vector<MissCount>{2, 2}));
  EXPECT_EQ(r.designated_assoc, 2u);
}

TEST(SimulateSet, RejectsZeroAndEmptyAssocSet) {
  std::vector<Assoc> bad{0, 2};
  EXPECT_THROW(simulate_set(kT1, bad), std::invalid_argument);
  EXPECT_THROW(simulate_set(kT1, std::span<const Assoc>{}), std::invalid_argument);
  auto r = simulate_set(kT1, Assoc{2});
  EXPECT_THROW(r.misses(3), std::out_of_range);
}

TEST(SimulateSet, HitsDoNotReorderQueue) {
  // LRU would keep A at M=2 (A refreshed before C); FIFO evicts it.
  auto t = blocks_of({1, 2, 1, 3, 1});
  EXPECT_EQ(simulate_set(t, Assoc{2}).misses(2), 4u);
}

TEST(SimulateSet, WriteHitsTrackedPerWay) {
  SubTrace t = blocks_of({1, 2, 1, 3, 2, 1});
  t[2].kind = AccessKind::Write;  // hit on A for M >= 2
  t[4].kind = AccessKind::Write;  // hit on B for M >= 2
  std::vector<Assoc> ms{1, 2, 3};
  auto r = simulate_set(t, ms);
  EXPECT_EQ(r.write_hits_by_assoc.at(1), 0u);
  EXPECT_EQ(r.write_hits_by_assoc.at(2), 2u);
  EXPECT_EQ(r.write_hits_by_assoc.at(3), 2u);
  EXPECT_EQ(r.write_hits_by_way, (std::vector<MissCount>{1, 1, 0}));
}

TEST(ColdMisses, Examples) {
  EXPECT_EQ(cold_misses(kT1), 3u);
  EXPECT_EQ(cold_misses(SubTrace{}), 0u);
  EXPECT_EQ(cold_misses(blocks_of({1, 2, 3, 4})), 4u);
}

TEST(OptimalAssoc, Examples) {
  EXPECT_EQ(optimal_assoc(kT1), 3u);
  EXPECT_EQ(naive_fifo_misses(kT1, 3), 3u);  // = n*
  EXPECT_GT(naive_fifo_misses(kT1, 2), 3u);
  EXPECT_EQ(optimal_assoc(blocks_of({1, 1, 1})), 1u);
  EXPECT_EQ(optimal_assoc(blocks_of({1, 2, 3})), 1u);
  EXPECT_EQ(optimal_assoc(SubTrace{}), 1u);
}

TEST(WriteTotals, Examples) {
  auto r2 = simulate_set(kT1, Assoc{2});
  EXPECT_EQ(write_totals(r2, 2), 4u);
  auto r1 = simulate_set(kT1, Assoc{1});
  EXPECT_EQ(write_totals(r1, 1), 6u);

  SubTrace t = kT1;
  t[2].kind = AccessKind::Write;
  t[4].kind = AccessKind::Write;
  auto r3 = simulate_set(t, Assoc{3});
  EXPECT_EQ(write_totals(r3, 3), 5u);
  EXPECT_THROW(write_totals(r3, 4), std::out_of_range);
}

// Every property below runs over the same randomized subtraces.
class FifoProperties : public ::testing::Test {
 protected:
  void SetUp() override {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> len(0, 1000);
    std::uniform_int_distribution<std::uint32_t> distinct(1, 32);
    for (int i = 0; i < 300; ++i) traces_.push_back(synth::random_subtrace(rng, len(rng), distinct(rng)));
  }
  std::vector<SubTrace> traces_;
};

TEST_F(FifoProperties, MatchesNaiveSimulatorAtEveryAssoc) {
  const auto ms = range_assocs(1, 40);
  for (const auto& t : traces_) {
    auto r = simulate_set(t, ms);
    for (Assoc m : ms) ASSERT_EQ(r.misses(m), naive_fifo_misses(t, m)) << "M=" << m;
  }
}

TEST_F(FifoProperties, OptimalAssocIsMinimal) {
  for (const auto& t : traces_) {
    const auto n_star = cold_misses(t);
    const auto m_star = optimal_assoc(t);
    ASSERT_EQ(n_star, synth::distinct_count(t));
    ASSERT_EQ(naive_fifo_misses(t, m_star), n_star);
    if (m_star > 1) {
      ASSERT_GT(naive_fifo_misses(t, m_star - 1), n_star);
    }
  }
}

TEST_F(FifoProperties, ColdMissFloor) {
  const auto ms = range_assocs(1, 40);
  for (const auto& t : traces_) {
    auto r = simulate_set(t, ms);
    const auto n_star = cold_misses(t);
    const auto m_star = optimal_assoc(t);
    for (Assoc m : ms) {
      ASSERT_GE(r.misses(m), n_star);
      if (m >= m_star) {
        ASSERT_EQ(r.misses(m), n_star);
      }
    }
  }
}

TEST_F(FifoProperties, WayFillConservation) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<Assoc> pick(1, 24);
  for (const auto& t : traces_) {
    std::vector<Assoc> ms{pick(rng), pick(rng), pick(rng)};
    auto r = simulate_set(t, ms);
    MissCount sum = 0;
    for (auto f : r.way_fills) sum += f;
    ASSERT_EQ(sum, r.misses(r.designated_assoc));
  }
}

TEST_F(FifoProperties, MultiRunIndependence) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<Assoc> pick(1, 24);
  for (const auto& t : traces_) {
    const Assoc a = pick(rng), b = pick(rng);
    std::vector<Assoc> both{a, b};
    auto joint = simulate_set(t, both);
    auto alone = simulate_set(t, a);
    ASSERT_EQ(joint.misses(a), alone.misses(a));
    ASSERT_EQ(joint.write_hits_by_assoc.at(a), alone.write_hits_by_assoc.at(a));
  }
}
