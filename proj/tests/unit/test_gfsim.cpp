#include <gtest/gtest.h>

#include <set>
#include <vector>

#include "gfa/core/rng.hpp"
#include "gfa/estimation/estimators.hpp"
#include "gfa/gfsim.hpp"

using namespace gfa;

namespace {

GfConfig config(int w, int t, int k, Occupation occ = Occupation::Adjacent) {
    GfConfig cfg;
    cfg.w = w;
    cfg.t_slots = t;
    cfg.k = k;
    cfg.occupation = occ;
    return cfg;
}

}  // namespace

TEST(GfSim, EmptyCycle) {
    const auto r = simulate_cycle(config(5, 8, 8), 0, 1);
    EXPECT_TRUE(r.outcomes.empty());
    EXPECT_EQ(r.n_active, 0);
    for (const auto& s : r.observation.slots) {
        EXPECT_EQ(s, (SlotObservation{0, 0, 5}));
    }
}

TEST(GfSim, LoneUserAlwaysSucceeds) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto r = simulate_cycle(config(3, 4, 2), 1, seed);
        int busy = 0;
        for (const auto& s : r.observation.slots) {
            if (s == SlotObservation{1, 0, 2}) {
                ++busy;
            } else {
                EXPECT_EQ(s, (SlotObservation{0, 0, 3}));
            }
        }
        EXPECT_EQ(busy, 2);
        ASSERT_EQ(r.outcomes.size(), 1u);
        EXPECT_TRUE(r.outcomes[0].succeeded);
        EXPECT_EQ(r.outcomes[0].first_success_slot, r.outcomes[0].start_slot());
    }
}

TEST(GfSim, TwoUsersTwoRbsCollideHalfTheTime) {
    // Of the 4 equally likely RB choice pairs, 2 collide.
    const auto cfg = config(2, 1, 1);
    CycleSimulator sim;
    int collided = 0;
    const int trials = 100000;
    for (int seed = 0; seed < trials; ++seed) {
        sim.run(cfg, 2, static_cast<std::uint64_t>(seed));
        const auto s = sim.slot_observation(0);
        ASSERT_TRUE((s == SlotObservation{2, 0, 0}) || (s == SlotObservation{0, 1, 1}));
        collided += s.b;
    }
    EXPECT_NEAR(static_cast<double>(collided) / trials, 0.5, 0.01);
}

TEST(GfSim, ObservationMatchesRecount) {
    for (auto occ : {Occupation::Adjacent, Occupation::Arbitrary}) {
        for (int seed = 0; seed < 200; ++seed) {
            const auto cfg = config(1 + seed % 7, 1 + seed % 9, 1, occ);
            auto c2 = cfg;
            c2.k = 1 + seed % cfg.t_slots;
            CycleSimulator sim;
            const int n = seed % 23;
            sim.run(c2, n, static_cast<std::uint64_t>(seed));
            std::vector<int> load(static_cast<std::size_t>(c2.t_slots), 0);
            for (int slot = 0; slot < c2.t_slots; ++slot) {
                int a = 0, b = 0, c = 0;
                for (int rb = 0; rb < c2.w; ++rb) {
                    int users = 0;
                    for (int u = 0; u < n; ++u) {
                        const auto out = sim.outcome(u);
                        for (int j = 0; j < c2.k; ++j) {
                            users += (out.slots[static_cast<std::size_t>(j)] == slot + 1 && sim.rb_choice(u, j) == rb);
                        }
                    }
                    a += users == 1;
                    b += users >= 2;
                    c += users == 0;
                    load[static_cast<std::size_t>(slot)] += users;
                }
                EXPECT_EQ(sim.slot_observation(slot), (SlotObservation{a, b, c}));
            }
            EXPECT_EQ(sim.slot_loads(), load);
        }
    }
}

TEST(GfSim, OutcomeSlotShapes) {
    for (auto occ : {Occupation::Adjacent, Occupation::Arbitrary}) {
        const auto cfg = config(4, 8, 3, occ);
        const auto r = simulate_cycle(cfg, 30, 99);
        for (const auto& o : r.outcomes) {
            ASSERT_EQ(o.slots.size(), 3u);
            std::set<int> distinct(o.slots.begin(), o.slots.end());
            EXPECT_EQ(distinct.size(), 3u);
            EXPECT_GE(o.slots.front(), 1);
            EXPECT_LE(o.slots.back(), 8);
            if (occ == Occupation::Adjacent) {
                EXPECT_LE(o.start_slot(), cfg.start_slots());
                EXPECT_EQ(o.slots.back(), o.start_slot() + 2);
            }
            EXPECT_EQ(o.succeeded, o.first_success_slot.has_value());
        }
    }
}

TEST(GfSim, AdjacentLoadsFollowStartVector) {
    const auto cfg = config(6, 8, 3);
    CycleSimulator sim;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        sim.run(cfg, 17, seed);
        std::vector<int> phi(static_cast<std::size_t>(cfg.start_slots()), 0);
        for (int u = 0; u < 17; ++u) {
            ++phi[static_cast<std::size_t>(sim.outcome(u).start_slot() - 1)];
        }
        EXPECT_EQ(sim.slot_loads(), estimation::loads_from_starts(phi, 8, 3));
    }
}

TEST(GfSim, ArbitraryWithFullRepetitionReplaysAdjacent) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto adj = simulate_cycle(config(5, 8, 8), 12, seed);
        const auto arb = simulate_cycle(config(5, 8, 8, Occupation::Arbitrary), 12, seed);
        EXPECT_EQ(adj.observation.slots, arb.observation.slots);
    }
}

TEST(GfSim, Deterministic) {
    const auto a = simulate_cycle(config(7, 8, 4, Occupation::Arbitrary), 20, 1234);
    const auto b = simulate_cycle(config(7, 8, 4, Occupation::Arbitrary), 20, 1234);
    EXPECT_EQ(a.observation.slots, b.observation.slots);
    const auto c = simulate_cycle(config(7, 8, 4, Occupation::Arbitrary), 20, 1235);
    EXPECT_NE(a.observation.slots, c.observation.slots);
}

TEST(GfSim, RejectsBadConfig) {
    EXPECT_THROW(simulate_cycle(config(0, 8, 1), 1, 0), Error);
    EXPECT_THROW(simulate_cycle(config(2, 4, 5), 1, 0), Error);
    EXPECT_THROW(simulate_cycle(config(2, 4, 0), 1, 0), Error);
    EXPECT_THROW(simulate_cycle(config(2, 4, 1), -1, 0), Error);
}

TEST(RetryChain, SingleUserServedInFirstCycle) {
    const auto cfg = config(4, 8, 2);
    const auto records = simulate_retry_chain(cfg, traffic::ArrivalTrace{{1}}, 5);
    ASSERT_EQ(records.size(), 1u);
    ASSERT_TRUE(records[0].served());
    EXPECT_LE(*records[0].delay_slots * cfg.slot_ms, cfg.t_slots * cfg.slot_ms);
    EXPECT_EQ(records[0].attempts, 1);
}

TEST(RetryChain, PigeonholeNeverServes) {
    const auto cfg = config(1, 8, 8);
    const auto records = simulate_retry_chain(cfg, traffic::ArrivalTrace{{2}}, 5);
    ASSERT_EQ(records.size(), 2u);
    for (const auto& r : records) {
        EXPECT_FALSE(r.served());
        // 80-slot horizon, 10-slot cycles: the 8th attempt is the last that can land in time.
        EXPECT_EQ(r.attempts, 8);
    }
}

TEST(RetryChain, DelaysLandInsideAccessSlots) {
    const auto cfg = config(3, 8, 2);
    const auto records = simulate_retry_chain(cfg, traffic::ArrivalTrace{{6, 9, 4, 0, 12}}, 77);
    EXPECT_EQ(records.size(), 31u);
    for (const auto& r : records) {
        if (r.served()) {
            const int within = *r.delay_slots % cfg.cycle_slots();
            EXPECT_GE(within, 1);
            EXPECT_LE(within, cfg.t_slots);
            EXPECT_EQ(*r.delay_slots / cfg.cycle_slots(), r.attempts - 1);
            EXPECT_LE(*r.delay_slots, truncation_in_slots(10.0, cfg.slot_ms));
        }
    }
}
