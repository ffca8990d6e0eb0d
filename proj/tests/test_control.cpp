#include "msvr/control.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace msvr;

TEST(ApplyEvents, Examples) {
    const std::vector<Event> sag{{EventKind::kSag, 0.1, 0.2, 0.7}};
    EXPECT_EQ(apply_events(sag, 0.15), 0.7);
    EXPECT_EQ(apply_events(sag, 0.05), 1.0);
    EXPECT_EQ(apply_events(sag, 0.2), 1.0);
    EXPECT_EQ(apply_events(sag, 0.1), 0.7);
    const std::vector<Event> swell{{EventKind::kSwell, 0.1, 0.2, 1.3}};
    EXPECT_EQ(apply_events(swell, 0.15), 1.3);
    EXPECT_EQ(apply_events({}, 0.15), 1.0);
}

TEST(ApplyEvents, SequentialEvents) {
    const EventSchedule s({{EventKind::kSwell, 0.3, 0.4, 1.2}, {EventKind::kSag, 0.1, 0.2, 0.5}});
    EXPECT_EQ(s.events().front().kind, EventKind::kSag);
    EXPECT_EQ(s.scale(0.15), 0.5);
    EXPECT_EQ(s.scale(0.35), 1.2);
    EXPECT_EQ(s.scale(0.25), 1.0);
}

TEST(EventSchedule, RejectsInvalid) {
    EXPECT_THROW(EventSchedule({{EventKind::kSag, 0.1, 0.3, 0.7}, {EventKind::kSwell, 0.2, 0.4, 1.3}}), ConfigError);
    EXPECT_THROW(EventSchedule({{EventKind::kSag, 0.2, 0.1, 0.7}}), ConfigError);
    EXPECT_THROW(EventSchedule({{EventKind::kSag, 0.1, 0.2, 1.0}}), ConfigError);
    EXPECT_THROW(EventSchedule({{EventKind::kSwell, 0.1, 0.2, 0.9}}), ConfigError);
    EXPECT_THROW(EventSchedule({{EventKind::kSag, 0.1, 0.2, 0.0}}), ConfigError);
    EXPECT_NO_THROW(EventSchedule({{EventKind::kSag, 0.1, 0.2, 0.7}, {EventKind::kSwell, 0.2, 0.4, 1.3}}));
}

TEST(InjectionReference, Examples) {
    const auto r = injection_reference({100.0, 5.0, -3.0}, {70.0, 5.0, -3.0});
    EXPECT_EQ(r[0], 30.0);
    EXPECT_EQ(r[1], 0.0);
    EXPECT_EQ(r[2], 0.0);
}

TEST(InjectionReference, ProportionalSag) {
    const ReferenceSpec ref;
    GridSource g;
    for (int k = 0; k < 200; ++k) {
        const double t = k * 1e-4;
        const auto v = ref.at(t);
        const auto r = injection_reference(v, grid_emf(t, g, 0.7));
        for (std::size_t ph = 0; ph < 3; ++ph) {
            EXPECT_NEAR(r[ph], 0.3 * v[ph], 1e-9 * ref.peak());
        }
    }
}

TEST(ReferenceSpec, MatchesGrid) {
    GridSource g;
    const auto ref = ReferenceSpec::from_grid(g);
    EXPECT_NEAR(ref.rms, 11000.0 / std::numbers::sqrt3, 1e-9);
    for (int k = 0; k < 50; ++k) {
        const auto a = ref.at(k * 3e-4);
        const auto b = grid_emf(k * 3e-4, g);
        for (std::size_t ph = 0; ph < 3; ++ph) {
            EXPECT_NEAR(a[ph], b[ph], 1e-9);
        }
    }
    ReferenceSpec bad;
    bad.rms = 0.0;
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(SlidingRms, Constant) {
    const auto s = sample_function("c", "V", 0.0, 1e-4, 1000, [](double) { return 5.0; });
    const auto r = sliding_rms(s, 0.02);
    EXPECT_EQ(r.warmup_samples, 199U);
    EXPECT_TRUE(r.is_warmup(0));
    EXPECT_FALSE(r.is_warmup(199));
    for (std::size_t k = 0; k < s.size(); ++k) {
        EXPECT_NEAR(r.rms.values[k], 5.0, 1e-12);
    }
}

TEST(SlidingRms, Sine) {
    const double A = 8981.0;
    const auto s = sample_function("s", "V", 0.0, 1e-5, 20000,
                                   [A](double t) { return A * std::sin(2.0 * std::numbers::pi * 50.0 * t); });
    const auto r = sliding_rms(s, 0.02);
    for (std::size_t k = r.warmup_samples; k < s.size(); ++k) {
        EXPECT_NEAR(r.rms.values[k], A / std::numbers::sqrt2, 1e-3 * A / std::numbers::sqrt2);
    }
}

TEST(SlidingRms, AmplitudeStepSettlesWithinOneWindow) {
    const double A = 10.0;
    const auto s = sample_function("s", "V", 0.0, 1e-5, 20000, [A](double t) {
        return (t < 0.1 ? A : 0.7 * A) * std::sin(2.0 * std::numbers::pi * 50.0 * t);
    });
    const auto r = sliding_rms(s, 0.02);
    const double hi = A / std::numbers::sqrt2;
    const double lo = 0.7 * A / std::numbers::sqrt2;
    for (std::size_t k = r.warmup_samples; k < s.size(); ++k) {
        const double t = s.time(k);
        EXPECT_LE(r.rms.values[k], hi * (1.0 + 1e-3));
        EXPECT_GE(r.rms.values[k], lo * (1.0 - 1e-3));
        if (t >= 0.12 + 1e-9) {
            EXPECT_NEAR(r.rms.values[k], lo, 1e-3 * lo) << t;
        }
    }
    const auto rec = recovery_time(r, lo, 0.1, 0.2, 0.01);
    ASSERT_TRUE(rec.has_value());
    EXPECT_LE(*rec, 0.02 + 1e-9);
}

TEST(SlidingRms, TooShortWindow) {
    const auto s = sample_function("c", "V", 0.0, 1e-3, 10, [](double) { return 1.0; });
    EXPECT_THROW(sliding_rms(s, 1e-3), ConfigError);
    EXPECT_THROW(SlidingRms(1), ConfigError);
}

TEST(SlidingRms, LongRunStaysAccurate) {
    SlidingRms acc(1000);
    double last = 0.0;
    for (int k = 0; k < 2000000; ++k) {
        last = acc.push(k % 2 == 0 ? 1e6 : 1e-3);
    }
    EXPECT_NEAR(last, std::sqrt((1e12 + 1e-6) / 2.0), 1e-6);
}

TEST(RecoveryTime, NeverSettles) {
    const auto s = sample_function("c", "V", 0.0, 1e-3, 100, [](double) { return 2.0; });
    const auto r = sliding_rms(s, 0.01);
    EXPECT_FALSE(recovery_time(r, 1.0, 0.02, 0.08, 0.02).has_value());
    const auto ok = recovery_time(r, 2.0, 0.02, 0.08, 0.02);
    ASSERT_TRUE(ok.has_value());
    EXPECT_EQ(*ok, 0.0);
}
