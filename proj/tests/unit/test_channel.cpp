#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "ranslice/channel.hpp"

using namespace ranslice;

namespace {

// Hand-evaluated at 2 GHz, d0 = 1 m: 20 log10(4 pi f / c), then + 35 log10(500).
constexpr double kPl0Db = 38.468383135162995;
constexpr double kPl500Db = 132.93233328692367;

ScenarioConfig small_scenario(int orus, int users, Rng& rng) {
    ScenarioConfig cfg = make_default_scenario();
    cfg.orus.clear();
    for (int m = 0; m < orus; ++m) cfg.orus.push_back({m, {rng.uniform(0, 500), rng.uniform(0, 433)}, rng.uniform(1, 10)});
    cfg.users.clear();
    for (int k = 0; k < users; ++k) {
        UserEquipment u;
        u.id = k;
        u.slice = kAllSlices[static_cast<std::size_t>(k % 3)];
        u.position = {rng.uniform(0, 500), rng.uniform(0, 433)};
        cfg.users.push_back(u);
    }
    return cfg;
}

}  // namespace

TEST_SUITE("channel") {

TEST_CASE("pathloss at the reference distance and per decade") {
    const ChannelConfig ch;
    CHECK(reference_pathloss_db(ch) == doctest::Approx(kPl0Db).epsilon(1e-12));
    CHECK(pathloss_db(1.0, ch) == doctest::Approx(kPl0Db).epsilon(1e-12));
    CHECK(pathloss_db(10.0, ch) - pathloss_db(1.0, ch) == doctest::Approx(35.0).epsilon(1e-12));
    CHECK(pathloss_db(500.0, ch) == doctest::Approx(kPl500Db).epsilon(1e-12));
    CHECK_THROWS_AS(pathloss_db(0.0, ch), NonPositiveDistance);
    CHECK_THROWS_AS(pathloss_db(-3.0, ch), NonPositiveDistance);
}

TEST_CASE("fading has unit power") {
    Rng rng(2024);
    const int n = 1000000;
    double power = 0.0, re_sq = 0.0, re_sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto h = sample_fading(rng);
        power += std::norm(h);
        re_sum += h.real();
        re_sq += h.real() * h.real();
    }
    CHECK(std::abs(power / n - 1.0) < 0.01);
    const double mean = re_sum / n;
    CHECK(std::abs(re_sq / n - mean * mean - 0.5) < 0.01);
}

TEST_CASE("fading replays under the same seed") {
    Rng a(5), b(5);
    for (int i = 0; i < 100; ++i) CHECK(sample_fading(a) == sample_fading(b));
}

TEST_CASE("rb rate") {
    CHECK(rb_rate(0.0, 180e3) == 0.0);
    CHECK(rb_rate(1.0, 180e3) == doctest::Approx(180e3));
    CHECK(rb_rate(3.0, 180e3) == doctest::Approx(360e3));
    double prev = -1.0;
    for (double g = 0.0; g < 1e4; g = g * 1.7 + 0.01) {
        CHECK(rb_rate(g, 180e3) >= prev);
        prev = rb_rate(g, 180e3);
    }
}

TEST_CASE("sinr arithmetic") {
    CHECK(sinr_from(1.0, 0.0, 1.0) == 1.0);
    CHECK(sinr_from(1.0, 1.0, 1.0) == 0.5);
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const double s = rng.uniform(0.1, 5), i1 = rng.uniform(0, 5), n = rng.uniform(0.01, 1);
        const double i2 = i1 + rng.uniform(0.001, 5);
        CHECK(sinr_from(s, i2, n) < sinr_from(s, i1, n));
        const double c = rng.uniform(0.1, 100);
        CHECK(sinr_from(s * c, i1 * c, n * c) == doctest::Approx(sinr_from(s, i1, n)).epsilon(1e-12));
    }
}

TEST_CASE("interference sum") {
    const std::vector<double> rx{0.5, 0.5, 0.5};
    const std::vector<std::uint8_t> none{1, 0, 0};
    const std::vector<std::uint8_t> all{1, 1, 1};
    CHECK(interference_sum(rx, none, 0) == 0.0);
    CHECK(interference_sum(rx, all, 0) == doctest::Approx(1.0));
}

TEST_CASE("noise over one resource block") {
    const ScenarioConfig cfg = make_default_scenario();
    CHECK(noise_per_rb_w(cfg.channel, cfg.grid) == doctest::Approx(5.692099788303088e-15).epsilon(1e-9));
}

TEST_CASE("interference matches an exhaustive sum") {
    Rng rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        const int orus = 1 + static_cast<int>(rng.uniform_index(4));
        const int users = 3 + static_cast<int>(rng.uniform_index(4));
        ScenarioConfig cfg = small_scenario(orus, users, rng);
        ChannelState ch(cfg);
        std::vector<UserMotion> motion;
        for (const auto& u : cfg.users) motion.push_back({u.position, 0.0, 0.0, 0.0});
        ch.update(motion, rng);
        RbUsage usage(orus, cfg.grid.total_rbs());
        for (int m = 0; m < orus; ++m) {
            for (int rb = 0; rb < cfg.grid.total_rbs(); ++rb) usage.set(m, rb, rng.uniform() < 0.5);
        }
        const int k = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(users)));
        const int serving = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(orus)));
        const int rb = static_cast<int>(rng.uniform_index(84));
        double expected = 0.0;
        for (int m = 0; m < orus; ++m) {
            if (m != serving && usage.active(m, rb)) expected += cfg.orus[m].tx_power_w / 84.0 * ch.gain(k, m);
        }
        CHECK(ch.interference(k, serving, rb, usage) == doctest::Approx(expected).epsilon(1e-12));
        if (orus == 1) CHECK(ch.interference(k, serving, rb, usage) == 0.0);
    }
}

TEST_CASE("equal power split over resource blocks") {
    const ScenarioConfig cfg = make_default_scenario();
    const ChannelState ch(cfg);
    for (int m = 0; m < ch.orus(); ++m) {
        CHECK(ch.rb_power_w(m) * cfg.grid.total_rbs() == doctest::Approx(cfg.orus[m].tx_power_w).epsilon(1e-14));
    }
    CHECK(ch.rb_power_w(0) == doctest::Approx(0.0751139695809754).epsilon(1e-12));
}

TEST_CASE("gain is fading power times linear pathloss") {
    const ScenarioConfig cfg = make_default_scenario();
    ChannelState ch(cfg);
    Rng rng(1);
    std::vector<UserMotion> motion;
    for (const auto& u : cfg.users) motion.push_back({u.position, 0.0, 1.0, 0.0});
    ch.update(motion, rng);
    for (int k = 0; k < ch.users(); ++k) {
        for (int m = 0; m < ch.orus(); ++m) {
            const double d = distance(cfg.users[k].position, cfg.orus[m].position);
            const double pl = kPl0Db + 35.0 * std::log10(d);
            CHECK(ch.pathloss_db(k, m) == doctest::Approx(pl).epsilon(1e-12));
            CHECK(ch.gain(k, m) == doctest::Approx(std::norm(ch.fading(k, m)) * std::pow(10.0, -pl / 10.0)).epsilon(1e-12));
        }
    }
}

TEST_CASE("best server") {
    ScenarioConfig cfg = make_default_scenario();
    SUBCASE("equidistant user goes to the lower index") {
        cfg.users[0].position = {250.0, 0.0};
        const ChannelState ch(cfg);
        CHECK(ch.best_servers()[0] == 0);
    }
    SUBCASE("user at an ORU") {
        cfg.users[0].position = cfg.orus[2].position;
        const ChannelState ch(cfg);
        CHECK(ch.best_servers()[0] == 2);
    }
    SUBCASE("random layouts match an argmin scan") {
        Rng rng(17);
        for (int trial = 0; trial < 1000; ++trial) {
            const int orus = 1 + static_cast<int>(rng.uniform_index(5));
            ScenarioConfig c = small_scenario(orus, 6, rng);
            const ChannelState ch(c);
            const auto best = ch.best_servers();
            for (int k = 0; k < 6; ++k) {
                int arg = 0;
                double lowest = std::numeric_limits<double>::infinity();
                for (int m = 0; m < orus; ++m) {
                    const double d = std::max(distance(c.users[k].position, c.orus[m].position), 1.0);
                    if (d < lowest) {
                        lowest = d;
                        arg = m;
                    }
                }
                CHECK(best[k] == arg);
            }
        }
    }
}

TEST_CASE("reassociation moves users to their best server") {
    ScenarioConfig cfg = make_default_scenario();
    for (auto& u : cfg.users) u.serving_oru = 0;
    const ChannelState ch(cfg);
    const auto best = ch.best_servers();
    int expected_moves = 0;
    for (int b : best) expected_moves += b != 0;
    CHECK(reassociate_users(cfg.users, ch) == expected_moves);
    for (std::size_t k = 0; k < cfg.users.size(); ++k) CHECK(cfg.users[k].serving_oru == best[k]);
    CHECK(reassociate_users(cfg.users, ch) == 0);
}

TEST_CASE("mobility kinematics") {
    const Region region{0, 100, 0, 100};
    Rng rng(1);
    SUBCASE("zero speed stays put") {
        MobilityState mob({{{10, 20}, 0.3, 0.0, 0.0}}, region, 1.0);
        for (int i = 0; i < 5000; ++i) mob.step(1e-3, rng);
        CHECK(mob.users()[0].position.x == 10.0);
        CHECK(mob.users()[0].position.y == 20.0);
    }
    SUBCASE("heading zero advances x") {
        MobilityState mob({{{10, 20}, 0.0, 1.0, 0.0}}, region, 1.0);
        mob.step(1e-3, rng);
        CHECK(mob.users()[0].position.x == doctest::Approx(10.001).epsilon(1e-12));
        CHECK(mob.users()[0].position.y == doctest::Approx(20.0));
    }
    SUBCASE("reflection at the boundary") {
        MobilityState mob({{{99.9995, 50}, 0.0, 1.0, 0.0}}, region, 1.0);
        mob.step(1e-3, rng);
        CHECK(mob.users()[0].position.x == doctest::Approx(99.9995).epsilon(1e-12));
        CHECK(std::cos(mob.users()[0].heading_rad) < 0.0);
    }
    SUBCASE("heading is redrawn after the hold interval") {
        MobilityState mob({{{50, 50}, 0.0, 1.0, 0.0}}, region, 0.01);
        for (int i = 0; i < 9; ++i) mob.step(1e-3, rng);
        CHECK(mob.users()[0].heading_rad == 0.0);
        mob.step(1e-3, rng);
        CHECK(mob.users()[0].heading_rad != 0.0);
    }
}

TEST_CASE("long walks stay inside the region") {
    const Region region{0, 50, 0, 30};
    Rng rng(42);
    std::vector<UserMotion> users;
    for (int i = 0; i < 8; ++i) users.push_back({{rng.uniform(0, 50), rng.uniform(0, 30)}, rng.uniform(0, 6.28), 20.0, 0.0});
    MobilityState mob(users, region, 0.5);
    for (int t = 0; t < 100000; ++t) {
        mob.step(1e-3, rng);
        if (t % 1000 == 0) {
            for (const auto& u : mob.users()) CHECK(region.contains(u.position));
        }
    }
    for (const auto& u : mob.users()) CHECK(region.contains(u.position));
}

}
