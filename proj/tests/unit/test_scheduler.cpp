#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "ranslice/scheduler.hpp"

using namespace ranslice;

namespace {

class FixedLink : public LinkModel {
public:
    explicit FixedLink(std::map<int, std::int64_t> bits) : bits_(std::move(bits)) {}
    RbgLink rbg_link(int user, int, int) const override {
        RbgLink l;
        l.bits = bits_.at(user);
        l.mod_order = 4;
        l.sinr = 5.0;
        l.shannon_rate_bps = 1e6;
        return l;
    }

private:
    std::map<int, std::int64_t> bits_;
};

Packet packet(int owner, std::int64_t bits, std::int64_t arrival_ns) {
    Packet p;
    p.owner = owner;
    p.size_bits = bits;
    p.remaining_bits = bits;
    p.arrival_ns = arrival_ns;
    return p;
}

// Written out independently of PriorityKey: late packets first, then the
// smaller |tau - d|, then the lower user id.
bool oracle_before(const HeadOfLine& a, const HeadOfLine& b, double tau) {
    const bool a_late = a.delay_s >= tau, b_late = b.delay_s >= tau;
    if (a_late != b_late) return a_late;
    const double da = std::abs(tau - a.delay_s), db = std::abs(tau - b.delay_s);
    if (da != db) return da < db;
    return a.user < b.user;
}

std::vector<int> exhaustive_order(std::vector<HeadOfLine> heads, double tau) {
    std::vector<std::size_t> perm(heads.size());
    std::iota(perm.begin(), perm.end(), 0);
    do {
        bool sorted = true;
        for (std::size_t i = 0; i + 1 < perm.size() && sorted; ++i) {
            sorted = oracle_before(heads[perm[i]], heads[perm[i + 1]], tau);
        }
        if (sorted) {
            std::vector<int> out;
            for (auto i : perm) out.push_back(heads[i].user);
            return out;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return {};
}

}  // namespace

TEST_SUITE("scheduler") {

TEST_CASE("modulation order map") {
    const std::array<double, 3> t{2.0, 15.0, 80.0};
    CHECK(modulation_order(0.0, t) == 2);
    CHECK(modulation_order(1.99, t) == 2);
    CHECK(modulation_order(2.0, t) == 4);
    CHECK(modulation_order(15.0, t) == 6);
    CHECK(modulation_order(80.0, t) == 8);
    CHECK(modulation_order(1e6, t) == 8);
}

TEST_CASE("threshold priority examples") {
    SUBCASE("closer to the threshold goes first") {
        const std::vector<HeadOfLine> heads{{0, 1.0e-3}, {1, 1.8e-3}};
        CHECK(priority_order(heads, 2e-3) == std::vector<int>{1, 0});
    }
    SUBCASE("packets past the threshold go first") {
        const std::vector<HeadOfLine> heads{{0, 1.7e-3}, {1, 2.5e-3}};
        CHECK(priority_order(heads, 2e-3) == std::vector<int>{1, 0});
    }
    SUBCASE("ties go to the lower user") {
        const std::vector<HeadOfLine> heads{{4, 1e-3}, {2, 1e-3}};
        CHECK(priority_order(heads, 2e-3) == std::vector<int>{2, 4});
    }
    SUBCASE("a packet exactly at the threshold counts as late") {
        CHECK(priority_key(2e-3, 2e-3, 0) < priority_key(2e-3, 1.99e-3, 0));
    }
}

TEST_CASE("threshold changes the order") {
    const std::vector<HeadOfLine> heads{{0, 1e-3}, {1, 5e-3}};
    CHECK(priority_order(heads, 8e-3) == std::vector<int>{1, 0});
    CHECK(priority_order(heads, 1.5e-3) == std::vector<int>{1, 0});
    CHECK(priority_order(heads, 0.5e-3) == std::vector<int>{0, 1});
    const std::vector<HeadOfLine> fresh{{0, 1e-3}, {1, 3e-3}};
    CHECK(priority_order(fresh, 6e-3) == std::vector<int>{1, 0});
    CHECK(priority_order(fresh, 0.8e-3) == std::vector<int>{0, 1});
}

TEST_CASE("priority order matches an exhaustive sort") {
    Rng rng(123);
    for (int trial = 0; trial < 1000; ++trial) {
        const double tau = rng.uniform(0.5e-3, 10e-3);
        std::vector<HeadOfLine> heads;
        for (int u = 0; u < 5; ++u) {
            // Coarse delays make ties and at-threshold cases common.
            const double d = (trial % 2 == 0) ? 0.5e-3 * static_cast<double>(rng.uniform_index(12)) : rng.uniform(0, 12e-3);
            heads.push_back({u * 3 + static_cast<int>(rng.uniform_index(3)), d});
        }
        CHECK(priority_order(heads, tau) == exhaustive_order(heads, tau));
    }
}

TEST_CASE("schedule follows the priority order") {
    Rng rng(7);
    const ResourceGrid grid;
    for (int trial = 0; trial < 1000; ++trial) {
        const double tau = rng.uniform(0.5e-3, 10e-3);
        const std::int64_t now = 20000000;
        std::vector<UserBuffer> buffers(5);
        std::vector<SliceUserView> views;
        std::vector<HeadOfLine> heads;
        std::map<int, std::int64_t> bits;
        for (int u = 0; u < 5; ++u) {
            const auto age = static_cast<std::int64_t>(rng.uniform_index(12)) * 500000;
            buffers[u].push(packet(u, 100 + static_cast<std::int64_t>(rng.uniform_index(5000)), now - age));
            views.push_back({u, 0, &buffers[u]});
            heads.push_back({u, static_cast<double>(age) * 1e-9});
            bits[u] = 500 + static_cast<std::int64_t>(rng.uniform_index(3000));
        }
        const FixedLink link(bits);
        const ScheduleRequest req{SliceId::E, tau, 14, 0, 1, now};
        const auto grants = schedule_slice(req, views, link, grid);
        std::vector<int> served;
        for (const auto& g : grants) {
            if (served.empty() || served.back() != g.user) served.push_back(g.user);
        }
        const auto expected = exhaustive_order(heads, tau);
        // Users are served in order until the budget runs out.
        REQUIRE(served.size() <= expected.size());
        for (std::size_t i = 0; i < served.size(); ++i) CHECK(served[i] == expected[i]);
    }
}

TEST_CASE("head packet is covered RBG by RBG") {
    const ResourceGrid grid;
    UserBuffer a, b;
    a.push(packet(0, 2500, 0));
    b.push(packet(1, 100, 0));
    const std::vector<SliceUserView> views{{0, 0, &a}, {1, 0, &b}};
    const FixedLink link({{0, 1000}, {1, 1000}});
    const ScheduleRequest req{SliceId::U, 2e-3, 5, 5, 1, 1000000};
    const auto grants = schedule_slice(req, views, link, grid);
    REQUIRE(grants.size() == 4);
    CHECK(grants[0].user == 0);
    CHECK(grants[2].user == 0);
    CHECK(grants[3].user == 1);
    for (std::size_t i = 0; i < grants.size(); ++i) {
        CHECK(grants[i].first_rb == static_cast<int>(5 + i) * 6);
        CHECK(grants[i].rbs == 6);
        CHECK(grants[i].layers == 1);
    }
}

TEST_CASE("leftover payload carries to the next packet") {
    const ResourceGrid grid;
    UserBuffer a;
    a.push(packet(0, 400, 0));
    a.push(packet(0, 400, 0));
    const std::vector<SliceUserView> views{{0, 0, &a}};
    const FixedLink link(std::map<int, std::int64_t>{{0, 1000}});
    const auto grants = schedule_slice({SliceId::M, 5e-3, 4, 10, 1, 0}, views, link, grid);
    CHECK(grants.size() == 1);
}

TEST_CASE("exhausted budget stops the slice") {
    const ResourceGrid grid;
    UserBuffer a;
    a.push(packet(0, 100000, 0));
    const std::vector<SliceUserView> views{{0, 0, &a}};
    const FixedLink link(std::map<int, std::int64_t>{{0, 1000}});
    CHECK(schedule_slice({SliceId::E, 5e-3, 3, 0, 1, 0}, views, link, grid).size() == 3);
    CHECK(schedule_slice({SliceId::E, 5e-3, 0, 0, 1, 0}, views, link, grid).empty());
    UserBuffer empty;
    const std::vector<SliceUserView> idle{{0, 0, &empty}};
    CHECK(schedule_slice({SliceId::E, 5e-3, 3, 0, 1, 0}, idle, link, grid).empty());
}

TEST_CASE("budgets hold per ORU on random instances") {
    Rng rng(99);
    const ResourceGrid grid;
    for (int trial = 0; trial < 1000; ++trial) {
        const int orus = 1 + static_cast<int>(rng.uniform_index(3));
        const int budget = static_cast<int>(rng.uniform_index(15));
        const int first = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(15 - budget)));
        const int users = 1 + static_cast<int>(rng.uniform_index(6));
        std::vector<UserBuffer> buffers(static_cast<std::size_t>(users));
        std::vector<SliceUserView> views;
        std::map<int, std::int64_t> bits;
        for (int u = 0; u < users; ++u) {
            const int n = static_cast<int>(rng.uniform_index(5));
            for (int i = 0; i < n; ++i) buffers[u].push(packet(u, 1 + static_cast<std::int64_t>(rng.uniform_index(20000)), 0));
            views.push_back({u, static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(orus))), &buffers[u]});
            bits[u] = 100 + static_cast<std::int64_t>(rng.uniform_index(9000));
        }
        const FixedLink link(bits);
        const auto grants = schedule_slice({SliceId::E, 3e-3, budget, first, orus, 5000000}, views, link, grid);
        std::vector<int> per_oru(static_cast<std::size_t>(orus), 0);
        std::set<std::pair<int, int>> used;
        for (const auto& g : grants) {
            per_oru[static_cast<std::size_t>(g.oru)] += 1;
            CHECK(g.first_rb >= first * 6);
            CHECK(g.first_rb + g.rbs <= (first + budget) * 6);
            CHECK(used.insert({g.oru, g.first_rb}).second);
            CHECK(g.oru == views[static_cast<std::size_t>(g.user)].oru);
        }
        for (int n : per_oru) CHECK(n <= budget);
        std::vector<std::int64_t> granted(static_cast<std::size_t>(users), 0);
        for (const auto& g : grants) granted[static_cast<std::size_t>(g.user)] += g.bits;
        // Nothing left unserved while its ORU still had room.
        for (int u = 0; u < users; ++u) {
            if (per_oru[static_cast<std::size_t>(views[u].oru)] < budget) CHECK(granted[u] >= buffers[u].buffer_bits());
        }
    }
}

TEST_CASE("channel link payload is the smaller of the two rate models") {
    ScenarioConfig cfg = make_default_scenario();
    ChannelState ch(cfg);
    RbUsage usage(3, 84);
    const ChannelLinkModel link(ch, usage, cfg.grid, cfg.channel.modulation_thresholds);
    const double noise = ch.noise_w();
    const double p = ch.rb_power_w(0);
    for (double target : {0.5, 3.0, 30.0, 1000.0}) {
        ch.set_gain(0, 0, target * noise / p);
        const RbgLink l = link.rbg_link(0, 0, 2);
        CHECK(l.sinr == doctest::Approx(target).epsilon(1e-9));
        const double shannon = 6 * 180e3 * std::log2(1.0 + target);
        CHECK(l.shannon_rate_bps == doctest::Approx(shannon).epsilon(1e-9));
        const int order = target < 2 ? 2 : target < 15 ? 4 : target < 80 ? 6 : 8;
        CHECK(l.mod_order == order);
        const auto expect = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(shannon * 1e-3)), order * 14 * 12 * 6);
        CHECK(l.bits == expect);
    }
}

TEST_CASE("link sees interference from active neighbours only") {
    ScenarioConfig cfg = make_default_scenario();
    ChannelState ch(cfg);
    RbUsage usage(3, 84);
    const ChannelLinkModel link(ch, usage, cfg.grid, cfg.channel.modulation_thresholds);
    const double quiet = link.rbg_link(0, 0, 1).sinr;
    for (int rb = 6; rb < 12; ++rb) usage.set(1, rb);
    CHECK(link.rbg_link(0, 0, 1).sinr < quiet);
    CHECK(link.rbg_link(0, 0, 3).sinr == doctest::Approx(quiet));
}

TEST_CASE("utilization") {
    const ResourceGrid grid;
    const std::vector<Grant> one{{0, 0, 0, 6, 4, 1, 0, 0, 0}};
    CHECK(utilization(one, grid) == 336.0);
    CHECK(utilization(std::vector<Grant>{}, grid) == 0.0);
    const std::vector<Grant> two{{0, 0, 0, 6, 2, 1, 0, 0, 0}, {1, 0, 6, 3, 6, 1, 0, 0, 0}};
    CHECK(utilization(two, grid) == 420.0);
    CHECK(utilization(two, grid) == utilization(std::span(two).first(1), grid) + utilization(std::span(two).last(1), grid));
}

TEST_CASE("window maxima and deviation") {
    const std::vector<double> h{100, 200, 300};
    const auto r = deviation_of(h);
    CHECK(r.mean == 200.0);
    CHECK(r.delta == doctest::Approx(0.5));
    CHECK(deviation_of(std::vector<double>{100, 100, 100}).delta == 0.0);
    CHECK(deviation_of(std::vector<double>{42}).delta == 0.0);
    const auto z = deviation_of(std::vector<double>{0, 0});
    CHECK(z.zero_mean);
    CHECK(z.delta == 0.0);

    UtilizationSeries series;
    double running = 0.0;
    for (double u : {50.0, 100.0, 20.0}) {
        series.record(u);
        CHECK(series.window_max() >= running);
        running = series.window_max();
    }
    CHECK(series.close_window().umax == 100.0);
    series.record(200.0);
    series.close_window();
    series.record(300.0);
    const auto last = series.close_window();
    CHECK(last.mean == 200.0);
    CHECK(last.delta == doctest::Approx(0.5));
    CHECK(series.windows() == 3);
}

TEST_CASE("expiration penalty") {
    const QosProfile qos{1e6, 2e-3};
    auto done = [](std::int64_t arrival, std::int64_t end) {
        Packet p = packet(0, 8, arrival);
        p.tx_start_ns = arrival;
        p.tx_end_ns = end;
        return p;
    };
    CHECK(expiration_penalty(std::vector<Packet>{done(0, 2500000)}, qos) == 1);
    CHECK(expiration_penalty(std::vector<Packet>{done(0, 2000000)}, qos) == 1);
    CHECK(expiration_penalty(std::vector<Packet>{done(0, 1000000), done(500000, 1500000)}, qos) == 0);
    CHECK(expiration_penalty(std::vector<Packet>{done(0, 1500000)}, qos, 0.5e-3) == 1);
    CHECK(expiration_penalty(std::vector<Packet>{}, qos) == 0);
}

}
