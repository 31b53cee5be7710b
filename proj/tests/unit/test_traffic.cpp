#include <doctest.h>

#include <deque>

#include "ranslice/rng.hpp"
#include "ranslice/traffic.hpp"

using namespace ranslice;

namespace {

Packet packet(int owner, std::int64_t bits, std::int64_t arrival_ns) {
    Packet p;
    p.owner = owner;
    p.size_bits = bits;
    p.remaining_bits = bits;
    p.arrival_ns = arrival_ns;
    return p;
}

// Straightforward reference: serve remaining bits head first.
struct ReferenceQueue {
    std::deque<std::int64_t> remaining;
    int drain(std::int64_t bits) {
        int done = 0;
        while (bits > 0 && !remaining.empty()) {
            if (bits >= remaining.front()) {
                bits -= remaining.front();
                remaining.pop_front();
                ++done;
            } else {
                remaining.front() -= bits;
                bits = 0;
            }
        }
        return done;
    }
};

}  // namespace

TEST_SUITE("traffic") {

TEST_CASE("arrivals over ten TTIs") {
    TrafficGenerator gen({{0.5e-3, 1024}, {1e-3, 480}, {0.5e-3, 32}}, 1e-3);
    std::vector<int> count(3, 0);
    std::vector<std::int64_t> bits(3, 0);
    for (int t = 0; t < 10; ++t) {
        for (const auto& p : gen.generate_arrivals(t)) {
            ++count[static_cast<std::size_t>(p.owner)];
            bits[static_cast<std::size_t>(p.owner)] += p.size_bits;
            CHECK(p.arrival_ns >= t * 1000000LL);
            CHECK(p.arrival_ns < (t + 1) * 1000000LL);
        }
    }
    CHECK(count[0] == 20);
    CHECK(bits[0] == 20 * 1024 * 8);
    CHECK(count[1] == 10);
    CHECK(bits[1] == 10 * 480 * 8);
    CHECK(count[2] == 20);
}

TEST_CASE("interval longer than the horizon") {
    TrafficGenerator gen({{1.0, 100}}, 1e-3);
    int n = 0;
    for (int t = 0; t < 500; ++t) {
        const auto arrivals = gen.generate_arrivals(t);
        if (t == 0) CHECK(arrivals.size() == 1);
        n += static_cast<int>(arrivals.size());
    }
    CHECK(n == 1);
}

TEST_CASE("offered rates equal size over interval") {
    CHECK(offered_rate_bps({0.5e-3, 1024}) == 16.384e6);
    CHECK(offered_rate_bps({1e-3, 480}) == 3.84e6);
    CHECK(offered_rate_bps({0.5e-3, 32}) == 0.512e6);
}

TEST_CASE("head delay") {
    UserBuffer buf;
    CHECK_THROWS_AS(buf.front(), EmptyBuffer);
    buf.push(packet(0, 100, 1000000));
    buf.push(packet(0, 100, 2500000));
    CHECK(buf.head_delay(1000000) == 0.0);
    CHECK(buf.head_delay(2800000) == doctest::Approx(1.8e-3));
    buf.drain(100, 3000000, 1000000);
    CHECK(buf.head_delay(3000000) == doctest::Approx(0.5e-3));
}

TEST_CASE("drain") {
    UserBuffer buf;
    buf.push(packet(0, 1000, 0));
    buf.push(packet(0, 1000, 0));
    SUBCASE("zero bits") {
        CHECK(buf.drain(0, 0, 1000000).empty());
        CHECK(buf.buffer_bits() == 2000);
    }
    SUBCASE("exactly the head") {
        const auto done = buf.drain(1000, 0, 1000000);
        CHECK(done.size() == 1);
        CHECK(buf.size() == 1);
        CHECK(buf.front().remaining_bits == 1000);
    }
    SUBCASE("one and a half packets") {
        const auto done = buf.drain(1500, 2000000, 1000000);
        REQUIRE(done.size() == 1);
        CHECK(*done[0].tx_start_ns == 2000000);
        CHECK(*done[0].tx_end_ns == 3000000);
        CHECK(buf.front().remaining_bits == 500);
        CHECK(buf.buffer_bits() == 500);
        const auto rest = buf.drain(500, 3000000, 1000000);
        REQUIRE(rest.size() == 1);
        CHECK(*rest[0].tx_start_ns == 2000000);
        CHECK(*rest[0].tx_end_ns == 4000000);
    }
}

TEST_CASE("transmission starts no earlier than arrival") {
    UserBuffer buf;
    buf.push(packet(0, 10, 500000));
    const auto done = buf.drain(10, 0, 1000000);
    REQUIRE(done.size() == 1);
    CHECK(*done[0].tx_start_ns == 500000);
    CHECK(done[0].sojourn_ns() == 500000);
}

TEST_CASE("random drains match the reference queue and conserve traffic") {
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        UserBuffer buf;
        ReferenceQueue ref;
        std::int64_t now = 0;
        std::int64_t last_arrival = -1;
        for (int step = 0; step < 50; ++step) {
            const int arrivals = static_cast<int>(rng.uniform_index(3));
            for (int a = 0; a < arrivals; ++a) {
                const auto bits = static_cast<std::int64_t>(1 + rng.uniform_index(2000));
                buf.push(packet(0, bits, now));
                ref.remaining.push_back(bits);
            }
            const auto grant = static_cast<std::int64_t>(rng.uniform_index(3000));
            const auto done = buf.drain(grant, now, 1000000);
            CHECK(static_cast<int>(done.size()) == ref.drain(grant));
            for (const auto& p : done) {
                CHECK(p.arrival_ns >= last_arrival);
                last_arrival = p.arrival_ns;
            }
            std::int64_t ref_bits = 0;
            for (auto b : ref.remaining) ref_bits += b;
            CHECK(buf.buffer_bits() == ref_bits);
            const auto& c = buf.counters();
            CHECK(c.arrived_packets == c.served_packets + static_cast<std::int64_t>(buf.size()));
            CHECK(c.arrived_bits == c.served_bits + buf.buffer_bits());
            now += 1000000;
        }
    }
}

TEST_CASE("long-run generator rate") {
    TrafficGenerator gen({{0.5e-3, 1024}, {1e-3, 480}, {0.5e-3, 32}}, 1e-3);
    std::vector<std::int64_t> bits(3, 0);
    const int ttis = 50000;
    for (int t = 0; t < ttis; ++t) {
        for (const auto& p : gen.generate_arrivals(t)) bits[static_cast<std::size_t>(p.owner)] += p.size_bits;
    }
    CHECK(bits[0] == 16384LL * ttis);
    CHECK(bits[1] == 3840LL * ttis);
    CHECK(bits[2] == 512LL * ttis);
}

}
