#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ranslice/domain.hpp"

namespace ranslice {

struct Packet {
    int owner = 0;
    std::int64_t size_bits = 0;
    std::int64_t remaining_bits = 0;
    // Times are kept in integer nanoseconds so delay comparisons at QoS
    // boundaries are exact.
    std::int64_t arrival_ns = 0;
    std::optional<std::int64_t> tx_start_ns;
    std::optional<std::int64_t> tx_end_ns;

    double arrival_s() const { return static_cast<double>(arrival_ns) * 1e-9; }
    // tx_end - arrival; requires a completed packet.
    std::int64_t sojourn_ns() const { return *tx_end_ns - arrival_ns; }
};

class EmptyBuffer : public std::logic_error {
public:
    EmptyBuffer() : std::logic_error("operation requires a non-empty buffer") {}
};

struct BufferCounters {
    std::int64_t arrived_packets = 0;
    std::int64_t arrived_bits = 0;
    std::int64_t served_packets = 0;
    std::int64_t served_bits = 0;
    std::int64_t expired_served = 0;
};

// FIFO downlink queue of one user. Packets may be served across several TTIs.
class UserBuffer {
public:
    void push(Packet p);

    bool empty() const { return queue_.empty(); }
    std::size_t size() const { return queue_.size(); }
    const Packet& front() const;
    const Packet& at(std::size_t i) const { return queue_.at(i); }
    std::int64_t buffer_bits() const { return buffer_bits_; }

    // Age of the head packet in seconds.
    double head_delay(std::int64_t now_ns) const;

    // Serves up to `bits` front-to-back; completed packets get
    // tx_end = now + tti. Unused capacity is lost.
    std::vector<Packet> drain(std::int64_t bits, std::int64_t now_ns, std::int64_t tti_ns);

    // Counts a completed packet whose delay reached the slice bound.
    void note_expired() { ++counters_.expired_served; }

    const BufferCounters& counters() const { return counters_; }

private:
    std::deque<Packet> queue_;
    std::int64_t buffer_bits_ = 0;
    BufferCounters counters_;
};

// Periodic deterministic arrivals: one packet per user at every multiple of
// the slice's arrival interval, starting at t = 0.
class TrafficGenerator {
public:
    TrafficGenerator(const ScenarioConfig& cfg);
    TrafficGenerator(std::vector<TrafficProfile> per_user, double tti_s);

    // Packets whose arrival time falls in [t * tti, (t + 1) * tti).
    std::vector<Packet> generate_arrivals(std::int64_t tti_index);

    int users() const { return static_cast<int>(users_.size()); }

private:
    struct Source {
        std::int64_t interval_ns;
        std::int64_t size_bits;
        std::int64_t next_index = 0;
    };
    std::vector<Source> users_;
    std::int64_t tti_ns_;
};

// Long-run generator rate, size / interval, evaluated on integer nanoseconds.
double offered_rate_bps(const TrafficProfile& p);

std::int64_t to_nanoseconds(double seconds);

}  // namespace ranslice
