#include "ranslice/traffic.hpp"

#include <algorithm>
#include <cmath>

namespace ranslice {

std::int64_t to_nanoseconds(double seconds) { return std::llround(seconds * 1e9); }

double offered_rate_bps(const TrafficProfile& p) {
    const std::int64_t bits = p.packet_size_bytes * 8;
    return static_cast<double>(bits) * 1e9 / static_cast<double>(to_nanoseconds(p.arrival_interval_s));
}

void UserBuffer::push(Packet p) {
    p.remaining_bits = p.size_bits;
    buffer_bits_ += p.remaining_bits;
    ++counters_.arrived_packets;
    counters_.arrived_bits += p.size_bits;
    queue_.push_back(std::move(p));
}

const Packet& UserBuffer::front() const {
    if (queue_.empty()) throw EmptyBuffer();
    return queue_.front();
}

double UserBuffer::head_delay(std::int64_t now_ns) const {
    return static_cast<double>(now_ns - front().arrival_ns) * 1e-9;
}

std::vector<Packet> UserBuffer::drain(std::int64_t bits, std::int64_t now_ns, std::int64_t tti_ns) {
    std::vector<Packet> done;
    while (bits > 0 && !queue_.empty()) {
        Packet& head = queue_.front();
        if (!head.tx_start_ns) head.tx_start_ns = std::max(now_ns, head.arrival_ns);
        const std::int64_t take = std::min(bits, head.remaining_bits);
        head.remaining_bits -= take;
        buffer_bits_ -= take;
        counters_.served_bits += take;
        bits -= take;
        if (head.remaining_bits == 0) {
            head.tx_end_ns = now_ns + tti_ns;
            ++counters_.served_packets;
            done.push_back(std::move(head));
            queue_.pop_front();
        }
    }
    return done;
}

TrafficGenerator::TrafficGenerator(const ScenarioConfig& cfg) : tti_ns_(to_nanoseconds(cfg.grid.tti_s)) {
    for (const auto& u : cfg.users) {
        const auto& t = cfg.slice(u.slice).traffic;
        users_.push_back({to_nanoseconds(t.arrival_interval_s), t.packet_size_bytes * 8});
    }
}

TrafficGenerator::TrafficGenerator(std::vector<TrafficProfile> per_user, double tti_s) : tti_ns_(to_nanoseconds(tti_s)) {
    for (const auto& t : per_user) users_.push_back({to_nanoseconds(t.arrival_interval_s), t.packet_size_bytes * 8});
}

std::vector<Packet> TrafficGenerator::generate_arrivals(std::int64_t tti_index) {
    std::vector<Packet> out;
    const std::int64_t window_end = (tti_index + 1) * tti_ns_;
    for (std::size_t k = 0; k < users_.size(); ++k) {
        auto& src = users_[k];
        while (src.next_index * src.interval_ns < window_end) {
            const std::int64_t t_ns = src.next_index * src.interval_ns;
            ++src.next_index;
            if (t_ns < tti_index * tti_ns_) continue;  // generator skipped ahead
            Packet p;
            p.owner = static_cast<int>(k);
            p.size_bits = src.size_bits;
            p.remaining_bits = src.size_bits;
            p.arrival_ns = t_ns;
            out.push_back(p);
        }
    }
    return out;
}

}  // namespace ranslice
