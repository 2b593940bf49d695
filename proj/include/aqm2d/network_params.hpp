#pragma once

#include <stdexcept>
#include <string>

namespace aqm2d {

// Traffic regime of the TCP sources sharing the bottleneck.
// A: every session is below the slow-start threshold (slow start / fast
//    recovery). B: every session is at or above it (congestion avoidance).
enum class Scenario { A, B };

// Router feedback mode: marking (ECN on) or dropping (ECN off). The queue
// rate balance carries a (1 - p) factor only when packets are dropped.
enum class Ecn { On, Off };

struct NetworkParams {
    double n_flows = 1.0;      // N, number of TCP sessions
    double lambda = 1.0;       // window distribution parameter, 1 <= lambda <= N
    double capacity = 1.0;     // C, bottleneck rate in packets/s
    double t_prop = 0.0;       // Tp, propagation delay in s
    double q_ref = 0.0;        // AQM queue reference in packets
    Scenario scenario = Scenario::A;
    Ecn ecn = Ecn::Off;
    double packet_bits = 1000.0;  // only used to convert a capacity given in bit/s

    void validate() const {
        if (n_flows < 1.0)
            throw std::invalid_argument("n_flows must be >= 1");
        if (lambda < 1.0 || lambda > n_flows)
            throw std::invalid_argument("lambda must satisfy 1 <= lambda <= n_flows");
        if (!(capacity > 0.0))
            throw std::invalid_argument("capacity must be positive");
        if (t_prop < 0.0)
            throw std::invalid_argument("t_prop must be nonnegative");
        if (q_ref < 0.0)
            throw std::invalid_argument("q_ref must be nonnegative");
        if (!(packet_bits > 0.0))
            throw std::invalid_argument("packet_bits must be positive");
    }
};

// Round trip time seen by a flow whose packets meet `queue` packets ahead of
// them: queueing delay plus propagation delay.
inline double round_trip_time(double queue, const NetworkParams& p) {
    return queue / p.capacity + p.t_prop;
}

inline std::string to_string(Scenario s) { return s == Scenario::A ? "A" : "B"; }
inline std::string to_string(Ecn e) { return e == Ecn::On ? "on" : "off"; }

}  // namespace aqm2d
