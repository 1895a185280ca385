#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>

#include "types.hpp"

namespace lyaprate {

/// Work queue backlog with optional finite capacity and cumulative counters.
///
/// Invariant: total_arrived - total_departed - total_dropped
///            == backlog - initial_backlog
struct QueueState {
    Frames backlog = 0;
    std::optional<Frames> capacity;  // nullopt: unbounded
    Frames initial_backlog = 0;
    Frames total_arrived = 0;
    Frames total_served = 0;  // actual departures, min(mu, backlog) per slot
    Frames total_dropped = 0;
    std::int64_t overflow_events = 0;

    static QueueState make(std::optional<Frames> capacity, Frames initial_backlog = 0) {
        if (capacity && *capacity < 1) {
            throw std::invalid_argument("queue capacity must be at least 1");
        }
        if (initial_backlog < 0 || (capacity && initial_backlog > *capacity)) {
            throw std::invalid_argument("initial backlog must lie in [0, capacity]");
        }
        QueueState s;
        s.backlog = initial_backlog;
        s.capacity = capacity;
        s.initial_backlog = initial_backlog;
        return s;
    }

    friend bool operator==(const QueueState&, const QueueState&) = default;
};

/// One slot of Q' = min(C, max(Q - mu, 0) + lambda). Departures happen
/// before arrivals; arrivals beyond capacity are dropped and the slot counts
/// as one overflow event.
[[nodiscard]] inline QueueState step(QueueState state, Frames served, Frames arrived) {
    if (served < 0 || arrived < 0) {
        throw std::invalid_argument("served and arrived must be non-negative");
    }
    const Frames departed = std::min(served, state.backlog);
    Frames next = state.backlog - departed + arrived;
    Frames dropped = 0;
    if (state.capacity && next > *state.capacity) {
        dropped = next - *state.capacity;
        next = *state.capacity;
    }
    state.backlog = next;
    state.total_arrived += arrived;
    state.total_served += departed;
    state.total_dropped += dropped;
    if (dropped > 0) {
        ++state.overflow_events;
    }
    return state;
}

[[nodiscard]] inline bool is_overflowed(const QueueState& state) noexcept { return state.overflow_events > 0; }

}  // namespace lyaprate
