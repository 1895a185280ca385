#pragma once

#include <cstdint>
#include <future>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "controller.hpp"
#include "models.hpp"
#include "queue.hpp"
#include "random.hpp"
#include "types.hpp"

namespace lyaprate {

struct LyapunovPolicy {
    TradeoffV v{0.0};
    friend bool operator==(const LyapunovPolicy&, const LyapunovPolicy&) = default;
};

struct FixedPolicy {
    Rate rate = 1.0;
    friend bool operator==(const FixedPolicy&, const FixedPolicy&) = default;
};

using Policy = std::variant<LyapunovPolicy, FixedPolicy>;

struct SimConfig {
    std::int64_t horizon = 10'000;
    RateSet rates = RateSet::integers(10);
    Policy policy = LyapunovPolicy{TradeoffV{50.0}};
    ArrivalModel arrival{};
    ServiceModel service = ServiceModel::poisson(9.5);
    UtilityModel utility = UtilityModel::linear(10.0);
    std::optional<Frames> capacity = 1000;  // nullopt: unbounded
    Frames initial_backlog = 0;
    std::uint64_t seed = 1;

    void validate() const {
        if (horizon < 1) {
            throw std::invalid_argument("horizon must be at least 1 slot");
        }
        if (capacity && *capacity < 1) {
            throw std::invalid_argument("capacity must be at least 1");
        }
        if (initial_backlog < 0 || (capacity && initial_backlog > *capacity)) {
            throw std::invalid_argument("initial backlog must lie in [0, capacity]");
        }
        if (const auto* fixed = std::get_if<FixedPolicy>(&policy); fixed && !rates.contains(fixed->rate)) {
            std::ostringstream os;
            os << "fixed rate " << fixed->rate << " is not in the rate set";
            throw std::invalid_argument(os.str());
        }
        arrival.validate_for(rates);
        utility.validate_for(rates);
    }

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

/// State of one slot. `backlog` is the queue length after the slot's
/// departures and arrivals; `served` is the offered service mu(t) and
/// `departed` the frames that actually left.
struct SlotRecord {
    std::int64_t t = 0;
    Rate f_selected = 0.0;
    Frames arrived = 0;
    Frames served = 0;
    Frames departed = 0;
    Frames backlog = 0;
    double utility_value = 0.0;
    Frames dropped = 0;

    friend bool operator==(const SlotRecord&, const SlotRecord&) = default;
};

struct RunSummary {
    double avg_backlog = 0.0;
    double avg_utility = 0.0;
    std::int64_t overflow_events = 0;
    Frames total_dropped = 0;
    Frames final_backlog = 0;
    double drift_estimate = 0.0;  // backlog slope over the last half, frames/slot

    friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

struct RunResult {
    std::vector<SlotRecord> records;
    RunSummary summary;
};

/// Ordinary least-squares slope of backlog against t. Zero for fewer than
/// two points.
inline double backlog_slope(std::span<const SlotRecord> records) {
    const auto n = static_cast<double>(records.size());
    if (records.size() < 2) {
        return 0.0;
    }
    double mean_t = 0.0;
    double mean_q = 0.0;
    for (const auto& r : records) {
        mean_t += static_cast<double>(r.t);
        mean_q += static_cast<double>(r.backlog);
    }
    mean_t /= n;
    mean_q /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (const auto& r : records) {
        const double dt = static_cast<double>(r.t) - mean_t;
        sxy += dt * (static_cast<double>(r.backlog) - mean_q);
        sxx += dt * dt;
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

inline RunSummary summarize(std::span<const SlotRecord> records) {
    if (records.empty()) {
        throw std::invalid_argument("cannot summarize an empty run");
    }
    RunSummary s;
    for (const auto& r : records) {
        s.avg_backlog += static_cast<double>(r.backlog);
        s.avg_utility += r.utility_value;
        s.total_dropped += r.dropped;
        if (r.dropped > 0) {
            ++s.overflow_events;
        }
    }
    const auto n = static_cast<double>(records.size());
    s.avg_backlog /= n;
    s.avg_utility /= n;
    s.final_backlog = records.back().backlog;
    s.drift_estimate = backlog_slope(records.subspan(records.size() / 2));
    return s;
}

/// Backlog slope over the slots before the first drop, i.e. the growth
/// phase of a diverging queue. Whole run if nothing was dropped.
inline double presaturation_drift(std::span<const SlotRecord> records) {
    std::size_t end = 0;
    while (end < records.size() && records[end].dropped == 0) {
        ++end;
    }
    return backlog_slope(records.first(end));
}

inline double mean_backlog(std::span<const SlotRecord> records) {
    if (records.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (const auto& r : records) {
        sum += static_cast<double>(r.backlog);
    }
    return sum / static_cast<double>(records.size());
}

/// Mean backlog of the last quarter divided by that of the second quarter.
/// A run with no divergence trend stays at or below 2.
inline double quarter_stability_ratio(std::span<const SlotRecord> records) {
    const std::size_t quarter = records.size() / 4;
    const double second = mean_backlog(records.subspan(quarter, quarter));
    const double last = mean_backlog(records.subspan(records.size() - quarter));
    if (second == 0.0) {
        return last == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return last / second;
}

/**
 * Runs the slotted simulation. Each slot:
 *   observe Q(t), choose f, draw arrivals lambda(f), draw service mu(t),
 *   apply the queue update, record.
 * The Lyapunov policy scores candidates with expected arrivals; the queue
 * sees the realized draw. Output is a pure function of `config`.
 */
inline RunResult run(const SimConfig& config) {
    config.validate();
    Rng rng(config.seed);
    QueueState queue = QueueState::make(config.capacity, config.initial_backlog);

    RunResult result;
    result.records.reserve(static_cast<std::size_t>(config.horizon));
    for (std::int64_t t = 0; t < config.horizon; ++t) {
        const Frames observed = queue.backlog;
        const Rate f = std::visit(
            [&](const auto& p) -> Rate {
                using P = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<P, LyapunovPolicy>) {
                    return select_rate(static_cast<double>(observed), p.v, config.rates, config.utility,
                                       config.arrival);
                } else {
                    return p.rate;
                }
            },
            config.policy);

        const Frames arrived = config.arrival.count(f, rng);
        const Frames served = config.service.count(t, rng);
        const QueueState next = step(queue, served, arrived);

        result.records.push_back(SlotRecord{
            .t = t,
            .f_selected = f,
            .arrived = arrived,
            .served = served,
            .departed = next.total_served - queue.total_served,
            .backlog = next.backlog,
            .utility_value = config.utility(f),
            .dropped = next.total_dropped - queue.total_dropped,
        });
        queue = next;
    }
    result.summary = summarize(result.records);
    return result;
}

struct SweepPoint {
    double v = 0.0;
    RunResult result;
};

/// The config used for entry `index` of a V sweep: Lyapunov policy with the
/// given V and seed derive_seed(base.seed, index).
inline SimConfig sweep_config(const SimConfig& base, double v, std::size_t index) {
    SimConfig cfg = base;
    cfg.policy = LyapunovPolicy{TradeoffV{v}};
    cfg.seed = derive_seed(base.seed, index);
    return cfg;
}

/// One independent Lyapunov run per V, in input order. With `parallel` the
/// runs execute on separate threads; results are identical either way.
inline std::vector<SweepPoint> sweep_v(const SimConfig& base, std::span<const double> v_values,
                                       bool parallel = false) {
    if (v_values.empty()) {
        throw std::invalid_argument("V sweep needs at least one value");
    }
    std::vector<SimConfig> configs;
    configs.reserve(v_values.size());
    for (std::size_t i = 0; i < v_values.size(); ++i) {
        configs.push_back(sweep_config(base, v_values[i], i));
        configs.back().validate();
    }

    std::vector<SweepPoint> out(v_values.size());
    if (parallel) {
        std::vector<std::future<RunResult>> jobs;
        jobs.reserve(configs.size());
        for (const auto& cfg : configs) {
            jobs.push_back(std::async(std::launch::async, [&cfg] { return run(cfg); }));
        }
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            out[i] = SweepPoint{v_values[i], jobs[i].get()};
        }
    } else {
        for (std::size_t i = 0; i < configs.size(); ++i) {
            out[i] = SweepPoint{v_values[i], run(configs[i])};
        }
    }
    return out;
}

}  // namespace lyaprate
