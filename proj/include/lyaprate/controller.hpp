#pragma once

#include <concepts>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "models.hpp"
#include "types.hpp"

namespace lyaprate {

/// Anything that maps a rate to a scalar: a utility S(f) or an expected
/// per-slot arrival count E[lambda(f)].
template <typename F>
concept RateFunction = std::regular_invocable<const F&, Rate> &&
                       std::convertible_to<std::invoke_result_t<const F&, Rate>, double>;

namespace detail {

inline void check_backlog(double q) {
    if (!(q >= 0.0)) {
        throw std::invalid_argument("backlog must be non-negative");
    }
}

}  // namespace detail

/// Drift-plus-penalty score V * S(f) - Q * E[lambda(f)].
template <RateFunction Utility, RateFunction Arrivals>
double objective(Rate f, double q, TradeoffV v, const RateSet& rates, const Utility& utility,
                 const Arrivals& expected) {
    if (!rates.contains(f)) {
        std::ostringstream os;
        os << "rate " << f << " is not in the candidate set";
        throw std::invalid_argument(os.str());
    }
    detail::check_backlog(q);
    return v.value() * static_cast<double>(utility(f)) - q * static_cast<double>(expected(f));
}

inline double objective(Rate f, double q, TradeoffV v, const RateSet& rates, const UtilityModel& utility,
                        const ArrivalModel& arrival) {
    return objective(f, q, v, rates, utility, [&arrival](Rate r) { return arrival.expected(r); });
}

/**
 * Picks the rate maximizing the drift-plus-penalty score for the observed
 * backlog `q`.
 *
 * Candidates are scanned in ascending order and a candidate replaces the
 * incumbent when its score is >= the best so far, so ties resolve to the
 * highest rate. Comparison is exact.
 */
template <RateFunction Utility, RateFunction Arrivals>
Rate select_rate(double q, TradeoffV v, const RateSet& rates, const Utility& utility, const Arrivals& expected) {
    detail::check_backlog(q);
    double best = -std::numeric_limits<double>::infinity();
    Rate chosen = rates.min();
    for (Rate f : rates) {
        const double score = v.value() * static_cast<double>(utility(f)) - q * static_cast<double>(expected(f));
        if (score >= best) {
            best = score;
            chosen = f;
        }
    }
    return chosen;
}

inline Rate select_rate(double q, TradeoffV v, const RateSet& rates, const UtilityModel& utility,
                        const ArrivalModel& arrival) {
    return select_rate(q, v, rates, utility, [&arrival](Rate r) { return arrival.expected(r); });
}

}  // namespace lyaprate
