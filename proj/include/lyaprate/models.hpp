#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "random.hpp"
#include "types.hpp"

namespace lyaprate {

class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Arrivals: lambda(f) frames per slot.
// ---------------------------------------------------------------------------

enum class ArrivalKind { deterministic, poisson };

class ArrivalModel {
public:
    explicit ArrivalModel(ArrivalKind kind = ArrivalKind::deterministic, double slot_duration = 1.0)
        : kind_(kind), slot_duration_(slot_duration) {
        if (!std::isfinite(slot_duration) || slot_duration <= 0.0) {
            throw ModelError("slot duration must be finite and positive");
        }
    }

    [[nodiscard]] ArrivalKind kind() const noexcept { return kind_; }
    [[nodiscard]] double slot_duration() const noexcept { return slot_duration_; }

    /// f * slot_duration.
    [[nodiscard]] double expected(Rate f) const {
        if (!(f > 0.0)) {
            throw ModelError("rate must be positive");
        }
        return f * slot_duration_;
    }

    /// Deterministic arrivals need f * slot_duration to be a whole number of
    /// frames for every candidate rate.
    void validate_for(const RateSet& rates) const {
        if (kind_ != ArrivalKind::deterministic) {
            return;
        }
        for (Rate f : rates) {
            if (!integral(expected(f))) {
                std::ostringstream os;
                os << "deterministic arrivals: rate " << f << " x slot " << slot_duration_
                   << " is not a whole number of frames";
                throw ModelError(os.str());
            }
        }
    }

    [[nodiscard]] Frames count(Rate f, Rng& rng) const {
        const double mean = expected(f);
        switch (kind_) {
            case ArrivalKind::deterministic:
                if (!integral(mean)) {
                    throw ModelError("deterministic arrivals require an integer count per slot");
                }
                return static_cast<Frames>(std::llround(mean));
            case ArrivalKind::poisson:
                return poisson(mean, rng);
        }
        return 0;
    }

    friend bool operator==(const ArrivalModel&, const ArrivalModel&) = default;

private:
    static bool integral(double x) noexcept {
        return std::abs(x - std::round(x)) <= 1e-9 * std::max(1.0, std::abs(x));
    }

    ArrivalKind kind_;
    double slot_duration_;
};

inline Frames arrival_count(const ArrivalModel& model, Rate f, Rng& rng) { return model.count(f, rng); }

inline double expected_arrivals(const ArrivalModel& model, Rate f) { return model.expected(f); }

// ---------------------------------------------------------------------------
// Service: mu(t) frames per slot.
// ---------------------------------------------------------------------------

enum class ServiceKind { deterministic, poisson, trace };

class ServiceModel {
public:
    static ServiceModel deterministic(double mean) {
        if (!(mean > 0.0) || std::round(mean) != mean) {
            throw ModelError("deterministic service mean must be a positive integer");
        }
        return ServiceModel(ServiceKind::deterministic, mean, {});
    }

    static ServiceModel poisson(double mean) {
        if (!(mean > 0.0) || !std::isfinite(mean)) {
            throw ModelError("poisson service mean must be finite and positive");
        }
        return ServiceModel(ServiceKind::poisson, mean, {});
    }

    /// Per-slot capacities; slot t uses trace[t mod size].
    static ServiceModel from_trace(std::vector<Frames> trace) {
        if (trace.empty()) {
            throw ModelError("service trace must not be empty");
        }
        for (Frames mu : trace) {
            if (mu < 0) {
                throw ModelError("service trace entries must be non-negative");
            }
        }
        return ServiceModel(ServiceKind::trace, 0.0, std::move(trace));
    }

    [[nodiscard]] ServiceKind kind() const noexcept { return kind_; }
    [[nodiscard]] double mean() const noexcept { return mean_; }
    [[nodiscard]] const std::vector<Frames>& trace() const noexcept { return trace_; }

    [[nodiscard]] Frames count(std::int64_t t, Rng& rng) const {
        if (t < 0) {
            throw ModelError("slot index must be non-negative");
        }
        switch (kind_) {
            case ServiceKind::deterministic:
                return static_cast<Frames>(mean_);
            case ServiceKind::poisson:
                return lyaprate::poisson(mean_, rng);
            case ServiceKind::trace:
                return trace_[static_cast<std::size_t>(t) % trace_.size()];
        }
        return 0;
    }

    friend bool operator==(const ServiceModel&, const ServiceModel&) = default;

private:
    ServiceModel(ServiceKind kind, double mean, std::vector<Frames> trace)
        : kind_(kind), mean_(mean), trace_(std::move(trace)) {}

    ServiceKind kind_;
    double mean_;
    std::vector<Frames> trace_;
};

inline Frames service_count(const ServiceModel& model, std::int64_t t, Rng& rng) { return model.count(t, rng); }

// ---------------------------------------------------------------------------
// Utility: S(f) in [0, 1].
// ---------------------------------------------------------------------------

enum class UtilityKind { linear, log, trace_empirical };

/// Faces identified (alpha) out of faces that appeared (beta) at one rate.
struct FaceCounts {
    std::int64_t alpha = 0;
    std::int64_t beta = 0;

    friend bool operator==(const FaceCounts&, const FaceCounts&) = default;
};

using UtilityTable = std::map<Rate, FaceCounts>;

class UtilityModel {
public:
    /// S(f) = f / f_max
    static UtilityModel linear(double f_max) { return UtilityModel(UtilityKind::linear, check_fmax(f_max), {}); }

    /// S(f) = ln(1 + f) / ln(1 + f_max)
    static UtilityModel log(double f_max) { return UtilityModel(UtilityKind::log, check_fmax(f_max), {}); }

    /// S(f) = alpha(f) / beta(f), from a measured table.
    static UtilityModel trace_empirical(UtilityTable table) {
        for (const auto& [f, counts] : table) {
            if (!(f > 0.0)) {
                throw ModelError("utility table rates must be positive");
            }
            if (counts.alpha < 0 || counts.beta < 0 || counts.alpha > counts.beta) {
                throw ModelError("utility table requires 0 <= alpha <= beta");
            }
        }
        return UtilityModel(UtilityKind::trace_empirical, 0.0, std::move(table));
    }

    [[nodiscard]] UtilityKind kind() const noexcept { return kind_; }
    [[nodiscard]] double f_max() const noexcept { return f_max_; }
    [[nodiscard]] const UtilityTable& table() const noexcept { return table_; }

    [[nodiscard]] double operator()(Rate f) const {
        switch (kind_) {
            case UtilityKind::linear:
                return f / f_max_;
            case UtilityKind::log:
                return std::log1p(f) / std::log1p(f_max_);
            case UtilityKind::trace_empirical: {
                const auto it = table_.find(f);
                if (it == table_.end()) {
                    std::ostringstream os;
                    os << "utility table has no entry for rate " << f;
                    throw ModelError(os.str());
                }
                if (it->second.beta == 0) {
                    std::ostringstream os;
                    os << "utility undefined at rate " << f << ": beta = 0";
                    throw ModelError(os.str());
                }
                return static_cast<double>(it->second.alpha) / static_cast<double>(it->second.beta);
            }
        }
        return 0.0;
    }

    /// Every candidate rate must map into [0, 1].
    void validate_for(const RateSet& rates) const {
        for (Rate f : rates) {
            if (kind_ != UtilityKind::trace_empirical && f > f_max_) {
                std::ostringstream os;
                os << "rate " << f << " exceeds utility f_max " << f_max_;
                throw ModelError(os.str());
            }
            (void)(*this)(f);
        }
    }

    friend bool operator==(const UtilityModel&, const UtilityModel&) = default;

private:
    UtilityModel(UtilityKind kind, double f_max, UtilityTable table)
        : kind_(kind), f_max_(f_max), table_(std::move(table)) {}

    static double check_fmax(double f_max) {
        if (!(f_max > 0.0) || !std::isfinite(f_max)) {
            throw ModelError("f_max must be finite and positive");
        }
        return f_max;
    }

    UtilityKind kind_;
    double f_max_;
    UtilityTable table_;
};

inline double utility(const UtilityModel& model, Rate f) { return model(f); }

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

namespace detail {

inline std::string_view trim(std::string_view s) noexcept {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    s = trim(s);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

inline std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ModelError("cannot open file: " + path.string());
    }
    return in;
}

inline std::string where(std::string_view source, std::size_t line) {
    return std::string(source) + ":" + std::to_string(line) + ": ";
}

}  // namespace detail

/// Reads `t,mu` rows; t must run 0, 1, 2, ... and mu must be a non-negative integer.
inline std::vector<Frames> parse_service_trace(std::istream& in, std::string_view source = "<trace>") {
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    std::vector<Frames> trace;
    while (std::getline(in, line)) {
        ++lineno;
        const auto text = detail::trim(line);
        if (text.empty()) continue;
        const auto cols = detail::split(text, ',');
        if (!header) {
            if (cols.size() != 2 || cols[0] != "t" || cols[1] != "mu") {
                throw ModelError(detail::where(source, lineno) + "expected header 't,mu'");
            }
            header = true;
            continue;
        }
        std::int64_t t = 0;
        Frames mu = 0;
        if (cols.size() != 2 || !detail::parse_number(cols[0], t) || !detail::parse_number(cols[1], mu)) {
            throw ModelError(detail::where(source, lineno) + "expected two integers");
        }
        if (t != static_cast<std::int64_t>(trace.size())) {
            throw ModelError(detail::where(source, lineno) + "slot index out of sequence");
        }
        if (mu < 0) {
            throw ModelError(detail::where(source, lineno) + "mu must be non-negative");
        }
        trace.push_back(mu);
    }
    if (!header) throw ModelError(std::string(source) + ": missing header 't,mu'");
    if (trace.empty()) throw ModelError(std::string(source) + ": service trace has no rows");
    return trace;
}

inline std::vector<Frames> load_service_trace(const std::filesystem::path& path) {
    auto in = detail::open_or_throw(path);
    return parse_service_trace(in, path.string());
}

/// Reads `f,alpha,beta` rows.
inline UtilityTable parse_utility_table(std::istream& in, std::string_view source = "<table>") {
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    UtilityTable table;
    while (std::getline(in, line)) {
        ++lineno;
        const auto text = detail::trim(line);
        if (text.empty()) continue;
        const auto cols = detail::split(text, ',');
        if (!header) {
            if (cols.size() != 3 || cols[0] != "f" || cols[1] != "alpha" || cols[2] != "beta") {
                throw ModelError(detail::where(source, lineno) + "expected header 'f,alpha,beta'");
            }
            header = true;
            continue;
        }
        Rate f = 0;
        FaceCounts counts;
        if (cols.size() != 3 || !detail::parse_number(cols[0], f) || !detail::parse_number(cols[1], counts.alpha) ||
            !detail::parse_number(cols[2], counts.beta)) {
            throw ModelError(detail::where(source, lineno) + "expected 'rate,int,int'");
        }
        if (!table.emplace(f, counts).second) {
            throw ModelError(detail::where(source, lineno) + "duplicate rate");
        }
    }
    if (!header) throw ModelError(std::string(source) + ": missing header 'f,alpha,beta'");
    return table;
}

inline UtilityTable load_utility_table(const std::filesystem::path& path) {
    auto in = detail::open_or_throw(path);
    return parse_utility_table(in, path.string());
}

}  // namespace lyaprate
