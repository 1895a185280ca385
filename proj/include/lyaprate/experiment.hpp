#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "models.hpp"
#include "random.hpp"
#include "sim.hpp"

namespace lyaprate {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Number formatting. std::to_chars is locale-independent.
// ---------------------------------------------------------------------------

/// Shortest text that round-trips to the same double.
inline std::string format_exact(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

/// Six significant digits, %g style.
inline std::string format_summary(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 6);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Experiment config: flat `key = value` text, '#' starts a comment.
// ---------------------------------------------------------------------------

/// SimConfig plus the file references it was built from.
struct ExperimentSpec {
    SimConfig config;
    std::string service_trace;  // as written; resolved against base_dir
    std::string utility_table;
    std::string output;
    std::filesystem::path base_dir;  // not serialized

    /// Equality over everything that is serialized.
    friend bool operator==(const ExperimentSpec& a, const ExperimentSpec& b) {
        return a.config == b.config && a.service_trace == b.service_trace && a.utility_table == b.utility_table &&
               a.output == b.output;
    }
};

namespace detail {

inline const std::set<std::string, std::less<>>& known_keys() {
    static const std::set<std::string, std::less<>> keys{
        "horizon",   "rates",         "policy",        "v",           "fixed_rate", "arrival",
        "slot_duration", "service",   "service_mean",  "service_trace", "utility",  "f_max",
        "utility_table", "capacity",  "initial_backlog", "seed",      "prng",       "output",
    };
    return keys;
}

class KeyValues {
public:
    explicit KeyValues(std::map<std::string, std::string, std::less<>> kv) : kv_(std::move(kv)) {}

    [[nodiscard]] std::optional<std::string_view> get(std::string_view key) const {
        const auto it = kv_.find(key);
        if (it == kv_.end()) return std::nullopt;
        return std::string_view(it->second);
    }

    [[nodiscard]] std::string_view require(std::string_view key, std::string_view why) const {
        const auto v = get(key);
        if (!v) throw ConfigError("missing key '" + std::string(key) + "' (" + std::string(why) + ")");
        return *v;
    }

    template <typename T>
    [[nodiscard]] T number(std::string_view key, T fallback) const {
        const auto v = get(key);
        if (!v) return fallback;
        return parse<T>(key, *v);
    }

    template <typename T>
    static T parse(std::string_view key, std::string_view text) {
        T out{};
        if (!parse_number(text, out)) {
            throw ConfigError("invalid value for '" + std::string(key) + "': '" + std::string(text) + "'");
        }
        return out;
    }

private:
    std::map<std::string, std::string, std::less<>> kv_;
};

inline std::vector<Rate> parse_rate_list(std::string_view key, std::string_view text) {
    std::vector<Rate> out;
    for (const auto item : split(text, ',')) {
        out.push_back(KeyValues::parse<double>(key, item));
    }
    return out;
}

}  // namespace detail

inline ExperimentSpec parse_experiment(std::istream& in, std::string_view source = "<config>",
                                       std::filesystem::path base_dir = {}) {
    std::map<std::string, std::string, std::less<>> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto text = std::string_view(line);
        if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
        text = detail::trim(text);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(detail::where(source, lineno) + "expected 'key = value'");
        }
        const auto key = std::string(detail::trim(text.substr(0, eq)));
        const auto value = std::string(detail::trim(text.substr(eq + 1)));
        if (!detail::known_keys().contains(key)) {
            throw ConfigError(detail::where(source, lineno) + "unknown key '" + key + "'");
        }
        if (!kv.emplace(key, value).second) {
            throw ConfigError(detail::where(source, lineno) + "duplicate key '" + key + "'");
        }
    }

    const detail::KeyValues cfg(std::move(kv));
    ExperimentSpec spec;
    spec.base_dir = std::move(base_dir);
    SimConfig& sim = spec.config;

    try {
        if (const auto prng = cfg.get("prng"); prng && *prng != Rng::name) {
            throw ConfigError("unsupported prng '" + std::string(*prng) + "', only " + Rng::name + " is available");
        }
        sim.horizon = cfg.number<std::int64_t>("horizon", sim.horizon);
        if (const auto r = cfg.get("rates")) sim.rates = RateSet(detail::parse_rate_list("rates", *r));
        sim.seed = cfg.number<std::uint64_t>("seed", sim.seed);
        sim.initial_backlog = cfg.number<Frames>("initial_backlog", sim.initial_backlog);

        if (const auto c = cfg.get("capacity")) {
            if (*c == "inf") {
                sim.capacity.reset();
            } else {
                sim.capacity = detail::KeyValues::parse<Frames>("capacity", *c);
            }
        }

        const auto policy = cfg.get("policy").value_or("lyapunov");
        if (policy == "lyapunov") {
            sim.policy = LyapunovPolicy{TradeoffV{cfg.number<double>("v", 50.0)}};
        } else if (policy == "fixed") {
            sim.policy = FixedPolicy{
                detail::KeyValues::parse<double>("fixed_rate", cfg.require("fixed_rate", "policy = fixed"))};
        } else {
            throw ConfigError("policy must be 'lyapunov' or 'fixed', got '" + std::string(policy) + "'");
        }

        const auto arrival = cfg.get("arrival").value_or("deterministic");
        const double slot = cfg.number<double>("slot_duration", 1.0);
        if (arrival == "deterministic") {
            sim.arrival = ArrivalModel(ArrivalKind::deterministic, slot);
        } else if (arrival == "poisson") {
            sim.arrival = ArrivalModel(ArrivalKind::poisson, slot);
        } else {
            throw ConfigError("arrival must be 'deterministic' or 'poisson', got '" + std::string(arrival) + "'");
        }

        const auto service = cfg.get("service").value_or("poisson");
        if (service == "deterministic") {
            sim.service = ServiceModel::deterministic(cfg.number<double>("service_mean", 9.0));
        } else if (service == "poisson") {
            sim.service = ServiceModel::poisson(cfg.number<double>("service_mean", 9.5));
        } else if (service == "trace") {
            spec.service_trace = std::string(cfg.require("service_trace", "service = trace"));
            sim.service = ServiceModel::from_trace(load_service_trace(spec.base_dir / spec.service_trace));
        } else {
            throw ConfigError("service must be 'deterministic', 'poisson' or 'trace', got '" + std::string(service) +
                              "'");
        }

        const auto utility = cfg.get("utility").value_or("linear");
        if (utility == "linear") {
            sim.utility = UtilityModel::linear(cfg.number<double>("f_max", sim.rates.max()));
        } else if (utility == "log") {
            sim.utility = UtilityModel::log(cfg.number<double>("f_max", sim.rates.max()));
        } else if (utility == "trace_empirical") {
            spec.utility_table = std::string(cfg.require("utility_table", "utility = trace_empirical"));
            sim.utility = UtilityModel::trace_empirical(load_utility_table(spec.base_dir / spec.utility_table));
        } else {
            throw ConfigError("utility must be 'linear', 'log' or 'trace_empirical', got '" + std::string(utility) +
                              "'");
        }

        spec.output = std::string(cfg.get("output").value_or(""));
        sim.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string(source) + ": " + e.what());
    }
    return spec;
}

inline ExperimentSpec load_experiment(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path.string());
    }
    return parse_experiment(in, path.string(), path.parent_path());
}

/// Writes a config that parse_experiment reads back to an equal spec.
inline void write_experiment(std::ostream& out, const ExperimentSpec& spec) {
    const SimConfig& c = spec.config;
    out << "prng = " << Rng::name << "\n";
    out << "seed = " << c.seed << "\n";
    out << "horizon = " << c.horizon << "\n";
    out << "rates = ";
    for (std::size_t i = 0; i < c.rates.size(); ++i) {
        out << (i ? "," : "") << format_exact(c.rates[i]);
    }
    out << "\n";
    if (const auto* p = std::get_if<LyapunovPolicy>(&c.policy)) {
        out << "policy = lyapunov\nv = " << format_exact(p->v.value()) << "\n";
    } else {
        out << "policy = fixed\nfixed_rate = " << format_exact(std::get<FixedPolicy>(c.policy).rate) << "\n";
    }
    out << "arrival = " << (c.arrival.kind() == ArrivalKind::deterministic ? "deterministic" : "poisson") << "\n";
    out << "slot_duration = " << format_exact(c.arrival.slot_duration()) << "\n";
    switch (c.service.kind()) {
        case ServiceKind::deterministic:
            out << "service = deterministic\nservice_mean = " << format_exact(c.service.mean()) << "\n";
            break;
        case ServiceKind::poisson:
            out << "service = poisson\nservice_mean = " << format_exact(c.service.mean()) << "\n";
            break;
        case ServiceKind::trace:
            out << "service = trace\nservice_trace = " << spec.service_trace << "\n";
            break;
    }
    switch (c.utility.kind()) {
        case UtilityKind::linear:
            out << "utility = linear\nf_max = " << format_exact(c.utility.f_max()) << "\n";
            break;
        case UtilityKind::log:
            out << "utility = log\nf_max = " << format_exact(c.utility.f_max()) << "\n";
            break;
        case UtilityKind::trace_empirical:
            out << "utility = trace_empirical\nutility_table = " << spec.utility_table << "\n";
            break;
    }
    out << "capacity = " << (c.capacity ? std::to_string(*c.capacity) : std::string("inf")) << "\n";
    out << "initial_backlog = " << c.initial_backlog << "\n";
    if (!spec.output.empty()) {
        out << "output = " << spec.output << "\n";
    }
}

// ---------------------------------------------------------------------------
// Result emission
// ---------------------------------------------------------------------------

inline constexpr std::string_view kSlotCsvHeader = "t,f,arrived,served,backlog,utility,dropped";

inline void write_slot_csv(std::ostream& out, std::span<const SlotRecord> records) {
    out << kSlotCsvHeader << "\n";
    for (const auto& r : records) {
        out << r.t << ',' << format_exact(r.f_selected) << ',' << r.arrived << ',' << r.served << ',' << r.backlog
            << ',' << format_exact(r.utility_value) << ',' << r.dropped << "\n";
    }
}

inline void write_summary(std::ostream& out, const RunSummary& s) {
    out << "avg_backlog=" << format_summary(s.avg_backlog) << "\n"
        << "avg_utility=" << format_summary(s.avg_utility) << "\n"
        << "overflow_events=" << s.overflow_events << "\n"
        << "total_dropped=" << s.total_dropped << "\n"
        << "final_backlog=" << s.final_backlog << "\n"
        << "drift_estimate=" << format_summary(s.drift_estimate) << "\n";
}

inline constexpr std::string_view kSweepCsvHeader = "v,avg_backlog,avg_utility,overflow_events";

inline void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points) {
    out << kSweepCsvHeader << "\n";
    for (const auto& p : points) {
        out << format_exact(p.v) << ',' << format_summary(p.result.summary.avg_backlog) << ','
            << format_summary(p.result.summary.avg_utility) << ',' << p.result.summary.overflow_events << "\n";
    }
}

namespace detail {

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    writer(out);
    out.flush();
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

inline void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
    }
}

}  // namespace detail

/// Per-slot CSV at `csv_path`, summary block beside it at `<csv_path>.summary`.
inline RunSummary run_experiment(const ExperimentSpec& spec, const std::filesystem::path& csv_path) {
    const RunResult result = run(spec.config);
    if (csv_path.has_parent_path()) detail::ensure_dir(csv_path.parent_path());
    detail::write_file(csv_path, [&](std::ostream& out) { write_slot_csv(out, result.records); });
    auto summary_path = csv_path;
    summary_path += ".summary";
    detail::write_file(summary_path, [&](std::ostream& out) { write_summary(out, result.summary); });
    return result.summary;
}

inline std::string sweep_run_filename(std::size_t index, double v) {
    return "run_" + std::to_string(index) + "_v" + format_exact(v) + ".csv";
}

/// One per-slot CSV per V plus summary.csv, all in `dir`.
inline std::vector<SweepPoint> sweep_experiment(const ExperimentSpec& spec, std::span<const double> v_values,
                                                const std::filesystem::path& dir, bool parallel = false) {
    auto points = sweep_v(spec.config, v_values, parallel);
    detail::ensure_dir(dir);
    for (std::size_t i = 0; i < points.size(); ++i) {
        detail::write_file(dir / sweep_run_filename(i, points[i].v),
                           [&](std::ostream& out) { write_slot_csv(out, points[i].result.records); });
    }
    detail::write_file(dir / "summary.csv", [&](std::ostream& out) { write_sweep_csv(out, points); });
    return points;
}

// ---------------------------------------------------------------------------
// Queue-dynamics comparison: two fixed-rate baselines and two Lyapunov runs.
// ---------------------------------------------------------------------------

struct Fig2Curve {
    std::string name;
    Policy policy;
};

inline constexpr double kDefaultVLow = 50.0;
inline constexpr double kDefaultVHigh = 200.0;
inline constexpr std::uint64_t kDefaultSeed = 1;

/// Default scenario: F = {1..10}, lambda(f) = f per 1 s slot, mu ~ Poisson(9.5),
/// S(f) = f / 10, capacity 1000, 10^4 slots.
inline SimConfig default_scenario(std::uint64_t seed = kDefaultSeed) {
    SimConfig c;
    c.horizon = 10'000;
    c.rates = RateSet::integers(10);
    c.arrival = ArrivalModel(ArrivalKind::deterministic, 1.0);
    c.service = ServiceModel::poisson(9.5);
    c.utility = UtilityModel::linear(10.0);
    c.capacity = 1000;
    c.initial_backlog = 0;
    c.seed = seed;
    return c;
}

inline std::string describe(const Policy& policy) {
    if (const auto* p = std::get_if<LyapunovPolicy>(&policy)) {
        return "policy=lyapunov v=" + format_exact(p->v.value());
    }
    return "policy=fixed fixed_rate=" + format_exact(std::get<FixedPolicy>(policy).rate);
}

inline std::vector<Fig2Curve> fig2_curves(double v_low = kDefaultVLow, double v_high = kDefaultVHigh) {
    return {
        {"fixed10", FixedPolicy{10.0}},
        {"lyapunov_vlow", LyapunovPolicy{TradeoffV{v_low}}},
        {"lyapunov_vhigh", LyapunovPolicy{TradeoffV{v_high}}},
        {"fixed1", FixedPolicy{1.0}},
    };
}

/**
 * Writes <curve>.csv and <curve>.cfg for every curve plus manifest.txt.
 * All curves share one seed so they see the same service sequence. Each
 * .cfg reproduces its CSV through `run`.
 */
inline std::vector<std::pair<std::string, RunSummary>> write_fig2(const std::filesystem::path& dir,
                                                                   std::uint64_t seed = kDefaultSeed) {
    detail::ensure_dir(dir);
    std::vector<std::pair<std::string, RunSummary>> out;
    std::ostringstream manifest;
    manifest << "# queue dynamics: fixed-rate baselines vs Lyapunov rate control\n"
             << "prng = " << Rng::name << "\n"
             << "seed = " << seed << "\n";
    for (const auto& curve : fig2_curves()) {
        ExperimentSpec spec;
        spec.config = default_scenario(seed);
        spec.config.policy = curve.policy;
        spec.output = curve.name + ".csv";
        detail::write_file(dir / (curve.name + ".cfg"), [&](std::ostream& os) { write_experiment(os, spec); });
        out.emplace_back(curve.name, run_experiment(spec, dir / spec.output));
        manifest << "curve " << curve.name << ": " << describe(curve.policy) << " config=" << curve.name
                 << ".cfg csv=" << spec.output << "\n";
    }
    detail::write_file(dir / "manifest.txt", [&](std::ostream& os) { os << manifest.str(); });
    return out;
}

}  // namespace lyaprate
