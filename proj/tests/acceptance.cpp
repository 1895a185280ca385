// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Optional argv[1]: scratch directory for the determinism check.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lyaprate/lyaprate.hpp"

using namespace lyaprate;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
    if (!ok) ++failures;
}

double median3(std::array<double, 3> x) {
    std::sort(x.begin(), x.end());
    return x[1];
}

// Non-decreasing with at most one inversion, and that inversion no larger
// than `tolerance` relative to the preceding value.
bool nondecreasing_with_slack(const std::vector<double>& xs, double tolerance) {
    int inversions = 0;
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (xs[i] < xs[i - 1]) {
            ++inversions;
            if (xs[i - 1] - xs[i] > tolerance * std::abs(xs[i - 1])) return false;
        }
    }
    return inversions <= 1;
}

std::string join(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + format_summary(xs[i]);
    return out;
}

// ---------------------------------------------------------------------------

void controller_oracle() {
    const auto start = Clock::now();
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> qd(0.0, 1e4), vd(0.0, 1e3), sd(0.0, 1.0);
    std::uniform_int_distribution<int> nd(1, 32);
    int agree = 0;
    const int trials = 1000;
    for (int trial = 0; trial < trials; ++trial) {
        const int n = nd(gen);
        std::vector<Rate> rates;
        std::vector<double> s;
        for (int i = 0; i < n; ++i) {
            rates.push_back(i + 1.0);
            s.push_back(sd(gen));
        }
        std::sort(s.begin(), s.end());
        const double q = qd(gen), v = vd(gen);
        const auto util = [&](Rate f) { return s[static_cast<std::size_t>(f) - 1]; };
        const auto lam = [](Rate f) { return f; };

        Rate oracle = rates[0];
        double best = v * s[0] - q * rates[0];
        for (int i = 1; i < n; ++i) {
            const double score = v * s[i] - q * rates[i];
            if (!(score < best)) {
                best = score;
                oracle = rates[i];
            }
        }
        agree += select_rate(q, TradeoffV{v}, RateSet(rates), util, lam) == oracle;
    }
    const double elapsed = seconds_since(start);
    report(1, agree == trials && elapsed < 1.0,
           std::to_string(agree) + "/" + std::to_string(trials) + " agree, " + format_summary(elapsed) + " s");
}

void queue_exactness() {
    std::mt19937_64 gen(2);
    std::uniform_int_distribution<Frames> big(0, 1'000'000);
    int exact = 0;
    const int triples = 100'000;
    for (int i = 0; i < triples; ++i) {
        const Frames q = big(gen), mu = big(gen), lam = big(gen);
        exact += step(QueueState::make(std::nullopt, q), mu, lam).backlog == std::max<Frames>(q - mu, 0) + lam;
    }

    std::uniform_int_distribution<Frames> cap_d(1, 500), flow(0, 25);
    int conserved = 0;
    const int trajectories = 1000;
    for (int k = 0; k < trajectories; ++k) {
        const Frames cap = cap_d(gen);
        auto state = QueueState::make(k % 2 ? std::optional<Frames>(cap) : std::nullopt, cap / 2);
        for (int t = 0; t < 10'000; ++t) state = step(state, flow(gen), flow(gen));
        conserved += state.total_arrived - state.total_served - state.total_dropped ==
                     state.backlog - state.initial_backlog;
    }
    report(2, exact == triples && conserved == trajectories,
           std::to_string(exact) + "/" + std::to_string(triples) + " exact updates, " + std::to_string(conserved) +
               "/" + std::to_string(trajectories) + " trajectories conserve");
}

void fig2_shape() {
    const auto start = Clock::now();
    bool a = true, b = true, c = true;
    int d_wins = 0;
    std::ostringstream detail;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        auto cfg = default_scenario(seed);

        cfg.policy = FixedPolicy{10.0};
        const auto f10 = run(cfg);
        const double drift = presaturation_drift(f10.records);
        a = a && f10.summary.overflow_events >= 1 && drift >= 0.3 && drift <= 0.7;

        cfg.policy = FixedPolicy{1.0};
        const auto f1 = run(cfg).summary;
        b = b && f1.overflow_events == 0 && f1.avg_backlog < 5.0;

        cfg.policy = LyapunovPolicy{TradeoffV{kDefaultVLow}};
        const auto low = run(cfg);
        cfg.policy = LyapunovPolicy{TradeoffV{kDefaultVHigh}};
        const auto high = run(cfg);
        const double r_low = quarter_stability_ratio(low.records);
        const double r_high = quarter_stability_ratio(high.records);
        c = c && low.summary.overflow_events == 0 && high.summary.overflow_events == 0 && r_low <= 2.0 &&
            r_high <= 2.0;
        d_wins += high.summary.avg_backlog > low.summary.avg_backlog;

        detail << " [seed " << seed << ": drift10=" << format_summary(drift)
               << " overflow10=" << f10.summary.overflow_events << " Q1=" << format_summary(f1.avg_backlog)
               << " Q50=" << format_summary(low.summary.avg_backlog)
               << " Q200=" << format_summary(high.summary.avg_backlog) << " ratios=" << format_summary(r_low) << "/"
               << format_summary(r_high) << "]";
    }
    const double elapsed = seconds_since(start);
    const bool d = d_wins >= 2;
    report(3, a && b && c && d && elapsed < 10.0,
           std::string("a=") + (a ? "ok" : "no") + " b=" + (b ? "ok" : "no") + " c=" + (c ? "ok" : "no") +
               " d=" + std::to_string(d_wins) + "/3, " + format_summary(elapsed) + " s" + detail.str());
}

void tradeoff_trends() {
    const auto start = Clock::now();
    const std::array<double, 4> grid{5, 20, 80, 320};
    std::vector<double> backlog, util;
    for (double v : grid) {
        std::array<double, 3> bs{}, us{};
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            auto cfg = default_scenario(seed);
            cfg.policy = LyapunovPolicy{TradeoffV{v}};
            const auto s = run(cfg).summary;
            bs[seed - 1] = s.avg_backlog;
            us[seed - 1] = s.avg_utility;
        }
        backlog.push_back(median3(bs));
        util.push_back(median3(us));
    }
    const double elapsed = seconds_since(start);
    const bool ok = nondecreasing_with_slack(backlog, 0.05) && nondecreasing_with_slack(util, 0.05) &&
                    util.back() >= 0.90 && elapsed < 30.0;
    report(4, ok,
           "median backlog {" + join(backlog) + "}, median utility {" + join(util) + "}, " +
               format_summary(elapsed) + " s");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void determinism(const fs::path& scratch) {
    const auto first = scratch / "fig2_a";
    const auto second = scratch / "fig2_b";
    fs::remove_all(first);
    fs::remove_all(second);
    write_fig2(first, kDefaultSeed);
    write_fig2(second, kDefaultSeed);
    int identical = 0, total = 0;
    for (const auto& entry : fs::directory_iterator(first)) {
        if (entry.path().extension() != ".csv") continue;
        ++total;
        identical += slurp(entry.path()) == slurp(second / entry.path().filename());
    }
    report(5, total == 4 && identical == total,
           std::to_string(identical) + "/" + std::to_string(total) + " CSVs byte-identical");
}

void zero_v() {
    bool ok = true;
    std::string detail;
    for (Frames initial : {1, 50, 999}) {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            auto cfg = default_scenario(seed);
            cfg.horizon = 1000;
            cfg.initial_backlog = initial;
            cfg.policy = LyapunovPolicy{TradeoffV{0.0}};
            const auto recs = run(cfg).records;
            const auto off = std::count_if(recs.begin(), recs.end(),
                                           [&](const SlotRecord& r) { return r.f_selected != cfg.rates.min(); });
            ok = ok && off == 0;
            if (off) detail += " initial=" + std::to_string(initial) + " seed=" + std::to_string(seed);
        }
    }
    report(6, ok, ok ? "minimum rate in every slot for initial backlogs 1, 50, 999" : "deviations:" + detail);
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path scratch = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "lyaprate_acceptance";
    fs::create_directories(scratch);

    controller_oracle();
    queue_exactness();
    fig2_shape();
    tradeoff_trends();
    determinism(scratch);
    zero_v();

    std::printf("%d failure(s)\n", failures);
    return failures == 0 ? 0 : 1;
}
