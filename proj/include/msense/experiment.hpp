#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "msense/analysis.hpp"
#include "msense/decision.hpp"
#include "msense/hierarchy.hpp"
#include "msense/interference.hpp"
#include "msense/occupancy.hpp"
#include "msense/random.hpp"

namespace msense {

enum class TreeScheme { regular, greedy, both };
enum class Evaluation { closed_form, simulation };
enum class BoundMode { automatic, exact, mc };

struct ExperimentConfig {
    GridTopology grid{4, 4};
    MarkovParams markov{0.1, 0.1};
    RewardParams reward{1.0, 0.0, 1.0};
    double alpha = 2.0;
    std::vector<double> p_blocks{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    int trials = 200;
    int slots = 10000; // simulation path only
    TreeScheme scheme = TreeScheme::both;
    Evaluation evaluation = Evaluation::closed_form;
    BoundMode bound = BoundMode::automatic;
    int mc_samples = 5000;
    std::uint64_t seed = 7;
    int jobs = 1;
    BlockageRule blockage_rule = BlockageRule::line_of_sight;
    TieBreak tie_break = TieBreak::lowest_ids;
    RegularPairing regular_pairing = RegularPairing::in_order;
    double term_cap = kDefaultTermCap;
    int enumeration_cap = kDefaultEnumerationCap;

    bool includes(TreeScheme s) const { return scheme == TreeScheme::both || scheme == s; }

    void validate() const
    {
        markov.validate();
        reward.validate();
        if (!(alpha > 0.0)) {
            throw std::invalid_argument("alpha must be positive");
        }
        if (p_blocks.empty()) {
            throw std::invalid_argument("at least one p_block value required");
        }
        for (double p : p_blocks) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw std::invalid_argument("p_block values must lie in [0, 1]");
            }
        }
        if (trials < 1 || slots < 1 || mc_samples < 1 || jobs < 1) {
            throw std::invalid_argument("trials, slots, mc-samples and jobs must be at least 1");
        }
    }
};

/// Rewards of one blockage realization, every scheme on the same layout.
struct TrialResult {
    std::optional<double> regular;
    std::optional<double> greedy;
    double upper_bound = 0.0;
};

inline double evaluate_tree(const ExperimentConfig& config, const AggregationTree& tree,
                            const InterferenceMatrix& phi, const RandomStream& trajectory)
{
    const auto index = build_distance_index(tree, phi);
    if (config.evaluation == Evaluation::closed_form) {
        return closed_form_average_reward(index, config.reward, steady_state_probability(config.markov),
                                          config.term_cap);
    }
    auto rng = trajectory; // common random numbers across schemes
    return simulate_average_reward(tree, index, config.markov, config.reward,
                                   static_cast<std::size_t>(config.slots), rng)
        .mean;
}

/// One layout draw and the evaluation of every requested scheme plus the
/// full-information bound on it.
inline TrialResult run_trial(const ExperimentConfig& config, double p_block, RandomStream rng)
{
    const auto layout = sample_blockage(config.grid, p_block, rng);
    const auto phi = build_interference_matrix(config.grid, layout, config.alpha, config.blockage_rule);
    const RandomStream trajectory(rng.next());
    const double pi_busy = steady_state_probability(config.markov);

    TrialResult result;
    if (config.includes(TreeScheme::regular)) {
        result.regular = evaluate_tree(config, build_regular_tree(config.grid, config.regular_pairing), phi, trajectory);
    }
    if (config.includes(TreeScheme::greedy)) {
        result.greedy = evaluate_tree(config, build_greedy_tree(phi, config.tie_break), phi, trajectory);
    }
    const bool exact = config.bound == BoundMode::exact ||
                       (config.bound == BoundMode::automatic && phi.size() <= config.enumeration_cap);
    if (exact) {
        result.upper_bound = full_info_upper_bound_exact(phi, config.reward, pi_busy, config.enumeration_cap);
    } else {
        result.upper_bound =
            full_info_upper_bound_mc(phi, config.reward, pi_busy, static_cast<std::size_t>(config.mc_samples), rng)
                .mean;
    }
    return result;
}

/// Trial i at sweep point s draws from substream (seed, s, i).
inline TrialResult run_trial(const ExperimentConfig& config, std::size_t point, std::size_t trial)
{
    return run_trial(config, config.p_blocks.at(point), RandomStream::derive(config.seed, {point, trial}));
}

struct SweepRow {
    double p_block = 0.0;
    std::string scheme;
    double mean_reward = 0.0;
    double std_error = 0.0;
    int trials = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    /// trials[point][trial], kept for paired comparisons.
    std::vector<std::vector<TrialResult>> trials;

    const SweepRow* find(double p_block, const std::string& scheme) const
    {
        for (const auto& r : rows) {
            if (r.p_block == p_block && r.scheme == scheme) {
                return &r;
            }
        }
        return nullptr;
    }
};

inline Estimate mean_and_std_error(const std::vector<double>& xs)
{
    if (xs.empty()) {
        return {};
    }
    // Moments about the first sample, so identical samples give exactly the
    // sample value and zero spread.
    const double n = static_cast<double>(xs.size());
    const double shift = xs.front();
    double sum = 0.0;
    for (double x : xs) {
        sum += x - shift;
    }
    const double mean_offset = sum / n;
    double ss = 0.0;
    for (double x : xs) {
        const double d = (x - shift) - mean_offset;
        ss += d * d;
    }
    const double mean = shift + mean_offset;
    return {mean, xs.size() > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0};
}

/// Runs every (point, trial) work item on up to config.jobs threads. The
/// result depends only on the config, never on scheduling.
inline SweepResult run_sweep(const ExperimentConfig& config)
{
    config.validate();
    const std::size_t points = config.p_blocks.size();
    const std::size_t per_point = static_cast<std::size_t>(config.trials);
    const std::size_t total = points * per_point;

    SweepResult result;
    result.trials.assign(points, std::vector<TrialResult>(per_point));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t item = next++; item < total; item = next++) {
            const std::size_t s = item / per_point;
            const std::size_t t = item % per_point;
            try {
                result.trials[s][t] = run_trial(config, s, t);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next = total;
            }
        }
    };
    const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(config.jobs), total));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    for (std::size_t s = 0; s < points; ++s) {
        const auto& trials = result.trials[s];
        auto add_row = [&](const std::string& name, auto pick) {
            std::vector<double> xs;
            for (const auto& tr : trials) {
                xs.push_back(pick(tr));
            }
            const auto est = mean_and_std_error(xs);
            result.rows.push_back({config.p_blocks[s], name, est.mean, est.std_error, config.trials});
        };
        if (config.includes(TreeScheme::regular)) {
            add_row("regular", [](const TrialResult& r) { return *r.regular; });
        }
        if (config.includes(TreeScheme::greedy)) {
            add_row("greedy", [](const TrialResult& r) { return *r.greedy; });
        }
        add_row("upper_bound", [](const TrialResult& r) { return r.upper_bound; });
    }
    return result;
}

inline std::string format_number(double v, int precision)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

/// CSV: p_block,scheme,mean_reward,stderr,trials
inline void write_sweep_csv(std::ostream& out, const SweepResult& result)
{
    out << "p_block,scheme,mean_reward,stderr,trials\n";
    for (const auto& r : result.rows) {
        out << format_number(r.p_block, 10) << ',' << r.scheme << ',' << format_number(r.mean_reward, 17) << ','
            << format_number(r.std_error, 17) << ',' << r.trials << '\n';
    }
}

/// Parses "a:b:step" (inclusive of b up to rounding) or a comma list.
inline std::vector<double> parse_range(const std::string& text)
{
    std::vector<double> values;
    auto to_double = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size()) {
            throw std::invalid_argument("not a number: '" + s + "' in '" + text + "'");
        }
        return v;
    };
    if (text.find(':') != std::string::npos) {
        const auto c1 = text.find(':');
        const auto c2 = text.find(':', c1 + 1);
        if (c2 == std::string::npos || text.find(':', c2 + 1) != std::string::npos) {
            throw std::invalid_argument("range must look like start:stop:step, got '" + text + "'");
        }
        const double start = to_double(text.substr(0, c1));
        const double stop = to_double(text.substr(c1 + 1, c2 - c1 - 1));
        const double step = to_double(text.substr(c2 + 1));
        if (!(step > 0.0) || stop < start) {
            throw std::invalid_argument("range needs step > 0 and stop >= start, got '" + text + "'");
        }
        const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
        for (long k = 0; k <= count; ++k) {
            // Round away binary noise so 0.1-steps print as written.
            values.push_back(std::round((start + k * step) * 1e12) / 1e12);
        }
        return values;
    }
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        values.push_back(to_double(text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos)));
        if (comma == std::string::npos) {
            break;
        }
        pos = comma + 1;
    }
    return values;
}

} // namespace msense
