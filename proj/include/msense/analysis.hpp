#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "msense/aggregation.hpp"
#include "msense/decision.hpp"
#include "msense/errors.hpp"
#include "msense/hierarchy.hpp"
#include "msense/occupancy.hpp"
#include "msense/random.hpp"

namespace msense {

/// Point estimate with its standard error.
struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Binomial(n, pi) pmf over 0..n, through log-factorials.
inline std::vector<double> binomial_pmf(int n, double pi)
{
    if (n < 0 || !(pi >= 0.0 && pi <= 1.0)) {
        throw std::invalid_argument("binomial pmf needs n >= 0 and pi in [0, 1]");
    }
    std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
    if (pi == 0.0 || pi == 1.0) {
        pmf[pi == 0.0 ? 0 : n] = 1.0;
        return pmf;
    }
    // Extended precision keeps the summed log-factorials accurate for n ~ 10^3.
    std::vector<long double> log_fact(static_cast<std::size_t>(n) + 1, 0.0L);
    for (int k = 1; k <= n; ++k) {
        log_fact[k] = log_fact[k - 1] + std::log(static_cast<long double>(k));
    }
    const long double lp = std::log(static_cast<long double>(pi));
    const long double lq = std::log1p(-static_cast<long double>(pi));
    for (int k = 0; k <= n; ++k) {
        pmf[k] = static_cast<double>(std::exp(log_fact[n] - log_fact[k] - log_fact[n - k] + k * lp + (n - k) * lq));
    }
    return pmf;
}

inline constexpr double kDefaultTermCap = 1e7;
inline constexpr int kDefaultEnumerationCap = 20;

/// Long-run average network reward of the hierarchical scheme at steady
/// state: per cell, the expectation of max{0, r_i(1, o)} when each class
/// count o_L is Binomial(n_L, pi_B), independently across classes.
inline double closed_form_average_reward(const DistanceClassIndex& index, const RewardParams& params, double pi_busy,
                                         double term_cap = kDefaultTermCap)
{
    if (!(pi_busy >= 0.0 && pi_busy <= 1.0)) {
        throw std::invalid_argument("pi_B must lie in [0, 1]");
    }
    double total = 0.0;
    for (const auto& classes : index) {
        const int levels = static_cast<int>(classes.members.size());
        double terms = 1.0;
        std::vector<std::vector<double>> pmfs;
        std::vector<double> unit_cost; // lambda * Phi_i(L) / n_L
        for (int L = 0; L < levels; ++L) {
            const int n = classes.size(L);
            terms *= n + 1;
            pmfs.push_back(binomial_pmf(n, pi_busy));
            unit_cost.push_back(n > 0 ? params.lambda * classes.interference[L] / n : 0.0);
        }
        if (terms > term_cap) {
            throw TooLarge("closed-form evaluation needs " + std::to_string(terms) +
                           " terms for one cell (cap " + std::to_string(term_cap) +
                           "); use the Monte Carlo path instead");
        }
        // Depth-first over (o_0, ..., o_D), carrying the partial weight and penalty.
        std::function<double(int, double, double)> expand = [&](int L, double weight, double penalty) -> double {
            if (L == levels) {
                return weight * std::max(0.0, -penalty);
            }
            double acc = 0.0;
            const auto& pmf = pmfs[static_cast<std::size_t>(L)];
            for (int o = 0; o < static_cast<int>(pmf.size()); ++o) {
                if (pmf[o] == 0.0) {
                    continue;
                }
                double next_penalty = penalty + o * unit_cost[L];
                if (L == 0) {
                    next_penalty -= params.rho_idle * (1 - o) + params.rho_busy * o;
                }
                acc += expand(L + 1, weight * pmf[o], next_penalty);
            }
            return acc;
        };
        total += expand(0, 1.0, 0.0);
    }
    return total;
}

/// Expected full-information reward, by exact enumeration of all 2^N states
/// in Gray-code order (one column update per state).
inline double full_info_upper_bound_exact(const InterferenceMatrix& phi, const RewardParams& params, double pi_busy,
                                          int enumeration_cap = kDefaultEnumerationCap)
{
    if (!(pi_busy >= 0.0 && pi_busy <= 1.0)) {
        throw std::invalid_argument("pi_B must lie in [0, 1]");
    }
    const int n = phi.size();
    if (n > enumeration_cap || n > 62) {
        throw TooLarge("exact upper bound enumerates 2^" + std::to_string(n) + " states (cap 2^" +
                       std::to_string(enumeration_cap) + "); use the Monte Carlo path instead");
    }
    std::vector<double> weight_by_count(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        weight_by_count[k] = std::pow(pi_busy, k) * std::pow(1.0 - pi_busy, n - k);
    }
    // Extended precision: the running column updates would otherwise drift
    // by a few ulps, enough to turn an exact zero reward slightly positive.
    std::vector<long double> interference(static_cast<std::size_t>(n), 0.0L);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(n), 0);
    int occupied = 0;
    long double total = 0.0L;
    const std::uint64_t states = std::uint64_t{1} << n;
    for (std::uint64_t s = 0; s < states; ++s) {
        if (s > 0) {
            const int flip = std::countr_zero(s);
            const double sign = bits[flip] ? -1.0 : 1.0;
            bits[flip] ^= 1;
            occupied += bits[flip] ? 1 : -1;
            for (int i = 0; i < n; ++i) {
                interference[i] += sign * phi(i, flip);
            }
        }
        const double w = weight_by_count[occupied];
        if (w == 0.0) {
            continue;
        }
        long double reward = 0.0L;
        for (int i = 0; i < n; ++i) {
            const long double r =
                params.rho_idle * (1 - bits[i]) + params.rho_busy * bits[i] - params.lambda * interference[i];
            reward += std::max(0.0L, r);
        }
        total += w * reward;
    }
    return static_cast<double>(total);
}

/// Monte Carlo estimate of the full-information bound from i.i.d.
/// steady-state draws. Sample s uses substream (base, s), so the result
/// does not depend on how samples are scheduled.
inline Estimate full_info_upper_bound_mc(const InterferenceMatrix& phi, const RewardParams& params, double pi_busy,
                                         std::size_t n_samples, RandomStream& rng)
{
    if (n_samples < 1) {
        throw std::invalid_argument("at least one Monte Carlo sample required");
    }
    const std::uint64_t base = rng.next();
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t s = 0; s < n_samples; ++s) {
        auto sub = RandomStream::derive(base, {s});
        const auto b = sample_bernoulli_state(static_cast<std::size_t>(phi.size()), pi_busy, sub);
        const double r = full_info_network_reward(b, phi, params);
        sum += r;
        sum_sq += r * r;
    }
    const double n = static_cast<double>(n_samples);
    const double mean = sum / n;
    const double var = n > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1)) : 0.0;
    return {mean, std::sqrt(var / n)};
}

/// Time average of the hierarchical network reward along one simulated
/// occupancy trajectory, started at steady state. The standard error uses
/// non-overlapping batch means to account for slot-to-slot correlation.
inline Estimate simulate_average_reward(const AggregationTree& tree, const DistanceClassIndex& index,
                                        const MarkovParams& markov, const RewardParams& params, std::size_t slots,
                                        RandomStream& rng, std::size_t batches = 100, std::size_t burn_in = 0)
{
    if (slots < 1) {
        throw std::invalid_argument("at least one slot required");
    }
    batches = std::clamp<std::size_t>(batches, 1, slots);
    const std::size_t batch_len = slots / batches;
    auto b = initial_state(static_cast<std::size_t>(tree.n_cells()), markov, rng, burn_in);
    double total = 0.0;
    std::vector<double> batch_means;
    double batch_sum = 0.0;
    std::size_t in_batch = 0;
    for (std::size_t t = 0; t < slots; ++t) {
        if (t > 0) {
            b = step(b, markov, rng);
        }
        const auto sums = aggregate_up(tree, b);
        const double r = network_reward(observe_all(tree, sums), index, params);
        total += r;
        batch_sum += r;
        if (++in_batch == batch_len && batch_means.size() < batches) {
            batch_means.push_back(batch_sum / static_cast<double>(batch_len));
            batch_sum = 0.0;
            in_batch = 0;
        }
    }
    const double mean = total / static_cast<double>(slots);
    double se = 0.0;
    if (batch_means.size() > 1) {
        double bm = 0.0;
        for (double v : batch_means) {
            bm += v;
        }
        bm /= static_cast<double>(batch_means.size());
        double ss = 0.0;
        for (double v : batch_means) {
            ss += (v - bm) * (v - bm);
        }
        const double k = static_cast<double>(batch_means.size());
        se = std::sqrt(ss / (k - 1) / k);
    }
    return {mean, se};
}

} // namespace msense
