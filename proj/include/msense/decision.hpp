#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "msense/aggregation.hpp"
#include "msense/hierarchy.hpp"
#include "msense/interference.hpp"
#include "msense/occupancy.hpp"

namespace msense {

/// Local reward weights: throughput when accessing an idle / busy channel,
/// and the price of interference.
struct RewardParams {
    double rho_idle = 1.0;
    double rho_busy = 0.0;
    double lambda = 1.0;

    void validate() const
    {
        if (!(rho_busy >= 0.0 && rho_busy <= rho_idle)) {
            throw std::invalid_argument("reward weights must satisfy 0 <= rho_B <= rho_I");
        }
        if (!(lambda > 0.0)) {
            throw std::invalid_argument("interference weight lambda must be positive");
        }
    }
};

/// SU access indicator per cell.
using AccessDecision = std::vector<std::uint8_t>;

/// P(b_j = 1 | o occupied among n) for any j in the class.
inline double posterior_marginal(int occupied, int class_size)
{
    if (class_size < 1 || occupied < 0 || occupied > class_size) {
        throw std::invalid_argument("occupied count outside [0, class size]");
    }
    return static_cast<double>(occupied) / class_size;
}

/// 1 / C(n, k) evaluated as a running product, exact for small n.
inline double inverse_binomial(int n, int k)
{
    k = std::min(k, n - k);
    double v = 1.0;
    for (int t = 1; t <= k; ++t) {
        v *= static_cast<double>(t) / (n - k + t);
    }
    return v;
}

/// Posterior probability of the full network state `b` held by the cell
/// whose distance classes are `classes`, given its current observation.
/// Uniform over the occupied-cell combinations of each class and
/// independent across classes.
inline double belief_joint(const ObservationVector& obs, const DistanceClasses& classes, const NetworkState& b)
{
    if (obs.size() != classes.members.size()) {
        throw std::invalid_argument("observation depth does not match distance classes");
    }
    double belief = 1.0;
    for (std::size_t L = 0; L < obs.size(); ++L) {
        const auto& cls = classes.members[L];
        int count = 0;
        for (int j : cls) {
            count += b.at(static_cast<std::size_t>(j));
        }
        if (count != obs[L]) {
            return 0.0;
        }
        belief *= inverse_binomial(static_cast<int>(cls.size()), obs[L]);
    }
    return belief;
}

/// Expected reward of access decision `a` under the closed-form belief.
/// The interference term runs over L = 0..D; the L = 0 term is the cell's
/// own phi_{i,i} weighted by o_0.
inline double expected_local_reward(int a, const ObservationVector& obs, const DistanceClasses& classes,
                                    const RewardParams& params)
{
    if (a == 0) {
        return 0.0;
    }
    if (obs.size() != classes.members.size()) {
        throw std::invalid_argument("observation depth does not match distance classes");
    }
    double interference = 0.0;
    for (std::size_t L = 0; L < obs.size(); ++L) {
        // A cluster promoted alone leaves an empty class at that level.
        const int n = classes.size(static_cast<int>(L));
        if (n == 0) {
            if (obs[L] != 0) {
                throw std::invalid_argument("nonzero count for an empty distance class");
            }
            continue;
        }
        interference += posterior_marginal(obs[L], n) * classes.interference[L];
    }
    return params.rho_idle * (1 - obs[0]) + params.rho_busy * obs[0] - params.lambda * interference;
}

/// Myopic optimum; a zero expected reward resolves to no access.
inline int optimal_access(const ObservationVector& obs, const DistanceClasses& classes, const RewardParams& params)
{
    return expected_local_reward(1, obs, classes, params) > 0.0 ? 1 : 0;
}

/// Sum over cells of max{0, r_i(1, sigma_i)}.
inline double network_reward(const std::vector<ObservationVector>& all_obs, const DistanceClassIndex& index,
                             const RewardParams& params)
{
    if (static_cast<int>(all_obs.size()) != index.n_cells()) {
        throw std::invalid_argument("one observation vector per cell expected");
    }
    double total = 0.0;
    for (int i = 0; i < index.n_cells(); ++i) {
        total += std::max(0.0, expected_local_reward(1, all_obs[i], index[i], params));
    }
    return total;
}

/// Ground-truth local reward r_i(1, b) under the true state.
inline double true_local_reward(int i, const NetworkState& b, const InterferenceMatrix& phi, const RewardParams& params)
{
    double interference = 0.0;
    for (int j = 0; j < phi.size(); ++j) {
        if (b[j]) {
            interference += phi(i, j);
        }
    }
    return params.rho_idle * (1 - b[i]) + params.rho_busy * b[i] - params.lambda * interference;
}

/// Network reward of decisions `a` when the state is `b`.
inline double realized_reward(const AccessDecision& a, const NetworkState& b, const InterferenceMatrix& phi,
                              const RewardParams& params)
{
    if (a.size() != b.size() || static_cast<int>(b.size()) != phi.size()) {
        throw std::invalid_argument("decision, state and interference matrix sizes differ");
    }
    double total = 0.0;
    for (int i = 0; i < phi.size(); ++i) {
        if (a[i]) {
            total += true_local_reward(i, b, phi, params);
        }
    }
    return total;
}

/// Reward with full state knowledge: sum over cells of max{0, r_i(1, b)}.
inline double full_info_network_reward(const NetworkState& b, const InterferenceMatrix& phi, const RewardParams& params)
{
    double total = 0.0;
    for (int i = 0; i < phi.size(); ++i) {
        total += std::max(0.0, true_local_reward(i, b, phi, params));
    }
    return total;
}

} // namespace msense
