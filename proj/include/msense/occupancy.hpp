#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "msense/errors.hpp"
#include "msense/random.hpp"

namespace msense {

/// Two-state Markov chain for the PU occupancy of one cell.
/// p = P(idle -> busy), q = P(busy -> idle) per slot.
struct MarkovParams {
    double p = 0.1;
    double q = 0.1;

    void validate() const
    {
        if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0)) {
            throw std::invalid_argument("Markov transition probabilities must lie in [0, 1]");
        }
        if (p + q <= 0.0) {
            throw DegenerateParameters("p = q = 0: occupancy chain has no unique steady state");
        }
    }
};

/// Occupancy bit per cell, 1 = busy.
using NetworkState = std::vector<std::uint8_t>;

inline int occupied_count(const NetworkState& b)
{
    return std::accumulate(b.begin(), b.end(), 0);
}

/// pi_B = p / (p + q).
inline double steady_state_probability(const MarkovParams& params)
{
    params.validate();
    return params.p / (params.p + params.q);
}

/// One slot of the per-cell chains, independent across cells.
inline NetworkState step(const NetworkState& state, const MarkovParams& params, RandomStream& rng)
{
    NetworkState next(state.size());
    for (std::size_t i = 0; i < state.size(); ++i) {
        next[i] = state[i] ? (rng.bernoulli(params.q) ? 0 : 1) : (rng.bernoulli(params.p) ? 1 : 0);
    }
    return next;
}

/// I.i.d. Bernoulli(pi) bits; the occupancy law at steady state.
inline NetworkState sample_bernoulli_state(std::size_t n_cells, double pi, RandomStream& rng)
{
    NetworkState b(n_cells);
    for (auto& bit : b) {
        bit = rng.bernoulli(pi) ? 1 : 0;
    }
    return b;
}

inline NetworkState sample_steady_state(std::size_t n_cells, const MarkovParams& params, RandomStream& rng)
{
    return sample_bernoulli_state(n_cells, steady_state_probability(params), rng);
}

/// Steady-state draw followed by `burn_in` chain steps.
inline NetworkState initial_state(std::size_t n_cells, const MarkovParams& params, RandomStream& rng,
                                  std::size_t burn_in = 0)
{
    NetworkState b = sample_steady_state(n_cells, params, rng);
    for (std::size_t t = 0; t < burn_in; ++t) {
        b = step(b, params, rng);
    }
    return b;
}

} // namespace msense
