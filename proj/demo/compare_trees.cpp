// Builds both trees on one random blockage layout and prints their
// long-run rewards next to the full-information bound.

#include <iostream>

#include "msense/msense.hpp"

int main()
{
    using namespace msense;

    const GridTopology grid(4, 4);
    auto rng = RandomStream::derive(2024, {0});
    const auto layout = sample_blockage(grid, 0.5, rng);
    const auto phi = build_interference_matrix(grid, layout, 2.0);

    const RewardParams reward{1.0, 0.0, 1.0};
    const double pi = steady_state_probability({0.1, 0.1});

    const auto regular = build_regular_tree(grid);
    const auto greedy = build_greedy_tree(phi);

    std::cout << layout.size() << " walls\n";
    write_layout(std::cout, grid, layout);
    std::cout << "\ngreedy tree:\n";
    write_tree(std::cout, greedy);
    std::cout << "\nregular     " << closed_form_average_reward(build_distance_index(regular, phi), reward, pi) << '\n'
              << "greedy      " << closed_form_average_reward(build_distance_index(greedy, phi), reward, pi) << '\n'
              << "upper bound " << full_info_upper_bound_exact(phi, reward, pi) << '\n';
}
