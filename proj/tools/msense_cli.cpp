// msense: command-line driver for the multi-scale spectrum sensing toolkit.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "msense/msense.hpp"
#include "msense/validation.hpp"

namespace {

using namespace msense;

struct SharedOptions {
    int rows = 4;
    int cols = 4;
    double p = 0.1;
    double q = 0.1;
    double rho_idle = 1.0;
    double rho_busy = 0.0;
    double lambda = 1.0;
    double alpha = 2.0;
    std::uint64_t seed = 7;
    std::string blockage = "line-of-sight";
    std::string tie_break = "lowest";
    std::string regular_pairing = "in-order";
};

void add_shared(CLI::App* cmd, SharedOptions& o)
{
    cmd->add_option("--rows", o.rows, "Grid rows")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--cols", o.cols, "Grid columns")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--p", o.p, "Idle-to-busy transition probability")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--q", o.q, "Busy-to-idle transition probability")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--rho-i", o.rho_idle, "SU throughput on an idle channel")->capture_default_str();
    cmd->add_option("--rho-b", o.rho_busy, "SU throughput on a busy channel")->capture_default_str();
    cmd->add_option("--lambda", o.lambda, "Interference price")->capture_default_str();
    cmd->add_option("--alpha", o.alpha, "Path-loss exponent")->capture_default_str();
    cmd->add_option("--seed", o.seed, "Master random seed")->capture_default_str();
    cmd->add_option("--blockage", o.blockage, "Wall semantics")
        ->capture_default_str()
        ->check(CLI::IsMember({"line-of-sight", "adjacent"}));
    cmd->add_option("--tie-break", o.tie_break, "Greedy tie-break order")
        ->capture_default_str()
        ->check(CLI::IsMember({"lowest", "highest"}));
    cmd->add_option("--regular-pairing", o.regular_pairing, "Pairing order of the regular baseline tree")
        ->capture_default_str()
        ->check(CLI::IsMember({"in-order", "alternating"}));
}

BlockageRule blockage_rule(const SharedOptions& o)
{
    return o.blockage == "adjacent" ? BlockageRule::adjacent_only : BlockageRule::line_of_sight;
}

TieBreak tie_break(const SharedOptions& o)
{
    return o.tie_break == "highest" ? TieBreak::highest_ids : TieBreak::lowest_ids;
}

RegularPairing regular_pairing(const SharedOptions& o)
{
    return o.regular_pairing == "alternating" ? RegularPairing::alternating_axes : RegularPairing::in_order;
}

/// Invalid option values discovered after parsing; reported as usage errors.
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

template <class F>
auto as_usage(F&& f)
{
    try {
        return f();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

BlockageLayout load_or_sample_layout(const GridTopology& grid, const std::string& layout_path, double p_block,
                                     std::uint64_t seed)
{
    if (!layout_path.empty()) {
        std::ifstream in(layout_path);
        if (!in) {
            throw std::runtime_error("cannot open layout file " + layout_path);
        }
        return read_layout(in, grid);
    }
    auto rng = RandomStream::derive(seed, {0, 0});
    return sample_blockage(grid, p_block, rng);
}

std::ostream& open_output(const std::string& path, std::ofstream& file)
{
    if (path.empty() || path == "-") {
        return std::cout;
    }
    file.open(path);
    if (!file) {
        throw std::runtime_error("cannot write " + path);
    }
    return file;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multi-scale spectrum sensing: aggregation trees, closed-form rewards, blockage sweeps"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a config file ([sweep], [tree], ... sections)");

    // sweep
    SharedOptions sweep_opt;
    std::string p_block_text = "0:1:0.1";
    int trials = 200;
    int slots = 10000;
    std::string scheme = "both";
    std::string evaluation = "closed-form";
    std::string bound_mode = "auto";
    int mc_samples = 5000;
    int jobs = 1;
    std::string out_path = "-";
    auto* sweep = app.add_subcommand("sweep", "Reward versus blockage probability, CSV output");
    add_shared(sweep, sweep_opt);
    // Config files turn a bare a,b,c into an array; join it back.
    sweep->add_option("--p-block", p_block_text, "Blockage probabilities: start:stop:step or a,b,c")
        ->capture_default_str()
        ->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::Join);
    sweep->add_option("--trials", trials, "Blockage layouts per point")->capture_default_str()->check(CLI::PositiveNumber);
    sweep->add_option("--slots", slots, "Slots per trial (simulation evaluation)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sweep->add_option("--tree", scheme, "Tree scheme")->capture_default_str()->check(CLI::IsMember({"regular", "greedy", "both"}));
    sweep->add_option("--eval", evaluation, "Reward evaluation path")
        ->capture_default_str()
        ->check(CLI::IsMember({"closed-form", "simulation"}));
    sweep->add_option("--bound", bound_mode, "Upper-bound evaluation")
        ->capture_default_str()
        ->check(CLI::IsMember({"auto", "exact", "mc"}));
    sweep->add_option("--mc-samples", mc_samples, "Monte Carlo samples for the bound")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sweep->add_option("--jobs", jobs, "Worker threads")->capture_default_str()->envname("MSENSE_JOBS")->check(CLI::PositiveNumber);
    sweep->add_option("--out", out_path, "CSV output path ('-' for stdout)")->capture_default_str();

    // tree
    SharedOptions tree_opt;
    std::string tree_scheme = "greedy";
    double tree_p_block = 0.0;
    std::string tree_layout;
    std::string tree_layout_out;
    auto* tree = app.add_subcommand("tree", "Build and print an aggregation tree");
    add_shared(tree, tree_opt);
    tree->add_option("--tree", tree_scheme, "Tree scheme")->capture_default_str()->check(CLI::IsMember({"regular", "greedy"}));
    tree->add_option("--p-block", tree_p_block, "Blockage probability for a sampled layout")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    tree->add_option("--layout", tree_layout, "Read walls from this layout file instead of sampling")->check(CLI::ExistingFile);
    tree->add_option("--write-layout", tree_layout_out, "Write the layout used to this file");

    // bound
    SharedOptions bound_opt;
    double bound_p_block = 0.0;
    std::string bound_layout;
    std::string bound_eval = "exact";
    int bound_samples = 5000;
    auto* bound = app.add_subcommand("bound", "Full-information upper bound and tree rewards for one layout");
    add_shared(bound, bound_opt);
    bound->add_option("--p-block", bound_p_block, "Blockage probability for a sampled layout")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    bound->add_option("--layout", bound_layout, "Read walls from this layout file instead of sampling")->check(CLI::ExistingFile);
    bound->add_option("--bound", bound_eval, "Evaluation")->capture_default_str()->check(CLI::IsMember({"exact", "mc"}));
    bound->add_option("--mc-samples", bound_samples, "Monte Carlo samples")->capture_default_str()->check(CLI::PositiveNumber);

    // validate
    std::string suite = "all";
    std::uint64_t validate_seed = 1;
    std::size_t validate_slots = 200000;
    auto* validate = app.add_subcommand("validate", "Run the oracle suites");
    validate->add_option("--suite", suite, "Suite to run")->capture_default_str()->check(CLI::IsMember({"theorem1", "lemma1", "all"}));
    validate->add_option("--seed", validate_seed, "Random seed")->capture_default_str();
    validate->add_option("--slots", validate_slots, "Simulated slots for the average-reward suite")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n" << app.help();
        return 2;
    }

    try {
        if (*sweep) {
            ExperimentConfig config = as_usage([&] {
                ExperimentConfig c;
                c.grid = GridTopology(sweep_opt.rows, sweep_opt.cols);
                c.markov = {sweep_opt.p, sweep_opt.q};
                c.reward = {sweep_opt.rho_idle, sweep_opt.rho_busy, sweep_opt.lambda};
                c.alpha = sweep_opt.alpha;
                c.p_blocks = parse_range(p_block_text);
                c.trials = trials;
                c.slots = slots;
                c.scheme = scheme == "regular" ? TreeScheme::regular
                                               : (scheme == "greedy" ? TreeScheme::greedy : TreeScheme::both);
                c.evaluation = evaluation == "simulation" ? Evaluation::simulation : Evaluation::closed_form;
                c.bound = bound_mode == "exact" ? BoundMode::exact : (bound_mode == "mc" ? BoundMode::mc : BoundMode::automatic);
                c.mc_samples = mc_samples;
                c.seed = sweep_opt.seed;
                c.jobs = jobs;
                c.blockage_rule = blockage_rule(sweep_opt);
                c.tie_break = tie_break(sweep_opt);
                c.regular_pairing = regular_pairing(sweep_opt);
                c.validate();
                return c;
            });
            const auto result = run_sweep(config);
            std::ofstream file;
            write_sweep_csv(open_output(out_path, file), result);
            return 0;
        }

        if (*tree) {
            const auto grid = as_usage([&] { return GridTopology(tree_opt.rows, tree_opt.cols); });
            as_usage([&] {
                if (!(tree_opt.alpha > 0.0)) {
                    throw std::invalid_argument("alpha must be positive");
                }
                return 0;
            });
            const auto layout = load_or_sample_layout(grid, tree_layout, tree_p_block, tree_opt.seed);
            if (!tree_layout_out.empty()) {
                std::ofstream lf(tree_layout_out);
                write_layout(lf, grid, layout);
            }
            const auto built = tree_scheme == "regular"
                                   ? build_regular_tree(grid, regular_pairing(tree_opt))
                                   : build_greedy_tree(build_interference_matrix(grid, layout, tree_opt.alpha,
                                                                                 blockage_rule(tree_opt)),
                                                       tie_break(tree_opt));
            std::cout << "# " << tree_scheme << " tree, " << grid.rows << "x" << grid.cols << ", depth "
                      << built.depth() << ", " << layout.size() << " walls\n";
            write_tree(std::cout, built);
            return 0;
        }

        if (*bound) {
            const auto grid = as_usage([&] { return GridTopology(bound_opt.rows, bound_opt.cols); });
            const MarkovParams markov{bound_opt.p, bound_opt.q};
            const RewardParams reward{bound_opt.rho_idle, bound_opt.rho_busy, bound_opt.lambda};
            as_usage([&] {
                markov.validate();
                reward.validate();
                return 0;
            });
            const auto layout = load_or_sample_layout(grid, bound_layout, bound_p_block, bound_opt.seed);
            const auto phi = build_interference_matrix(grid, layout, bound_opt.alpha, blockage_rule(bound_opt));
            const double pi = steady_state_probability(markov);
            std::cout.precision(12);
            if (bound_eval == "exact") {
                std::cout << "upper_bound " << full_info_upper_bound_exact(phi, reward, pi) << "\n";
            } else {
                auto rng = RandomStream::derive(bound_opt.seed, {1});
                const auto est = full_info_upper_bound_mc(phi, reward, pi, static_cast<std::size_t>(bound_samples), rng);
                std::cout << "upper_bound " << est.mean << " stderr " << est.std_error << "\n";
            }
            const auto regular_tree = build_regular_tree(grid, regular_pairing(bound_opt));
            std::cout << "regular " << closed_form_average_reward(build_distance_index(regular_tree, phi), reward, pi)
                      << "\n";
            std::cout << "greedy "
                      << closed_form_average_reward(
                             build_distance_index(build_greedy_tree(phi, tie_break(bound_opt)), phi), reward, pi)
                      << "\n";
            return 0;
        }

        if (*validate) {
            bool ok = true;
            if (suite == "theorem1" || suite == "all") {
                validation::BeliefSuiteOptions opt;
                opt.seed = validate_seed;
                const auto rep = validation::run_belief_suite(opt);
                const bool pass = rep.max_error() <= 1e-12 && rep.observations_consistent;
                std::cout << "theorem1: " << rep.posteriors_checked << " posteriors, " << rep.histories_checked
                          << " histories, max error vs enumeration " << rep.max_error_enumeration
                          << ", vs filter " << rep.max_error_filter << (pass ? "  PASS" : "  FAIL") << "\n";
                ok = ok && pass;
            }
            if (suite == "lemma1" || suite == "all") {
                validation::AverageRewardOptions opt;
                opt.seed = validate_seed;
                opt.slots = validate_slots;
                for (const auto& c : validation::run_average_reward_suite(opt)) {
                    const bool pass = c.z_score() <= 3.0;
                    std::cout << "lemma1 " << c.scheme << ": closed form " << c.closed_form << ", simulated "
                              << c.simulated.mean << " +/- " << c.simulated.std_error << " (z = " << c.z_score()
                              << ")" << (pass ? "  PASS" : "  FAIL") << "\n";
                    ok = ok && pass;
                }
            }
            return ok ? 0 : 1;
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
