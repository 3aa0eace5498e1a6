#ifndef DISCOVER_CLI_HPP
#define DISCOVER_CLI_HPP

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "discover/core.hpp"

namespace discover::cli {

// Stable process exit codes.
enum ExitCode : int {
    kOk = 0,
    kInvalidConstruction = 1,
    kConfigError = 2,
    kIoError = 3,
    kCorruptLog = 4,
    kInvariantBreach = 5,
};

struct Histogram {
    int step_index{};
    std::vector<double> bin_edges; // bins + 1 ascending edges
    std::vector<std::size_t> counts;
};

struct TrajectoryPoint {
    int step_index{};
    double best_bound{};
    double best_reward{};
};

struct ReportBundle {
    std::vector<Histogram> per_step_histograms;
    std::vector<TrajectoryPoint> best_trajectory;
};

// Equal-width histogram over the rewards' own [min, max]; every reward
// lands in exactly one bin.
auto histogram(int step_index, std::vector<double> const& rewards, std::size_t bins) -> Histogram;

auto build_report(std::vector<StepLog> const& logs, std::vector<int> const& steps, std::size_t bins) -> ReportBundle;

// Entry point shared by the executable and the tests. `args` excludes the
// program name.
auto main(std::vector<std::string> const& args, std::ostream& out, std::ostream& err) -> int;

} // namespace discover::cli

#endif
