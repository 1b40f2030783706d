#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "parlearn/linear_fn.hpp"
#include "parlearn/oracle.hpp"

namespace parlearn {

/// ceil(32 ln(2|C| / delta) / (1 - eta_bound - 1/q)^2).
std::size_t selection_sample_count(std::size_t num_candidates, double delta, double eta_bound, std::uint64_t q);

struct SelectionResult {
    LinearFn best;
    /// Distinct candidates in first-seen order, with their empirical agreement.
    std::vector<LinearFn> candidates;
    std::vector<double> agreement;
    std::size_t samples = 0;
};

/// Empirical-agreement argmax over the distinct candidates, all scored on
/// the same Q examples; ties go to the earliest candidate. Throws
/// EmptyCandidateSet for an empty pool.
SelectionResult hypothesis_select(const std::vector<LinearFn>& candidates, ExampleOracle& oracle, double eta_bound,
                                  double delta);

struct ModeResult {
    std::optional<LinearFn> mode;
    std::size_t count = 0;
    /// Runs that returned a hypothesis; runs that threw are not counted.
    std::size_t successes = 0;
    std::size_t runs = 0;
    std::size_t reps = 0;
    /// count > reps / 2.
    bool majority = false;
};

/// Runs learner(r) for r = 0, 1, ... up to reps times and tallies outputs.
/// Stops as soon as one hypothesis has been returned more than reps/2 times.
/// Library errors thrown by a run count as a failed run.
ModeResult boost_mode(const std::function<LinearFn(std::size_t)>& learner, std::size_t reps);

} // namespace parlearn
