#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "parlearn/approximator.hpp"
#include "parlearn/gamma.hpp"
#include "parlearn/oracle.hpp"
#include "parlearn/psi.hpp"
#include "parlearn/selection.hpp"
#include "parlearn/sparse_reduction.hpp"

namespace parlearn {

/// Overall failure probability plus cooperative caps (0 = unlimited).
struct LearnerBudget {
    double delta = 0.1;
    /// Repetitions for mode boosting; 0 derives ceil(18 ln(1/delta)).
    std::size_t boost_reps = 0;
    std::uint64_t max_examples = 0;
    std::uint64_t max_wall_ms = 0;

    std::size_t reps() const;
    /// A meter enforcing the caps, or nullptr when both are unlimited.
    std::shared_ptr<BudgetMeter> meter() const;
};

/// Learner for a target promised to be k-sparse: (stream, seed) -> hypothesis.
using SparseLearner = std::function<LinearFn(ExampleOracle&, std::uint64_t)>;

/// Learns a d-sparse target with a k-sparse learner: draws k - d distinct
/// indices, learns f + sum x_ij from the label-shifted stream, subtracts the
/// shift, and takes the mode over repetitions. d = k runs the learner once.
/// Throws PreconditionFailed unless d <= k <= n and 12 Gamma(d)^2 <= n, and
/// NoMajority when no hypothesis wins more than half of the repetitions.
LinearFn learn_d_sparse_via_shift(const SparseLearner& learner_k, std::size_t k, std::size_t d,
                                  ExampleOracle& oracle, const GammaSpec& gamma, const LearnerBudget& budget,
                                  std::uint64_t seed);

/// N = ceil(12 Gamma(n)^2).
std::size_t padded_dimension(const GammaSpec& gamma, std::size_t n);

/// A view of the oracle padded with uniform coordinates up to N.
std::pair<ExampleOracle, std::size_t> pad_to_big_n(const ExampleOracle& oracle, const GammaSpec& gamma,
                                                   std::uint64_t seed);

/// j * eta_bound / steps for j = 1..steps.
std::vector<double> eta_grid(double eta_bound, std::size_t steps);

struct SweepResult {
    LinearFn best;
    std::vector<LinearFn> pool;
    std::size_t grid_steps = 0;
    std::size_t failed_runs = 0;
};

/// Runs learn_at_eta_b on the stream magnified from each grid value to
/// eta_bound and selects among all returned hypotheses on the raw stream.
/// grid_steps = 0 sizes the grid as min(1 + ceil(10 Q), 10^4) from the
/// example count Q of a pilot run at eta_bound. Throws AllRunsFailed.
SweepResult eta_sweep(const SparseLearner& learn_at_eta_b, ExampleOracle& oracle, std::size_t grid_steps,
                      double delta, std::uint64_t seed);

struct FullOptions {
    ReductionOptions reduction;
    LearnerBudget budget;
};

struct PoolEntry {
    std::size_t d = 0;
    std::size_t k = 0;
    LinearFn hypothesis;
};

struct FullResult {
    LinearFn best;
    std::size_t N = 0;
    std::vector<PoolEntry> pool;
    /// Agreement of each distinct pooled hypothesis, as scored by selection.
    SelectionResult selection;
    std::size_t discarded = 0;
    std::vector<std::pair<std::size_t, std::string>> failures;

    /// One JSON object per distinct candidate: coefficients and agreement.
    std::string pool_jsonl() const;
};

/// Pads to N = 12 Gamma(n)^2, builds one table at dimension N, and for
/// every d in [1, n] runs the shift reduction with the k found from m = d.
/// Hypotheses touching padded coordinates are discarded, the zero function
/// is always a candidate, and the winner is selected on the raw stream.
FullResult learn_parity_full(const Approximator& A, const GammaSpec& gamma, ExampleOracle& oracle,
                             std::uint64_t seed, const FullOptions& options, const PsiTable* prebuilt = nullptr);

} // namespace parlearn
