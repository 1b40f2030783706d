#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "parlearn/approximator.hpp"
#include "parlearn/gamma.hpp"
#include "parlearn/linear_fn.hpp"
#include "parlearn/oracle.hpp"
#include "parlearn/psi.hpp"

namespace parlearn {

enum class Verdict { Relevant, Irrelevant, Undecided };
enum class RelevanceMethod { Psi, Distinguisher };
enum class CoeffMethod { Psi, Gauss };

std::string to_string(Verdict v);
std::string to_string(RelevanceMethod m);
std::string to_string(CoeffMethod m);
RelevanceMethod parse_relevance_method(const std::string& name);
CoeffMethod parse_coeff_method(const std::string& name);

/// Per-index verdicts with the statistics they were read from.
///
/// Psi method: score[i] estimates Psi at f + x_i and score_alpha[i] at
/// f + alpha x_i (q > 2). Distinguisher method: score[i] is the fraction of
/// runs on the x_i-randomized stream answered like a uniform-label stream.
struct RelevanceReport {
    RelevanceMethod method = RelevanceMethod::Psi;
    std::size_t n = 0;
    std::size_t k = 0;
    Elem alpha = 0;
    double half_width = 0;
    /// Psi: band centres Psi'(k-1), Psi'(k), Psi'(k+1).
    /// Distinguisher: threshold gamma(k1) in centre_mid.
    double centre_low = 0;
    double centre_mid = 0;
    double centre_high = 0;
    std::vector<Verdict> verdicts;
    std::vector<double> score;
    std::vector<double> score_alpha;

    std::vector<std::size_t> relevant() const;
    std::vector<std::size_t> irrelevant() const;
    std::size_t undecided() const;
    std::string to_json() const;
};

struct ReductionOptions {
    RelevanceMethod relevance = RelevanceMethod::Psi;
    CoeffMethod coeff = CoeffMethod::Psi;
    PsiOptions psi;
    /// Repetitions per distinguisher decision; 0 derives 18 ln(2n/delta).
    std::size_t distinguisher_trials = 25;
};

/// Classifies each x_i by estimating Psi at f + x_i (and f + alpha x_i for
/// q > 2, alpha = 2) to within 1/(16n) and matching against bands of
/// half-width 1/(8n). Binary: Psi'(k-1) band -> relevant, Psi'(k+1) band ->
/// irrelevant. Otherwise: either estimate in the Psi'(k) band -> relevant,
/// both in the Psi'(k+1) band -> irrelevant. Throws IntervalOverlap when
/// the two bands compared are not disjoint.
RelevanceReport classify_variables_psi(const Approximator& A, const PsiTable& table, std::size_t k,
                                       const ExampleOracle& oracle, std::size_t n, double delta, std::uint64_t seed,
                                       const PsiOptions& options = {});

/// Distinguisher B answers "k1" iff the raw approximator output is at most
/// gamma(k1). B is calibrated on uniform-label streams, checked on the raw
/// stream, and then run on each coordinate-randomized stream; x_i is
/// relevant iff the majority answer switches to the uniform-label answer.
/// Throws PreconditionFailed unless gamma(gamma(k1) + 1) <= n,
/// CalibrationAmbiguous when uniform-label answers are unstable or coincide
/// with "k1", and ContractViolation when the raw stream is not answered "k1".
RelevanceReport identify_relevant_distinguisher(const Approximator& A, const GammaSpec& gamma, std::size_t n,
                                                std::size_t k1, const ExampleOracle& oracle, std::size_t trials,
                                                double delta, std::uint64_t seed);

/// For each relevant i and alpha != 0, estimates Psi at f - alpha x_i + x_j
/// for the smallest non-relevant j; the coefficient is the unique alpha whose
/// estimate lands in the Psi'(k) band. q = 2 returns all-ones on the set.
/// Throws NoIrrelevantIndex and AmbiguousCoefficient.
LinearFn recover_coefficients_psi(const Approximator& A, const PsiTable& table, std::size_t k,
                                  const ExampleOracle& oracle, const std::vector<std::size_t>& relevant,
                                  std::size_t n, double delta, std::uint64_t seed, const PsiOptions& options = {});

/// ceil(4 (1/(1 - eta_bound))^k ln(3/delta)).
std::size_t gauss_iterations(std::size_t k, double eta_bound, double delta);

/// Unique solution of M x = rhs over F_q (M square, row-major), or nullopt
/// when M is singular.
std::optional<std::vector<Elem>> solve_linear_system(const FieldCtx& ctx, std::vector<std::vector<Elem>> M,
                                                     std::vector<Elem> rhs);

struct GaussResult {
    /// Distinct solutions, in the order first found.
    std::vector<LinearFn> candidates;
    std::size_t iterations = 0;
    std::size_t singular = 0;
    /// Iteration (1-based) at which each candidate first appeared.
    std::vector<std::size_t> first_seen;
};

/// Repeatedly draws |relevant| examples, solves the system restricted to the
/// relevant coordinates, and re-substitutes every solution into its system
/// (ContractViolation on mismatch). Iterations default to gauss_iterations.
GaussResult recover_coefficients_gauss(const std::vector<std::size_t>& relevant, ExampleOracle& oracle,
                                       double eta_bound, double delta, std::size_t iterations = 0);

struct LearnResult {
    LinearFn hypothesis;
    std::size_t k = 0;
    RelevanceReport report;
    std::vector<LinearFn> candidates;
};

/// Learns a target promised to lie in Lin(F, k) with a prebuilt table.
/// Undecided verdicts raise ContractViolation.
LearnResult learn_k_sparse(const Approximator& A, const GammaSpec& gamma, const PsiTable& table, std::size_t k,
                           ExampleOracle& oracle, double delta, std::uint64_t seed, const ReductionOptions& options);

/// Builds (or reuses) the table with h = 1/(16n), locates k = find_gap_k(m),
/// and learns. NoGapFound and IntervalOverlap surface as ContractViolation.
LearnResult learn_sparse_k(const Approximator& A, const GammaSpec& gamma, std::size_t m, ExampleOracle& oracle,
                           double delta, std::uint64_t seed, const ReductionOptions& options,
                           const PsiTable* prebuilt = nullptr);

/// Table accuracy used by the reductions: 1/(16n).
inline double reduction_table_h(std::size_t n) { return 1.0 / (16.0 * static_cast<double>(n)); }

} // namespace parlearn
