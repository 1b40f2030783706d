#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "parlearn/approximator.hpp"
#include "parlearn/gamma.hpp"
#include "parlearn/oracle.hpp"

namespace parlearn {

/// Per-sparsity estimates of the approximator's expected output.
///
/// values[d - 1] estimates Psi(d) for d in [1, n]; Psi(0) is 0.
struct PsiTable {
    std::uint64_t q = 2;
    std::size_t n = 0;
    double eta_bound = 0;
    double h = 0;
    std::string gamma;
    std::string approximator;
    std::uint64_t seed = 0;
    std::size_t trials_per_d = 0;
    std::vector<double> values;

    /// Psi'(d); 0 for d = 0. Throws OutOfDomain for d > n.
    double at(std::size_t d) const;

    /// Key order q, n, eta_bound, h, gamma, approximator, seed, trials_per_d,
    /// values; reals carry 12 significant digits.
    std::string to_json() const;
    /// Throws ParseError on malformed documents.
    static PsiTable from_json(const std::string& text);

    friend bool operator==(const PsiTable&, const PsiTable&) = default;
};

/// ceil(n^2 / (2 h^2) * ln(4n / delta)).
std::size_t psi_table_trials(std::size_t n, double h, double delta);
/// ceil(n^2 / (2 h^2) * ln(2 / delta)).
std::size_t psi_estimate_iterations(std::size_t n, double h, double delta);

struct PsiOptions {
    /// Collapse trial and iteration counts to 1 for approximators whose
    /// output is a fixed function of d.
    bool fast_mode = true;
    /// Entries above this sparsity are not estimated (left at Delta(d)); 0 builds all.
    std::size_t max_d = 0;
};

/// For each d, averages t accepted runs of A on uniformly random d-sparse
/// targets observed at noise eta_bound. A run is accepted iff
/// d <= D <= Delta(d). Throws RejectionStall when fewer than half of a
/// 1000-attempt window is accepted.
PsiTable build_psi_table(const Approximator& A, const GammaSpec& gamma, const FieldCtx& ctx, std::size_t n,
                         double eta_bound, double h, double delta, std::uint64_t seed,
                         const PsiOptions& options = {});

/// Mean of A over tau independently relabeled (permuted and rescaled) views
/// of the oracle.
double estimate_psi_of_target(const Approximator& A, const ExampleOracle& oracle, std::size_t n, double h,
                              double delta, std::uint64_t seed, const PsiOptions& options = {});

/// Smallest k in [m, min(floor(Delta(m)) + 1, n - 1)] with
/// Psi'(k+1) - Psi'(k) >= 7/(8n), or Psi'(k+1) - Psi'(k-1) >= 7/(8n) when
/// binary. Throws PreconditionFailed for m outside [1, gamma^{-1}(gamma^{-1}(n))]
/// and NoGapFound when no k qualifies.
std::size_t find_gap_k(const PsiTable& table, const GammaSpec& gamma, std::size_t m, bool binary);

/// Largest m find_gap_k accepts: floor(gamma^{-1}(gamma^{-1}(n))).
std::size_t max_gap_start(const GammaSpec& gamma, std::size_t n);

/// Default m = max(1, floor(gamma^{-1}(gamma^{-1}(ceil(log2 n))))).
std::size_t default_gap_start(const GammaSpec& gamma, std::size_t n);

} // namespace parlearn
