#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "parlearn/field.hpp"
#include "parlearn/gamma.hpp"
#include "parlearn/oracle.hpp"

namespace parlearn {

struct ApproxTraits {
    std::string descriptor;
    std::size_t examples_per_call = 0;
    double ms_per_call = 0;
    /// Declared probability of leaving the contract band.
    double failure_bound = 0;
    /// Output is a fixed function of the target's sparsity whenever the call
    /// succeeds; estimators over such outputs need a single sample.
    bool deterministic_given_d = false;
};

/// A sparsity approximator: (oracle access, n, per-call seed) -> D.
///
/// Outputs are clipped to [0, n]. Same stream and seed give the same D.
class Approximator {
public:
    using Fn = std::function<std::int64_t(ExampleOracle&, std::size_t, std::uint64_t)>;

    Approximator(Fn fn, ApproxTraits traits, std::shared_ptr<const Approximator> unclamped = nullptr);

    std::int64_t operator()(ExampleOracle& oracle, std::size_t n, std::uint64_t seed) const;

    const ApproxTraits& traits() const noexcept { return traits_; }
    /// The gamma-approximator under a clamp_to_delta wrapper, else *this.
    const Approximator& unclamped() const noexcept { return unclamped_ ? *unclamped_ : *this; }

private:
    Fn fn_;
    ApproxTraits traits_;
    std::shared_ptr<const Approximator> unclamped_;
};

enum class CheatMode { Exact, Midpoint, UniformInBand, LowEdge, HighEdge };

CheatMode parse_cheat_mode(const std::string& name);
std::string to_string(CheatMode mode);

struct Band {
    std::int64_t lo;
    std::int64_t hi;
};

/// [ceil(gamma^{-1}(d)), floor(gamma(d))] with outward slack; [0, 0] for d = 0.
Band gamma_band(const GammaSpec& gamma, std::size_t d);

/// Test-only validation approximator. It reads the sparsity of whatever
/// function the stream is consistent with (through PlantedAccess) and answers
/// inside the gamma band per mode. Exact answers d itself. Streams with
/// uniform labels are answered as if d = n. Streams without a planted target
/// raise ContractViolation. Each call still draws examples_per_call examples.
Approximator cheat_band_approximator(const GammaSpec& gamma, CheatMode mode, std::size_t examples_per_call = 0);

/// Q = ceil(ln(|C| / delta) / (1 - eta_bound - 1/q)^2).
std::size_t brute_force_sample_count(double num_candidates, double delta, double eta_bound, std::uint64_t q);

/// Enumerates all q^n linear functions against Q examples and returns the
/// sparsity of the best-agreeing one. Throws TooLargeToEnumerate when q^n > 2^20.
Approximator brute_force_approximator(const FieldCtx& ctx, std::size_t n, double eta_bound, double delta);

/// D' = min(floor(gamma(D)), n): turns a gamma-approximator into one with
/// d(f) <= D' <= Delta(d(f)) <= n.
Approximator clamp_to_delta(const Approximator& inner, const GammaSpec& gamma);

/// ceil(18 ln(1/delta)).
std::size_t boost_reps(double delta);

/// Lower median of boost_reps(target_delta) independent calls.
Approximator boost_median(const Approximator& inner, double target_delta);

/// 1 / (q n^7), the per-call failure budget used inside reductions.
double default_inner_delta(std::uint64_t q, std::size_t n);

} // namespace parlearn
