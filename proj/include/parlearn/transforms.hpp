#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "parlearn/field.hpp"
#include "parlearn/linear_fn.hpp"

namespace parlearn {

struct LabeledExample {
    std::vector<Elem> a;
    Elem b = 0;

    friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

/// Re-randomization probability rho that raises noise from eta_assumed to
/// eta_target while keeping wrong labels uniform:
///   (1 - eta_target) = (1 - eta_assumed)(1 - rho) + eta_assumed * rho / (q - 1).
/// At q = 2 this is (eta_target - eta_assumed) / (1 - 2 eta_assumed).
/// Throws BadRates when rho falls outside [0, 1].
double magnify_probability(const FieldCtx& ctx, double eta_assumed, double eta_target);

/// With probability rho, replace b by a uniform element of F \ {b}.
LabeledExample magnify_noise(LabeledExample ex, double eta_assumed, double eta_target, const FieldCtx& ctx,
                             Rng& rng);

/// ((v_1^{-1} a_{phi^{-1}(1)}, ..., v_n^{-1} a_{phi^{-1}(n)}), b), with phi[i] the image of i.
/// Throws ZeroScale for a zero entry of v, OutOfDomain if phi is not a bijection.
LabeledExample permute_scale_transform(const LabeledExample& ex, std::span<const Elem> v,
                                       std::span<const std::size_t> phi, const FieldCtx& ctx);

/// g = sum_i lambda_i v_{phi(i)} x_{phi(i)}: the function the permuted stream is consistent with.
LinearFn permute_scale_target(const LinearFn& f, std::span<const Elem> v, std::span<const std::size_t> phi);

/// (a, b + delta(a)): examples of f become examples of f + delta.
LabeledExample shift_label(LabeledExample ex, const LinearFn& delta);

/// a_i replaced by a fresh uniform draw.
LabeledExample randomize_coordinate(LabeledExample ex, std::size_t i, const FieldCtx& ctx, Rng& rng);

/// a extended to N entries with uniform draws. Throws ShrinkNotAllowed if N < |a|.
LabeledExample pad_example(LabeledExample ex, std::size_t N, const FieldCtx& ctx, Rng& rng);

/// A (v, phi) pair for the permute/scale transform.
///
/// Random instances are realized lazily: phi(i) is drawn uniformly among the
/// still-unused images the first time it is asked for, and the remainder is
/// filled in only when an example must be transformed. Every partial
/// realization extends to a uniform permutation, so the law is that of a
/// uniformly random phi; an approximator that reads only the target touches
/// O(d(f)) entries instead of n.
class Relabeling {
public:
    static std::shared_ptr<const Relabeling> random(const FieldCtx& ctx, std::size_t n, std::uint64_t seed);
    static std::shared_ptr<const Relabeling> fixed(const FieldCtx& ctx, std::vector<Elem> v,
                                                   std::vector<std::size_t> phi);

    std::size_t dim() const noexcept { return n_; }
    std::size_t image(std::size_t i) const;
    Elem scale(std::size_t j) const;

    LabeledExample apply(const LabeledExample& ex) const;
    LinearFn map_target(const LinearFn& f) const;

private:
    Relabeling(const FieldCtx& ctx, std::size_t n, std::uint64_t seed);
    void materialize() const;

    FieldCtx ctx_;
    std::size_t n_;
    std::uint64_t seed_;
    std::vector<Elem> fixed_scale_;
    // lazy permutation state
    mutable Rng rng_;
    mutable std::unordered_map<std::size_t, std::size_t> forward_;
    mutable std::unordered_map<std::size_t, std::size_t> backward_;
    mutable std::vector<std::size_t> dense_;
    mutable std::vector<Elem> inv_scale_;
};

} // namespace parlearn
