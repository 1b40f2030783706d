#pragma once

#include <cstdint>

#include "parlearn/rng.hpp"

namespace parlearn {

/// Field elements are canonical integers in [0, q).
using Elem = std::uint64_t;

bool is_prime(std::uint64_t q) noexcept;

/// Arithmetic context for the prime field F_q. Immutable once built.
/// Moduli are limited to q < 2^32 so products fit a 64-bit word.
class FieldCtx {
public:
    static constexpr std::uint64_t kMaxModulus = 1ULL << 32;

    /// Throws NotPrime for composite q (or q < 2), TooLarge for q >= 2^32.
    explicit FieldCtx(std::int64_t q);

    std::uint64_t q() const noexcept { return q_; }
    bool is_binary() const noexcept { return q_ == 2; }

    Elem reduce(std::int64_t x) const noexcept;
    Elem add(Elem a, Elem b) const noexcept
    {
        const Elem s = a + b;
        return s >= q_ ? s - q_ : s;
    }
    Elem sub(Elem a, Elem b) const noexcept { return a >= b ? a - b : a + q_ - b; }
    Elem neg(Elem a) const noexcept { return a == 0 ? 0 : q_ - a; }
    Elem mul(Elem a, Elem b) const noexcept { return (a * b) % q_; }
    Elem pow(Elem a, std::uint64_t e) const noexcept;

    /// Throws ZeroInverse when a == 0.
    Elem inv(Elem a) const;

    Elem uniform(Rng& rng) const noexcept { return rng.below(q_); }
    Elem nonzero(Rng& rng) const noexcept { return 1 + rng.below(q_ - 1); }

    bool contains(Elem a) const noexcept { return a < q_; }

    friend bool operator==(const FieldCtx&, const FieldCtx&) = default;

private:
    std::uint64_t q_;
};

inline FieldCtx make_field(std::int64_t q) { return FieldCtx(q); }
inline Elem fe_inv(const FieldCtx& ctx, Elem a) { return ctx.inv(a); }
inline Elem sample_uniform(const FieldCtx& ctx, Rng& rng) { return ctx.uniform(rng); }
inline Elem sample_nonzero(const FieldCtx& ctx, Rng& rng) { return ctx.nonzero(rng); }

} // namespace parlearn
