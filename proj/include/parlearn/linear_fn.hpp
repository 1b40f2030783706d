#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "parlearn/field.hpp"

namespace parlearn {

/// A linear function x -> sum_i c_i x_i over F_q^n.
///
/// Coefficients are held as a sorted list of nonzero terms; reductions at
/// padded dimensions (thousands of variables, a handful relevant) stay
/// proportional to the sparsity rather than to n. Indices are 0-based.
class LinearFn {
public:
    struct Term {
        std::size_t index;
        Elem coeff;
        friend bool operator==(const Term&, const Term&) = default;
    };

    /// Zero function on n variables. Throws OutOfDomain for n == 0.
    LinearFn(FieldCtx ctx, std::size_t n);

    /// From a dense coefficient vector; entries must be canonical.
    LinearFn(FieldCtx ctx, std::span<const Elem> coeffs);
    LinearFn(FieldCtx ctx, std::initializer_list<Elem> coeffs)
        : LinearFn(ctx, std::span<const Elem>(coeffs.begin(), coeffs.size()))
    {
    }

    /// Terms may arrive in any order; zero coefficients are dropped and
    /// duplicate indices rejected.
    static LinearFn from_terms(FieldCtx ctx, std::size_t n, std::vector<Term> terms);

    /// coeff * x_i
    static LinearFn monomial(FieldCtx ctx, std::size_t n, std::size_t i, Elem coeff = 1);

    const FieldCtx& field() const noexcept { return ctx_; }
    std::size_t dim() const noexcept { return n_; }
    /// d(f): number of relevant variables.
    std::size_t sparsity() const noexcept { return terms_.size(); }
    bool is_zero() const noexcept { return terms_.empty(); }

    Elem coeff(std::size_t i) const;
    std::vector<Elem> coeffs() const;
    std::span<const Term> terms() const noexcept { return terms_; }
    std::vector<std::size_t> support() const;

    /// Throws DimensionMismatch unless a.size() == dim().
    Elem operator()(std::span<const Elem> a) const;

    LinearFn operator+(const LinearFn& other) const;
    LinearFn operator-(const LinearFn& other) const;
    LinearFn operator-() const;
    LinearFn scaled(Elem s) const;

    /// Same coefficients on N >= dim() variables.
    LinearFn extended(std::size_t N) const;
    /// Restriction to the first n variables; false when a dropped coordinate
    /// carries a nonzero coefficient.
    bool fits_in(std::size_t n) const noexcept;
    LinearFn projected(std::size_t n) const;

    /// e.g. "2*x0 + x3", "0" for the zero function.
    std::string to_string() const;

    friend bool operator==(const LinearFn& a, const LinearFn& b)
    {
        return a.ctx_ == b.ctx_ && a.n_ == b.n_ && a.terms_ == b.terms_;
    }

private:
    LinearFn(FieldCtx ctx, std::size_t n, std::vector<Term> sorted_terms, int);

    FieldCtx ctx_;
    std::size_t n_;
    std::vector<Term> terms_;
};

inline Elem eval(const LinearFn& f, std::span<const Elem> a) { return f(a); }

/// Uniform over Lin(F, d): support uniform without replacement, each
/// coefficient uniform over F \ {0}. Throws BadSparsity if d > n.
LinearFn sample_sparse_linear(const FieldCtx& ctx, std::size_t n, std::size_t d, Rng& rng);

/// d distinct indices uniform from [0, n), ascending (Floyd's algorithm).
std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t d, Rng& rng);

} // namespace parlearn
