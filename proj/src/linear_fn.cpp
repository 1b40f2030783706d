#include "parlearn/linear_fn.hpp"

#include <algorithm>
#include <unordered_set>

#include "parlearn/error.hpp"

namespace parlearn {

LinearFn::LinearFn(FieldCtx ctx, std::size_t n) : ctx_(ctx), n_(n)
{
    if (n == 0)
        throw Error(Errc::OutOfDomain, "linear function needs at least one variable");
}

LinearFn::LinearFn(FieldCtx ctx, std::span<const Elem> coeffs) : LinearFn(ctx, coeffs.size())
{
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (!ctx_.contains(coeffs[i]))
            throw Error(Errc::OutOfDomain, "coefficient " + std::to_string(coeffs[i]) + " not in F_" +
                                               std::to_string(ctx_.q()));
        if (coeffs[i] != 0)
            terms_.push_back({i, coeffs[i]});
    }
}

LinearFn::LinearFn(FieldCtx ctx, std::size_t n, std::vector<Term> sorted_terms, int)
    : ctx_(ctx), n_(n), terms_(std::move(sorted_terms))
{
}

LinearFn LinearFn::from_terms(FieldCtx ctx, std::size_t n, std::vector<Term> terms)
{
    LinearFn out(ctx, n);
    std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.index < b.index; });
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (terms[i].index >= n)
            throw Error(Errc::DimensionMismatch, "term index " + std::to_string(terms[i].index) + " >= n");
        if (i > 0 && terms[i].index == terms[i - 1].index)
            throw Error(Errc::OutOfDomain, "duplicate term index " + std::to_string(terms[i].index));
        if (!ctx.contains(terms[i].coeff))
            throw Error(Errc::OutOfDomain, "non-canonical coefficient");
        if (terms[i].coeff != 0)
            out.terms_.push_back(terms[i]);
    }
    return out;
}

LinearFn LinearFn::monomial(FieldCtx ctx, std::size_t n, std::size_t i, Elem coeff)
{
    return from_terms(ctx, n, {{i, coeff % ctx.q()}});
}

Elem LinearFn::coeff(std::size_t i) const
{
    if (i >= n_)
        throw Error(Errc::DimensionMismatch, "coefficient index out of range");
    auto it = std::lower_bound(terms_.begin(), terms_.end(), i,
                               [](const Term& t, std::size_t idx) { return t.index < idx; });
    return (it != terms_.end() && it->index == i) ? it->coeff : 0;
}

std::vector<Elem> LinearFn::coeffs() const
{
    std::vector<Elem> dense(n_, 0);
    for (const auto& t : terms_)
        dense[t.index] = t.coeff;
    return dense;
}

std::vector<std::size_t> LinearFn::support() const
{
    std::vector<std::size_t> out;
    out.reserve(terms_.size());
    for (const auto& t : terms_)
        out.push_back(t.index);
    return out;
}

Elem LinearFn::operator()(std::span<const Elem> a) const
{
    if (a.size() != n_)
        throw Error(Errc::DimensionMismatch,
                    "example has " + std::to_string(a.size()) + " entries, function has " + std::to_string(n_));
    Elem acc = 0;
    for (const auto& t : terms_)
        acc = ctx_.add(acc, ctx_.mul(t.coeff, a[t.index]));
    return acc;
}

LinearFn LinearFn::operator+(const LinearFn& other) const
{
    if (other.n_ != n_ || !(other.ctx_ == ctx_))
        throw Error(Errc::DimensionMismatch, "adding functions of different shape");
    std::vector<Term> merged;
    merged.reserve(terms_.size() + other.terms_.size());
    auto a = terms_.begin();
    auto b = other.terms_.begin();
    while (a != terms_.end() || b != other.terms_.end()) {
        if (b == other.terms_.end() || (a != terms_.end() && a->index < b->index)) {
            merged.push_back(*a++);
        } else if (a == terms_.end() || b->index < a->index) {
            merged.push_back(*b++);
        } else {
            const Elem s = ctx_.add(a->coeff, b->coeff);
            if (s != 0)
                merged.push_back({a->index, s});
            ++a;
            ++b;
        }
    }
    return LinearFn(ctx_, n_, std::move(merged), 0);
}

LinearFn LinearFn::operator-() const
{
    std::vector<Term> out(terms_);
    for (auto& t : out)
        t.coeff = ctx_.neg(t.coeff);
    return LinearFn(ctx_, n_, std::move(out), 0);
}

LinearFn LinearFn::operator-(const LinearFn& other) const { return *this + (-other); }

LinearFn LinearFn::scaled(Elem s) const
{
    s %= ctx_.q();
    if (s == 0)
        return LinearFn(ctx_, n_);
    std::vector<Term> out(terms_);
    for (auto& t : out)
        t.coeff = ctx_.mul(t.coeff, s);
    return LinearFn(ctx_, n_, std::move(out), 0);
}

LinearFn LinearFn::extended(std::size_t N) const
{
    if (N < n_)
        throw Error(Errc::ShrinkNotAllowed, "cannot extend to a smaller dimension");
    return LinearFn(ctx_, N, terms_, 0);
}

bool LinearFn::fits_in(std::size_t n) const noexcept { return terms_.empty() || terms_.back().index < n; }

LinearFn LinearFn::projected(std::size_t n) const
{
    if (n == 0)
        throw Error(Errc::OutOfDomain, "projection to zero variables");
    std::vector<Term> kept;
    for (const auto& t : terms_)
        if (t.index < n)
            kept.push_back(t);
    return LinearFn(ctx_, n, std::move(kept), 0);
}

std::string LinearFn::to_string() const
{
    if (terms_.empty())
        return "0";
    std::string s;
    for (const auto& t : terms_) {
        if (!s.empty())
            s += " + ";
        if (t.coeff != 1)
            s += std::to_string(t.coeff) + "*";
        s += "x" + std::to_string(t.index);
    }
    return s;
}

std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t d, Rng& rng)
{
    if (d > n)
        throw Error(Errc::BadSparsity, "cannot pick " + std::to_string(d) + " of " + std::to_string(n));
    std::vector<std::size_t> picked;
    picked.reserve(d);
    if (2 * d >= n) {
        // dense case: partial Fisher-Yates
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i)
            all[i] = i;
        for (std::size_t i = 0; i < d; ++i)
            std::swap(all[i], all[i + rng.below(n - i)]);
        picked.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(d));
    } else {
        std::unordered_set<std::size_t> seen;
        for (std::size_t j = n - d; j < n; ++j) {
            const std::size_t t = rng.below(j + 1);
            const std::size_t pick = seen.count(t) ? j : t;
            seen.insert(pick);
            picked.push_back(pick);
        }
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

LinearFn sample_sparse_linear(const FieldCtx& ctx, std::size_t n, std::size_t d, Rng& rng)
{
    if (d > n)
        throw Error(Errc::BadSparsity, "sparsity " + std::to_string(d) + " exceeds n = " + std::to_string(n));
    std::vector<LinearFn::Term> terms;
    terms.reserve(d);
    for (std::size_t i : sample_distinct(n, d, rng))
        terms.push_back({i, ctx.nonzero(rng)});
    return LinearFn::from_terms(ctx, n, std::move(terms));
}

} // namespace parlearn
