#include "parlearn/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "parlearn/error.hpp"

namespace parlearn {

double magnify_probability(const FieldCtx& ctx, double eta_assumed, double eta_target)
{
    const double q = static_cast<double>(ctx.q());
    const double max_rate = 1.0 - 1.0 / q;
    if (eta_assumed < 0 || eta_target > max_rate + 1e-12)
        throw Error(Errc::BadRates, "noise rates must lie in [0, 1 - 1/q]");
    const double denom = (1.0 - eta_assumed) - eta_assumed / (q - 1.0);
    const double diff = eta_target - eta_assumed;
    if (std::abs(diff) < 1e-15)
        return 0.0;
    if (denom <= 0)
        throw Error(Errc::BadRates, "assumed noise rate leaves no signal to magnify");
    double rho = diff / denom;
    if (rho < -1e-12 || rho > 1 + 1e-12)
        throw Error(Errc::BadRates, "re-randomization probability " + std::to_string(rho) + " outside [0, 1]");
    return std::clamp(rho, 0.0, 1.0);
}

LabeledExample magnify_noise(LabeledExample ex, double eta_assumed, double eta_target, const FieldCtx& ctx,
                             Rng& rng)
{
    const double rho = magnify_probability(ctx, eta_assumed, eta_target);
    if (rho > 0 && rng.bernoulli(rho))
        ex.b = ctx.add(ex.b, ctx.nonzero(rng));
    return ex;
}

namespace {

void check_bijection(std::span<const std::size_t> phi)
{
    std::vector<char> hit(phi.size(), 0);
    for (std::size_t p : phi) {
        if (p >= phi.size() || hit[p])
            throw Error(Errc::OutOfDomain, "phi is not a permutation");
        hit[p] = 1;
    }
}

void check_scales(std::span<const Elem> v, const FieldCtx& ctx)
{
    for (Elem s : v) {
        if (s % ctx.q() == 0)
            throw Error(Errc::ZeroScale, "scale vector has a zero entry");
    }
}

} // namespace

LabeledExample permute_scale_transform(const LabeledExample& ex, std::span<const Elem> v,
                                       std::span<const std::size_t> phi, const FieldCtx& ctx)
{
    if (v.size() != ex.a.size() || phi.size() != ex.a.size())
        throw Error(Errc::DimensionMismatch, "permute/scale parameters do not match the example");
    check_scales(v, ctx);
    check_bijection(phi);
    LabeledExample out{std::vector<Elem>(ex.a.size()), ex.b};
    for (std::size_t i = 0; i < ex.a.size(); ++i)
        out.a[phi[i]] = ctx.mul(ctx.inv(v[phi[i]]), ex.a[i]);
    return out;
}

LinearFn permute_scale_target(const LinearFn& f, std::span<const Elem> v, std::span<const std::size_t> phi)
{
    const auto& ctx = f.field();
    if (v.size() != f.dim() || phi.size() != f.dim())
        throw Error(Errc::DimensionMismatch, "permute/scale parameters do not match the function");
    check_scales(v, ctx);
    check_bijection(phi);
    std::vector<LinearFn::Term> terms;
    for (const auto& t : f.terms())
        terms.push_back({phi[t.index], ctx.mul(t.coeff, v[phi[t.index]])});
    return LinearFn::from_terms(ctx, f.dim(), std::move(terms));
}

LabeledExample shift_label(LabeledExample ex, const LinearFn& delta)
{
    ex.b = delta.field().add(ex.b, delta(ex.a));
    return ex;
}

LabeledExample randomize_coordinate(LabeledExample ex, std::size_t i, const FieldCtx& ctx, Rng& rng)
{
    if (i >= ex.a.size())
        throw Error(Errc::DimensionMismatch, "coordinate " + std::to_string(i) + " out of range");
    ex.a[i] = ctx.uniform(rng);
    return ex;
}

LabeledExample pad_example(LabeledExample ex, std::size_t N, const FieldCtx& ctx, Rng& rng)
{
    if (N < ex.a.size())
        throw Error(Errc::ShrinkNotAllowed, "cannot pad " + std::to_string(ex.a.size()) + " entries down to " +
                                                std::to_string(N));
    ex.a.reserve(N);
    while (ex.a.size() < N)
        ex.a.push_back(ctx.uniform(rng));
    return ex;
}

// ---------------------------------------------------------------------------

Relabeling::Relabeling(const FieldCtx& ctx, std::size_t n, std::uint64_t seed)
    : ctx_(ctx), n_(n), seed_(seed), rng_(derive_seed(seed, "relabel/phi"))
{
}

std::shared_ptr<const Relabeling> Relabeling::random(const FieldCtx& ctx, std::size_t n, std::uint64_t seed)
{
    return std::shared_ptr<const Relabeling>(new Relabeling(ctx, n, seed));
}

std::shared_ptr<const Relabeling> Relabeling::fixed(const FieldCtx& ctx, std::vector<Elem> v,
                                                    std::vector<std::size_t> phi)
{
    if (v.size() != phi.size())
        throw Error(Errc::DimensionMismatch, "scale and permutation lengths differ");
    check_scales(v, ctx);
    check_bijection(phi);
    std::shared_ptr<Relabeling> r(new Relabeling(ctx, phi.size(), 0));
    r->fixed_scale_ = std::move(v);
    r->dense_ = std::move(phi);
    return r;
}

std::size_t Relabeling::image(std::size_t i) const
{
    if (i >= n_)
        throw Error(Errc::DimensionMismatch, "relabeling index out of range");
    if (!dense_.empty())
        return dense_[i];
    if (auto it = forward_.find(i); it != forward_.end())
        return it->second;
    std::size_t j = rng_.below(n_);
    while (backward_.count(j))
        j = rng_.below(n_);
    forward_.emplace(i, j);
    backward_.emplace(j, i);
    return j;
}

Elem Relabeling::scale(std::size_t j) const
{
    if (!fixed_scale_.empty())
        return fixed_scale_[j];
    if (ctx_.is_binary())
        return 1;
    Rng r(derive_seed(seed_, "relabel/scale", j));
    return ctx_.nonzero(r);
}

void Relabeling::materialize() const
{
    if (dense_.empty()) {
        std::vector<std::size_t> free_images;
        free_images.reserve(n_ - backward_.size());
        for (std::size_t j = 0; j < n_; ++j)
            if (!backward_.count(j))
                free_images.push_back(j);
        for (std::size_t i = free_images.size(); i > 1; --i)
            std::swap(free_images[i - 1], free_images[rng_.below(i)]);
        dense_.resize(n_);
        std::size_t next = 0;
        for (std::size_t i = 0; i < n_; ++i) {
            auto it = forward_.find(i);
            dense_[i] = it != forward_.end() ? it->second : free_images[next++];
        }
        forward_.clear();
        backward_.clear();
    }
    if (inv_scale_.empty()) {
        inv_scale_.resize(n_);
        for (std::size_t j = 0; j < n_; ++j)
            inv_scale_[j] = ctx_.inv(scale(j));
    }
}

LabeledExample Relabeling::apply(const LabeledExample& ex) const
{
    if (ex.a.size() != n_)
        throw Error(Errc::DimensionMismatch, "relabeling applied to an example of the wrong length");
    materialize();
    LabeledExample out{std::vector<Elem>(n_), ex.b};
    for (std::size_t i = 0; i < n_; ++i)
        out.a[dense_[i]] = ctx_.mul(inv_scale_[dense_[i]], ex.a[i]);
    return out;
}

LinearFn Relabeling::map_target(const LinearFn& f) const
{
    if (f.dim() != n_)
        throw Error(Errc::DimensionMismatch, "relabeling applied to a function of the wrong dimension");
    std::vector<LinearFn::Term> terms;
    terms.reserve(f.sparsity());
    for (const auto& t : f.terms()) {
        const std::size_t j = image(t.index);
        terms.push_back({j, ctx_.mul(t.coeff, scale(j))});
    }
    return LinearFn::from_terms(ctx_, n_, std::move(terms));
}

} // namespace parlearn
