#include "parlearn/oracle.hpp"

#include <string>

#include "parlearn/error.hpp"
#include "parlearn/planted_access.hpp"

namespace parlearn {

BudgetMeter::BudgetMeter(std::uint64_t max_examples, std::uint64_t max_wall_ms) : max_examples_(max_examples)
{
    if (max_wall_ms > 0)
        deadline_ = std::chrono::steady_clock::now() + std::chrono::milliseconds(max_wall_ms);
}

void BudgetMeter::charge(std::uint64_t count)
{
    examples_ += count;
    if (max_examples_ > 0 && examples_ > max_examples_)
        throw Error(Errc::BudgetExceeded, "example budget of " + std::to_string(max_examples_) + " exhausted");
}

void BudgetMeter::poll() const
{
    if (deadline_ && std::chrono::steady_clock::now() > *deadline_)
        throw Error(Errc::BudgetExceeded, "wall-clock budget exhausted");
}

struct ExampleOracle::Source {
    enum class Kind { Simulated, UniformLabels, Pool };

    Source(Kind k, FieldCtx c, std::size_t dim) : kind(k), ctx(c), n(dim) {}

    Kind kind;
    FieldCtx ctx;
    std::size_t n;
    double eta = 0;
    double eta_bound = 0;
    std::uint64_t seed = 0;
    std::uint64_t counter = 0;
    std::optional<LinearFn> target;
    std::vector<LabeledExample> pool;
    std::shared_ptr<BudgetMeter> budget;

    LabeledExample draw()
    {
        if (budget)
            budget->charge();
        if (kind == Kind::Pool) {
            if (counter >= pool.size())
                throw Error(Errc::BudgetExceeded,
                            "example pool of " + std::to_string(pool.size()) + " examples exhausted");
            return pool[counter++];
        }
        Rng rng(derive_seed(seed, "source", counter++));
        LabeledExample ex{std::vector<Elem>(n), 0};
        for (auto& x : ex.a)
            x = ctx.uniform(rng);
        if (kind == Kind::UniformLabels) {
            ex.b = ctx.uniform(rng);
        } else {
            ex.b = (*target)(ex.a);
            if (eta > 0 && rng.bernoulli(eta))
                ex.b = ctx.add(ex.b, ctx.nonzero(rng));
        }
        return ex;
    }
};

namespace {

void check_rates(const FieldCtx& ctx, double eta, double eta_bound)
{
    const double limit = 1.0 - 1.0 / static_cast<double>(ctx.q());
    if (!(eta >= 0) || eta > eta_bound || !(eta_bound < limit))
        throw Error(Errc::BadRates, "need 0 <= eta <= eta_bound < 1 - 1/q, got eta = " + std::to_string(eta) +
                                        ", eta_bound = " + std::to_string(eta_bound));
}

} // namespace

ExampleOracle::ExampleOracle(std::shared_ptr<Source> source) : source_(std::move(source)), dim_(source_->n) {}

ExampleOracle ExampleOracle::simulated(LinearFn target, double eta, double eta_bound, std::uint64_t seed)
{
    check_rates(target.field(), eta, eta_bound);
    auto src = std::make_shared<Source>(Source::Kind::Simulated, target.field(), target.dim());
    src->eta = eta;
    src->eta_bound = eta_bound;
    src->seed = seed;
    src->target = std::move(target);
    return ExampleOracle(std::move(src));
}

ExampleOracle ExampleOracle::uniform_labels(FieldCtx ctx, std::size_t n, double eta_bound, std::uint64_t seed)
{
    check_rates(ctx, 0, eta_bound);
    if (n == 0)
        throw Error(Errc::OutOfDomain, "oracle needs at least one variable");
    auto src = std::make_shared<Source>(Source::Kind::UniformLabels, ctx, n);
    src->eta_bound = eta_bound;
    src->seed = seed;
    return ExampleOracle(std::move(src));
}

ExampleOracle ExampleOracle::from_pool(FieldCtx ctx, std::size_t n, double eta_bound,
                                       std::vector<LabeledExample> pool)
{
    check_rates(ctx, 0, eta_bound);
    if (n == 0)
        throw Error(Errc::OutOfDomain, "oracle needs at least one variable");
    for (const auto& ex : pool)
        if (ex.a.size() != n)
            throw Error(Errc::DimensionMismatch, "pooled example of the wrong length");
    auto src = std::make_shared<Source>(Source::Kind::Pool, ctx, n);
    src->eta_bound = eta_bound;
    src->pool = std::move(pool);
    return ExampleOracle(std::move(src));
}

const FieldCtx& ExampleOracle::field() const noexcept { return source_->ctx; }
double ExampleOracle::eta_bound() const noexcept { return source_->eta_bound; }
std::uint64_t ExampleOracle::source_draws() const noexcept { return source_->counter; }

void ExampleOracle::attach_budget(std::shared_ptr<BudgetMeter> budget) { source_->budget = std::move(budget); }

void ExampleOracle::poll_budget() const
{
    if (source_->budget)
        source_->budget->poll();
}

ExampleOracle ExampleOracle::with(Transform t, std::uint64_t seed) const
{
    const FieldCtx& ctx = field();
    std::size_t dim = dim_;
    std::visit(
        [&](const auto& tr) {
            using T = std::decay_t<decltype(tr)>;
            if constexpr (std::is_same_v<T, MagnifyNoise>) {
                magnify_probability(ctx, tr.eta_assumed, tr.eta_target);
            } else if constexpr (std::is_same_v<T, PermuteScale>) {
                if (!tr.map || tr.map->dim() != dim)
                    throw Error(Errc::DimensionMismatch, "relabeling dimension differs from the stream");
            } else if constexpr (std::is_same_v<T, ShiftLabel>) {
                if (tr.delta.dim() != dim || !(tr.delta.field() == ctx))
                    throw Error(Errc::DimensionMismatch, "shift function dimension differs from the stream");
            } else if constexpr (std::is_same_v<T, RandomizeCoordinate>) {
                if (tr.index >= dim)
                    throw Error(Errc::DimensionMismatch, "randomized coordinate out of range");
            } else {
                if (tr.target_dim < dim)
                    throw Error(Errc::ShrinkNotAllowed, "padding cannot shrink the stream");
                dim = tr.target_dim;
            }
        },
        t);
    ExampleOracle view = *this;
    view.layers_.push_back({std::move(t), seed});
    view.dim_ = dim;
    view.counter_ = 0;
    return view;
}

LabeledExample ExampleOracle::next()
{
    // layer randomness is keyed by the source index so sibling views stay independent
    const std::uint64_t k = source_->counter;
    LabeledExample ex = source_->draw();
    const FieldCtx& ctx = field();
    ++counter_;
    for (std::size_t li = 0; li < layers_.size(); ++li) {
        const Layer& layer = layers_[li];
        Rng rng(derive_seed(layer.seed, "layer", (k << 8) ^ li));
        ex = std::visit(
            [&](const auto& tr) -> LabeledExample {
                using T = std::decay_t<decltype(tr)>;
                if constexpr (std::is_same_v<T, MagnifyNoise>)
                    return magnify_noise(std::move(ex), tr.eta_assumed, tr.eta_target, ctx, rng);
                else if constexpr (std::is_same_v<T, PermuteScale>)
                    return tr.map->apply(ex);
                else if constexpr (std::is_same_v<T, ShiftLabel>)
                    return shift_label(std::move(ex), tr.delta);
                else if constexpr (std::is_same_v<T, RandomizeCoordinate>)
                    return randomize_coordinate(std::move(ex), tr.index, ctx, rng);
                else
                    return pad_example(std::move(ex), tr.target_dim, ctx, rng);
            },
            layer.transform);
    }
    return ex;
}

StreamTruth PlantedAccess::truth(const ExampleOracle& oracle)
{
    using Kind = StreamTruth::Kind;
    const auto& src = *oracle.source_;
    StreamTruth t;
    t.dim = src.n;
    switch (src.kind) {
    case ExampleOracle::Source::Kind::Pool: t.kind = Kind::Unknown; break;
    case ExampleOracle::Source::Kind::UniformLabels: t.kind = Kind::UniformLabels; break;
    case ExampleOracle::Source::Kind::Simulated:
        t.kind = Kind::Planted;
        t.target = src.target;
        break;
    }
    for (const auto& layer : oracle.layers_) {
        std::visit(
            [&](const auto& tr) {
                using T = std::decay_t<decltype(tr)>;
                if constexpr (std::is_same_v<T, PadExample>) {
                    t.dim = tr.target_dim;
                    if (t.target)
                        t.target = t.target->extended(tr.target_dim);
                } else if (t.kind == Kind::Planted) {
                    if constexpr (std::is_same_v<T, PermuteScale>) {
                        t.target = tr.map->map_target(*t.target);
                    } else if constexpr (std::is_same_v<T, ShiftLabel>) {
                        t.target = *t.target + tr.delta;
                    } else if constexpr (std::is_same_v<T, RandomizeCoordinate>) {
                        if (t.target->coeff(tr.index) != 0) {
                            t.kind = Kind::UniformLabels;
                            t.target.reset();
                        }
                    }
                }
            },
            layer.transform);
    }
    return t;
}

} // namespace parlearn
