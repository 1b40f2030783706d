#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "parlearn/field.hpp"
#include "parlearn/linear_fn.hpp"
#include "parlearn/transforms.hpp"

namespace parlearn {

/// Cooperative example/wall-clock caps shared by every view of a source.
class BudgetMeter {
public:
    /// Zero means unlimited.
    BudgetMeter(std::uint64_t max_examples = 0, std::uint64_t max_wall_ms = 0);

    /// Throws BudgetExceeded once the example cap is passed.
    void charge(std::uint64_t count = 1);
    /// Throws BudgetExceeded once the wall-clock cap is passed.
    void poll() const;

    std::uint64_t examples() const noexcept { return examples_; }

private:
    std::uint64_t max_examples_;
    std::uint64_t examples_ = 0;
    std::optional<std::chrono::steady_clock::time_point> deadline_;
};

struct MagnifyNoise {
    double eta_assumed;
    double eta_target;
};
struct PermuteScale {
    std::shared_ptr<const Relabeling> map;
};
struct ShiftLabel {
    LinearFn delta;
};
struct RandomizeCoordinate {
    std::size_t index;
};
struct PadExample {
    std::size_t target_dim;
};

using Transform = std::variant<MagnifyNoise, PermuteScale, ShiftLabel, RandomizeCoordinate, PadExample>;

/// Seeded source of labeled examples plus an ordered stack of transforms.
///
/// Copies and derived views (with()) share the underlying source, so drawing
/// through any view consumes the same example stream. The k-th draw of a
/// source, and the randomness every transform layer applies to it, are
/// pure functions of (seed, k).
class ExampleOracle {
public:
    /// Noisy examples of target at rate eta. Requires eta <= eta_bound < 1 - 1/q (BadRates).
    static ExampleOracle simulated(LinearFn target, double eta, double eta_bound, std::uint64_t seed);
    /// Uniform a with labels independent and uniform.
    static ExampleOracle uniform_labels(FieldCtx ctx, std::size_t n, double eta_bound, std::uint64_t seed);
    /// Pre-drawn examples served in order; exhaustion raises BudgetExceeded.
    static ExampleOracle from_pool(FieldCtx ctx, std::size_t n, double eta_bound,
                                   std::vector<LabeledExample> pool);

    LabeledExample next();

    /// A derived view with t pushed on top of the stack; seed keys the
    /// layer's randomness (magnify, randomize, pad).
    ExampleOracle with(Transform t, std::uint64_t seed = 0) const;

    const FieldCtx& field() const noexcept;
    std::size_t dim() const noexcept { return dim_; }
    double eta_bound() const noexcept;
    std::size_t depth() const noexcept { return layers_.size(); }

    /// Draws made through this view.
    std::uint64_t draws() const noexcept { return counter_; }
    /// Draws made from the shared source by all views.
    std::uint64_t source_draws() const noexcept;

    void attach_budget(std::shared_ptr<BudgetMeter> budget);
    void poll_budget() const;

private:
    friend class PlantedAccess;
    struct Source;
    struct Layer {
        Transform transform;
        std::uint64_t seed;
    };

    explicit ExampleOracle(std::shared_ptr<Source> source);

    std::shared_ptr<Source> source_;
    std::vector<Layer> layers_;
    std::size_t dim_;
    std::uint64_t counter_ = 0;
};

} // namespace parlearn
