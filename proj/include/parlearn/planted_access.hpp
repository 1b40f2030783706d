#pragma once

// Test-and-validation channel: what function a stream is actually consistent
// with. Only the cheat approximators and the harness's verification step
// include this header; learners see examples only.

#include <cstddef>
#include <optional>

#include "parlearn/linear_fn.hpp"
#include "parlearn/oracle.hpp"

namespace parlearn {

struct StreamTruth {
    enum class Kind {
        Unknown,       // pool-backed stream, target sealed away
        Planted,       // consistent with `target` (up to noise)
        UniformLabels, // labels independent of a
    };
    Kind kind = Kind::Unknown;
    std::size_t dim = 0;
    std::optional<LinearFn> target;
};

class PlantedAccess {
public:
    /// Pushes the planted target through the view's transform stack.
    static StreamTruth truth(const ExampleOracle& oracle);
};

} // namespace parlearn
