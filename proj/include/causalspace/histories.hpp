#pragma once

#include <stdexcept>
#include <vector>

#include "encoding.hpp"

namespace causalspace {

// The restriction order on partial functions is bit inclusion.
inline bool restriction_leq(History f, History g) { return (f & ~g) == 0; }

// Greatest lower bound: the restriction to the events where f and g agree.
inline History meet(History f, History g) { return f & g; }

// Two valid histories are compatible iff their union assigns one value per event.
inline bool compatible(History f, History g) { return is_valid_history(f | g); }

inline bool compatible_set(const std::vector<History>& fs) {
    History acc = 0;
    for (History f : fs) {
        acc |= f;
        if (!is_valid_history(acc)) return false;
    }
    return true;
}

struct PreconditionError : std::logic_error {
    using std::logic_error::logic_error;
};

inline History join(const std::vector<History>& fs) {
    History acc = 0;
    for (History f : fs) acc |= f;
    if (!is_valid_history(acc)) throw PreconditionError("join of an incompatible set of histories");
    return acc;
}

}  // namespace causalspace
