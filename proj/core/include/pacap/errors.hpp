// errors.hpp — exception types thrown across the library.

#pragma once

#include <stdexcept>

namespace pacap {

struct NonSquare : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NonFinite : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Smallest singular value below threshold; the closed-form solutions assume
// a full-rank channel, so this is an error rather than something to patch over.
struct RankDeficient : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tall-branch routine called on a wide channel or vice versa.
struct BranchMismatch : std::logic_error {
    using std::logic_error::logic_error;
};

struct NotMiso : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NotTwoByTwo : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NotTwoTransmit : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct EmptyTrace : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InputParse : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace pacap
