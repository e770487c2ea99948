#pragma once

#include <stdexcept>
#include <string>

namespace epibif {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// State outside the vector field's domain (N <= 0, invalid stencil point, ...).
struct DomainError : Error { using Error::Error; };

// Endemic closed form: D0 < 0, no real square root.
struct DiscriminantError : Error { using Error::Error; };

// Formula degenerates (tau = 0 Jordan block, R0 = 1 denominators, ...).
struct DegenerateError : Error { using Error::Error; };

struct SingularJacobian : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct NegativeCoordinate : Error { using Error::Error; };

struct StepSizeUnderflow : Error { using Error::Error; };
struct NoCrossing : Error { using Error::Error; };
struct MaxReturnsExceeded : Error { using Error::Error; };
struct ContinuationBroken : Error { using Error::Error; };

// Complex eigenvalue pair collapsed to real inside a Hopf bracket.
struct PairLost : Error { using Error::Error; };

// Matrix does not have the double-zero non-semisimple structure.
struct StructureError : Error { using Error::Error; };

struct IllConditioned : Error { using Error::Error; };
struct FitIllConditioned : Error { using Error::Error; };

}  // namespace epibif
