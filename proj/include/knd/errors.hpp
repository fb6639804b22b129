// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace knd {

/// Base class of all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KappaTooSmall : Error { using Error::Error; };
struct InvalidSpectralIndex : Error { using Error::Error; };
struct NegativeDiscriminant : Error { using Error::Error; };
struct MeshTooCoarse : Error { using Error::Error; };
struct EvaluationAtNode : Error { using Error::Error; };
struct InvalidQuadrature : Error { using Error::Error; };
struct QuadratureNonConvergence : Error { using Error::Error; };
struct OracleScaleExceeded : Error { using Error::Error; };
struct SolverBreakdown : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct UnpairedPoint : Error { using Error::Error; };
struct EmptySpectrum : Error { using Error::Error; };
struct DegenerateSegment : Error { using Error::Error; };
struct DiskViolation : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

}  // namespace knd
