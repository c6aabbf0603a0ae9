#pragma once

#include <stdexcept>
#include <string>

namespace raylign {

/// Base class for all library failures.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// File could not be read/written or has a malformed format.
struct IoError : Error {
  using Error::Error;
};

/// Rotation too close to the pi-angle chart boundary for log_se3.
struct DegenerateRotationError : Error {
  using Error::Error;
};

/// A cloud without enough geometric extent/points for the operation.
struct DegenerateCloudError : Error {
  using Error::Error;
};

/// Every sampled chord missed at least one of the clouds.
struct NoIntersectionsError : Error {
  using Error::Error;
};

/// Fewer correspondences than needed for a closed-form transform fit.
struct RankDeficiencyError : Error {
  using Error::Error;
};

/// Requested crop/overlap cannot produce enough points.
struct OverlapInfeasibleError : Error {
  using Error::Error;
};

}  // namespace raylign
