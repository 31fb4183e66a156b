#pragma once

#include <stdexcept>
#include <string>

namespace radf {

// Base for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define RADF_DEFINE_ERROR(Name)                                        \
  class Name : public Error {                                          \
  public:                                                              \
    explicit Name(const std::string& what = #Name) : Error(what) {}    \
  }

RADF_DEFINE_ERROR(InvalidSeries);
RADF_DEFINE_ERROR(EmptyIntersection);
RADF_DEFINE_ERROR(OutOfBounds);
RADF_DEFINE_ERROR(WindowTooLarge);
RADF_DEFINE_ERROR(SeriesTooShort);
RADF_DEFINE_ERROR(NonConvergence);
RADF_DEFINE_ERROR(InvalidParams);
RADF_DEFINE_ERROR(ShapeMismatch);
RADF_DEFINE_ERROR(MisalignedInputs);
RADF_DEFINE_ERROR(SingularRegression);
RADF_DEFINE_ERROR(NoPositiveLabels);
RADF_DEFINE_ERROR(EmptySeries);
RADF_DEFINE_ERROR(NoCandidateAnomalies);
RADF_DEFINE_ERROR(ZeroVariance);
RADF_DEFINE_ERROR(BandInfeasible);
RADF_DEFINE_ERROR(NoCandidates);
RADF_DEFINE_ERROR(DegenerateLabels);
RADF_DEFINE_ERROR(UnreadableFile);
RADF_DEFINE_ERROR(ParseError);
RADF_DEFINE_ERROR(UnknownDetector);
RADF_DEFINE_ERROR(StageOrderViolation);
RADF_DEFINE_ERROR(AlertWithoutDetect);
RADF_DEFINE_ERROR(SchemaMismatch);
RADF_DEFINE_ERROR(DuplicateTimestamp);
RADF_DEFINE_ERROR(OutOfOrderRecord);
RADF_DEFINE_ERROR(SinkUnavailable);

#undef RADF_DEFINE_ERROR

}  // namespace radf
