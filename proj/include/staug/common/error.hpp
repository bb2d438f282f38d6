#pragma once

#include <stdexcept>
#include <string>

namespace staug {

// Root of every error thrown by the library. Subclasses name the failure
// kind so callers can catch selectively.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define STAUG_DEFINE_ERROR(Name)                    \
    class Name : public Error {                     \
    public:                                         \
        explicit Name(const std::string& what)      \
            : Error(std::string(#Name ": ") + what) \
        {}                                          \
    }

STAUG_DEFINE_ERROR(SyntaxError);
STAUG_DEFINE_ERROR(ValenceError);
STAUG_DEFINE_ERROR(UnsupportedFeature);
STAUG_DEFINE_ERROR(KekulizationError);
STAUG_DEFINE_ERROR(EmptyResult);
STAUG_DEFINE_ERROR(DimensionMismatch);
STAUG_DEFINE_ERROR(EmptyBatch);
STAUG_DEFINE_ERROR(NonFiniteLoss);
STAUG_DEFINE_ERROR(TooFewRows);
STAUG_DEFINE_ERROR(NoUsableRows);
STAUG_DEFINE_ERROR(TaskSetMismatch);
STAUG_DEFINE_ERROR(IoError);
STAUG_DEFINE_ERROR(PreconditionError);
STAUG_DEFINE_ERROR(FormatError);
STAUG_DEFINE_ERROR(DegenerateTask);

#undef STAUG_DEFINE_ERROR

} // namespace staug
