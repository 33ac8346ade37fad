#pragma once

#include <stdexcept>
#include <string>

namespace ncspec {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

#define NCSPEC_DEFINE_ERROR(Name)                                              \
    class Name : public Error {                                                \
      public:                                                                  \
        explicit Name(const std::string &what) : Error(#Name ": " + what) {}   \
    }

NCSPEC_DEFINE_ERROR(ParseError);
NCSPEC_DEFINE_ERROR(ShapeMismatch);
NCSPEC_DEFINE_ERROR(NotAProjection);
NCSPEC_DEFINE_ERROR(NotAUnitary);
NCSPEC_DEFINE_ERROR(ZeroProjection);
NCSPEC_DEFINE_ERROR(InvalidHom);
NCSPEC_DEFINE_ERROR(InvalidContext);
NCSPEC_DEFINE_ERROR(InvalidMorphism);
NCSPEC_DEFINE_ERROR(NonCommutingGenerators);
NCSPEC_DEFINE_ERROR(NoDominatingAtom);
NCSPEC_DEFINE_ERROR(NotWellDefined);
NCSPEC_DEFINE_ERROR(NotMeetPreserving);
NCSPEC_DEFINE_ERROR(ContextMissing);
NCSPEC_DEFINE_ERROR(IsoFailure);
NCSPEC_DEFINE_ERROR(NaturalityFailure);
NCSPEC_DEFINE_ERROR(UnresolvableContext);
NCSPEC_DEFINE_ERROR(AlreadyCentral);
NCSPEC_DEFINE_ERROR(SaturationCapExceeded);
NCSPEC_DEFINE_ERROR(NotOrthonormal);
NCSPEC_DEFINE_ERROR(AlgebraMismatch);
NCSPEC_DEFINE_ERROR(InvalidState);

#undef NCSPEC_DEFINE_ERROR

} // namespace ncspec
