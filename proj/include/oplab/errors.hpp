#pragma once

#include <stdexcept>
#include <string>

namespace oplab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define OPLAB_DEFINE_ERROR(Name)                    \
    struct Name : Error {                           \
        using Error::Error;                         \
    };

OPLAB_DEFINE_ERROR(InvalidMesh)
OPLAB_DEFINE_ERROR(NonEllipticCoefficient)
OPLAB_DEFINE_ERROR(AtomOutsideDomain)
OPLAB_DEFINE_ERROR(InfiniteField)
OPLAB_DEFINE_ERROR(SingularSystem)
OPLAB_DEFINE_ERROR(NotConverged)
OPLAB_DEFINE_ERROR(InfeasibleObstacle)
OPLAB_DEFINE_ERROR(CertificateInvalid)
OPLAB_DEFINE_ERROR(NotSupersolution)
OPLAB_DEFINE_ERROR(NotMonotone)
OPLAB_DEFINE_ERROR(InvalidLevel)
OPLAB_DEFINE_ERROR(InsufficientFamily)
OPLAB_DEFINE_ERROR(UnknownScenario)
OPLAB_DEFINE_ERROR(QuadratureFailure)
OPLAB_DEFINE_ERROR(InvalidTheta)
OPLAB_DEFINE_ERROR(PoleEvaluation)

#undef OPLAB_DEFINE_ERROR

}  // namespace oplab
