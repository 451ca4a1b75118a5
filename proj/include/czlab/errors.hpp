#pragma once

#include <stdexcept>
#include <string>

namespace czlab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define CZLAB_DEFINE_ERROR(Name)                                               \
    struct Name : Error {                                                      \
        explicit Name(const std::string& msg = #Name) : Error(msg) {}          \
    }

// grid
CZLAB_DEFINE_ERROR(EmptyRegion);
CZLAB_DEFINE_ERROR(RealRequired);
// kernels
CZLAB_DEFINE_ERROR(DiagonalEvaluation);
CZLAB_DEFINE_ERROR(NonDegeneracyFailed);
CZLAB_DEFINE_ERROR(OutOfGrid);
CZLAB_DEFINE_ERROR(ATooLargeForGrid);
// commutator
CZLAB_DEFINE_ERROR(SupportsOverlap);
CZLAB_DEFINE_ERROR(SupportsTouching);
CZLAB_DEFINE_ERROR(EmptySampler);
// factorization
CZLAB_DEFINE_ERROR(DegeneratePairing);
CZLAB_DEFINE_ERROR(NotMeanZero);
CZLAB_DEFINE_ERROR(NegativeG);
CZLAB_DEFINE_ERROR(MajorSubsetTooSmall);
CZLAB_DEFINE_ERROR(NoDecay);
// decomp
CZLAB_DEFINE_ERROR(EtaViolated);
// spaces
CZLAB_DEFINE_ERROR(NonPositiveWeight);
CZLAB_DEFINE_ERROR(TooFewScales);
CZLAB_DEFINE_ERROR(DegenerateMedian);
// jacobian
CZLAB_DEFINE_ERROR(SupportTouchesBoundary);
CZLAB_DEFINE_ERROR(SupportExceedsQ);
CZLAB_DEFINE_ERROR(EnumerationTooLarge);
CZLAB_DEFINE_ERROR(OutsideBall);
CZLAB_DEFINE_ERROR(StalledResidual);

#undef CZLAB_DEFINE_ERROR

} // namespace czlab
