#pragma once

#include <stdexcept>
#include <string>

namespace exclab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define EXCLAB_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                     \
    public:                                                         \
        explicit Name(const std::string &what) : Error(what) {}     \
    }

// markov-core
EXCLAB_DEFINE_ERROR(NegativeRate);
EXCLAB_DEFINE_ERROR(Reducible);
EXCLAB_DEFINE_ERROR(NonzeroDiagonal);
EXCLAB_DEFINE_ERROR(SingularSystem);
EXCLAB_DEFINE_ERROR(EigenFailure);
EXCLAB_DEFINE_ERROR(StepCollapse);
EXCLAB_DEFINE_ERROR(DimensionMismatch);
EXCLAB_DEFINE_ERROR(InvalidScheme);

// dqd-model
EXCLAB_DEFINE_ERROR(InvalidParameters);

// excursion-engine
EXCLAB_DEFINE_ERROR(BadPartition);
EXCLAB_DEFINE_ERROR(SingularB);
EXCLAB_DEFINE_ERROR(SingularResolvent);
EXCLAB_DEFINE_ERROR(NonIntegerScheme);
EXCLAB_DEFINE_ERROR(MassDeficit);
EXCLAB_DEFINE_ERROR(QuadratureFailure);

// observables
EXCLAB_DEFINE_ERROR(DegenerateFermi);
EXCLAB_DEFINE_ERROR(DivergentFano);

// mc-oracle
EXCLAB_DEFINE_ERROR(TooFewRecords);

// sweep-cli
EXCLAB_DEFINE_ERROR(ConfigError);
EXCLAB_DEFINE_ERROR(UnknownColumn);
EXCLAB_DEFINE_ERROR(MalformedCsv);

#undef EXCLAB_DEFINE_ERROR

} // namespace exclab
