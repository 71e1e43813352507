#pragma once

#include <stdexcept>
#include <string>

namespace nevgrowth {

/// Root of every failure raised by the toolkit. `kind()` is the stable
/// machine-readable name used in CLI diagnostics and certificates.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

#define NEVGROWTH_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                          \
  public:                                                              \
    using Error::Error;                                                \
    const char* kind() const noexcept override { return #Name; }       \
  }

NEVGROWTH_DEFINE_ERROR(PoleProximity);
NEVGROWTH_DEFINE_ERROR(OutsideDomain);
NEVGROWTH_DEFINE_ERROR(Unsupported);
NEVGROWTH_DEFINE_ERROR(PoleOnCircle);
NEVGROWTH_DEFINE_ERROR(NonIntegerResidue);
NEVGROWTH_DEFINE_ERROR(NotReduced);
NEVGROWTH_DEFINE_ERROR(InvalidArgument);
NEVGROWTH_DEFINE_ERROR(QuadratureStall);
NEVGROWTH_DEFINE_ERROR(UnvalidatedPoleList);
NEVGROWTH_DEFINE_ERROR(DegenerateT);
NEVGROWTH_DEFINE_ERROR(StepCollapse);
NEVGROWTH_DEFINE_ERROR(ToleranceUnmet);
NEVGROWTH_DEFINE_ERROR(NoAdmissiblePath);
NEVGROWTH_DEFINE_ERROR(DomainError);
NEVGROWTH_DEFINE_ERROR(NotDecomposable);
NEVGROWTH_DEFINE_ERROR(EtaTooLarge);
NEVGROWTH_DEFINE_ERROR(NotAvailable);
NEVGROWTH_DEFINE_ERROR(DegenerateCoefficients);
NEVGROWTH_DEFINE_ERROR(NotNormalized);
NEVGROWTH_DEFINE_ERROR(ConfigError);

#undef NEVGROWTH_DEFINE_ERROR

}  // namespace nevgrowth
