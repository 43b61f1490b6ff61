#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vfrac {

enum class Errc {
  InvalidArgument,
  InvalidResolution,
  SlitOffLattice,
  SlitTouchesBoundary,
  InvalidSlit,
  GridMismatch,
  InvalidField,
  WindowTooCoarse,
  WindowOutsideDomain,
  CenterOffLattice,
  BoundaryPartitionInvalid,
  FloatingDomain,
  NoConvergence,
  AnnulusEmpty,
  TipOffLattice,
  FamilyEmpty,
  ProgramEmpty,
  NoTipFound,
  FormatError,
  ConfigError,
  NotDisconnecting,
  IoError,
};

std::string_view to_string(Errc code);

/// Single exception type for the library; the code identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace vfrac
