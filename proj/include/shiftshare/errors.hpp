#pragma once

#include <stdexcept>
#include <string>

namespace shiftshare {

enum class Errc {
  // input / configuration
  MissingColumn,
  NonFinite,
  EmptyPanel,
  InvalidPanel,
  DuplicateRegion,
  NegativeShare,
  DegenerateTreatment,
  InvalidConfig,
  InvalidSpec,
  InvalidElasticity,
  Io,
  // computational
  DegenerateKnots,
  RankDeficient,
  NoConvergence,
  TooFewDraws,
  DegenerateSE,
  WeakDesign,
  QuadratureNotConverged,
  BootstrapFailed,
};

const char* errc_name(Errc code) noexcept;

// True for errors caused by bad input or configuration (CLI exit code 2).
bool is_input_error(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace shiftshare
