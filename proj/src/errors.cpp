#include "shiftshare/errors.hpp"

namespace shiftshare {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::NonFinite: return "NonFinite";
    case Errc::EmptyPanel: return "EmptyPanel";
    case Errc::InvalidPanel: return "InvalidPanel";
    case Errc::DuplicateRegion: return "DuplicateRegion";
    case Errc::NegativeShare: return "NegativeShare";
    case Errc::DegenerateTreatment: return "DegenerateTreatment";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::InvalidElasticity: return "InvalidElasticity";
    case Errc::Io: return "Io";
    case Errc::DegenerateKnots: return "DegenerateKnots";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::TooFewDraws: return "TooFewDraws";
    case Errc::DegenerateSE: return "DegenerateSE";
    case Errc::WeakDesign: return "WeakDesign";
    case Errc::QuadratureNotConverged: return "QuadratureNotConverged";
    case Errc::BootstrapFailed: return "BootstrapFailed";
  }
  return "Unknown";
}

bool is_input_error(Errc code) noexcept {
  switch (code) {
    case Errc::MissingColumn:
    case Errc::NonFinite:
    case Errc::EmptyPanel:
    case Errc::InvalidPanel:
    case Errc::DuplicateRegion:
    case Errc::NegativeShare:
    case Errc::DegenerateTreatment:
    case Errc::InvalidConfig:
    case Errc::InvalidSpec:
    case Errc::InvalidElasticity:
    case Errc::Io:
      return true;
    default:
      return false;
  }
}

}  // namespace shiftshare
