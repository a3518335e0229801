#include "slowcv/error.hpp"

namespace slowcv {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::config: return "ConfigError";
    case Errc::io: return "IoError";
    case Errc::diverged: return "Diverged";
    case Errc::lag_too_large: return "LagTooLarge";
    case Errc::too_few_samples: return "TooFewSamples";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::convergence_failure: return "ConvergenceFailure";
    case Errc::grid_too_coarse: return "GridTooCoarse";
    case Errc::empty_bin_row: return "EmptyBinRow";
    case Errc::degenerate_family: return "DegenerateFamily";
    case Errc::degenerate_variance: return "DegenerateVariance";
    case Errc::too_few_bins: return "TooFewBins";
    case Errc::empty_bin: return "EmptyBin";
    case Errc::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

bool is_numerical(Errc code) noexcept {
  switch (code) {
    case Errc::diverged:
    case Errc::convergence_failure:
    case Errc::grid_too_coarse:
    case Errc::degenerate_family:
    case Errc::degenerate_variance:
    case Errc::empty_bin_row:
    case Errc::empty_bin:
      return true;
    default:
      return false;
  }
}

}  // namespace slowcv
