#pragma once

#include <stdexcept>
#include <string>

namespace slowcv {

enum class Errc {
  config,
  io,
  diverged,
  lag_too_large,
  too_few_samples,
  dimension_mismatch,
  convergence_failure,
  grid_too_coarse,
  empty_bin_row,
  degenerate_family,
  degenerate_variance,
  too_few_bins,
  empty_bin,
  invalid_argument,
};

const char* errc_name(Errc code) noexcept;

// True for failures caused by the numerics rather than by bad input.
bool is_numerical(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace slowcv
