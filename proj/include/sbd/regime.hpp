#pragma once

#include <cmath>

#include "sbd/errors.hpp"

namespace sbd {

/// Ruelle weights for the environment (c_minus) and the system (c_plus).
struct RegimeParams {
  double c_minus = 1.0;
  double c_plus = 1.0;

  void validate() const {
    if (!(c_minus > 0.0) || !std::isfinite(c_minus) || !(c_plus > 0.0) || !std::isfinite(c_plus))
      throw InputError("regime constants must be positive and finite");
  }

  friend bool operator==(const RegimeParams&, const RegimeParams&) = default;
};

}  // namespace sbd
