#pragma once

#include "fifd/types.hpp"

namespace fifd {

struct TruthProfile {
  Vector theta_star;
  double p_min = 0.0;   // weakest positive coordinate
  double n_max = 0.0;   // negative coordinate closest to zero
  double inf_norm = 0.0;
  int p_count = 0;
  int n_count = 0;

  static TruthProfile from(const Vector& theta_star);
};

}  // namespace fifd
