#ifndef CTSCORE_CTSCORE_HPP
#define CTSCORE_CTSCORE_HPP

// Controllability scores (VCS / AECS) of linear network dynamics and the
// matching D-/A-optimal approximate experimental designs.

#include "ctscore/allocation.hpp"
#include "ctscore/errors.hpp"
#include "ctscore/expm.hpp"
#include "ctscore/gramian.hpp"
#include "ctscore/linalg.hpp"
#include "ctscore/network.hpp"
#include "ctscore/oed.hpp"
#include "ctscore/scoring.hpp"
#include "ctscore/simplex.hpp"
#include "ctscore/structure.hpp"
#include "ctscore/sweep.hpp"

#endif  // CTSCORE_CTSCORE_HPP
