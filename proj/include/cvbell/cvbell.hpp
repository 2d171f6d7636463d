#pragma once

#include "cvbell/correlators.hpp"
#include "cvbell/epr_state.hpp"
#include "cvbell/lhv_phase_space.hpp"
#include "cvbell/numerics/adaptive.hpp"
#include "cvbell/numerics/gaussian_integral.hpp"
#include "cvbell/numerics/hermite.hpp"
#include "cvbell/numerics/orthant.hpp"
#include "cvbell/numerics/random.hpp"
#include "cvbell/numerics/rules.hpp"
#include "cvbell/numerics/special_functions.hpp"
#include "cvbell/observables.hpp"
#include "cvbell/profile.hpp"
#include "cvbell/wigner_symbol.hpp"
