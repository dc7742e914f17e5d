// bbr.hpp: umbrella header

#pragma once

#include "bbr/constants.hpp"
#include "bbr/effint.hpp"
#include "bbr/entanglement.hpp"
#include "bbr/errors.hpp"
#include "bbr/io.hpp"
#include "bbr/kernels.hpp"
#include "bbr/linalg.hpp"
#include "bbr/params.hpp"
#include "bbr/quadrature.hpp"
#include "bbr/scan.hpp"
#include "bbr/specialfn.hpp"
#include "bbr/state.hpp"
#include "bbr/twoqubit.hpp"

namespace bbr {

inline constexpr const char* kVersion = "1.0.0";

} // namespace bbr
