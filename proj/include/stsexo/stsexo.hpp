#pragma once

/// @file stsexo.hpp
/// @brief Convenience header pulling in the whole library.

#include "stsexo/anthro.hpp"
#include "stsexo/controller.hpp"
#include "stsexo/dynamics.hpp"
#include "stsexo/errors.hpp"
#include "stsexo/gas_spring.hpp"
#include "stsexo/geometry.hpp"
#include "stsexo/hypervolume.hpp"
#include "stsexo/mechanism.hpp"
#include "stsexo/nsga2.hpp"
#include "stsexo/objectives.hpp"
#include "stsexo/optimizer.hpp"
#include "stsexo/planar_chain.hpp"
#include "stsexo/sts_sim.hpp"

namespace stsexo {
inline constexpr const char* kVersion = "0.1.0";
}
