#pragma once

#include "revortex/core.hpp"
#include "revortex/profile.hpp"
#include "revortex/atlas.hpp"
#include "revortex/renorm.hpp"
#include "revortex/dynamics.hpp"
#include "revortex/rings.hpp"
#include "revortex/field.hpp"
#include "revortex/ansatz.hpp"
#include "revortex/vortexfind.hpp"
#include "revortex/gpmin.hpp"
#include "revortex/io.hpp"
