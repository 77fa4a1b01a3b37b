#pragma once

// Umbrella header for the consistent effect histories calculus.

#include "ceh/decoherence.hpp"
#include "ceh/error.hpp"
#include "ceh/histories.hpp"
#include "ceh/logic.hpp"
#include "ceh/matrix.hpp"
#include "ceh/numerics.hpp"
#include "ceh/quantum.hpp"
