#pragma once

// Umbrella header: exact regenerative simulation of binary chains with
// complete connections, renewal calculus of the regeneration times, and
// long-run variance estimation with CLT diagnostics.

#include "gchain/clt.hpp"
#include "gchain/config.hpp"
#include "gchain/core.hpp"
#include "gchain/decay.hpp"
#include "gchain/io.hpp"
#include "gchain/kernel.hpp"
#include "gchain/parallel.hpp"
#include "gchain/regen.hpp"
#include "gchain/renewal.hpp"
#include "gchain/rng.hpp"
#include "gchain/stats.hpp"
