#pragma once

// Umbrella header.

#include "cannings/coalescent.hpp"
#include "cannings/config.hpp"
#include "cannings/errors.hpp"
#include "cannings/experiment.hpp"
#include "cannings/limit.hpp"
#include "cannings/offspring.hpp"
#include "cannings/parallel.hpp"
#include "cannings/profile.hpp"
#include "cannings/rng.hpp"
#include "cannings/serialize.hpp"
#include "cannings/stats.hpp"
#include "cannings/tree.hpp"
#include "cannings/verify.hpp"
