#pragma once

// Umbrella header.

#include "probpool/aggregator.hpp"
#include "probpool/core.hpp"
#include "probpool/data.hpp"
#include "probpool/eval.hpp"
#include "probpool/expgrad.hpp"
#include "probpool/experts.hpp"
#include "probpool/io.hpp"
#include "probpool/market.hpp"
#include "probpool/registry.hpp"
#include "probpool/rng.hpp"
#include "probpool/variance.hpp"
