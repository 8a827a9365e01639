// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tubal/bench.hpp"
#include "tubal/decomp.hpp"
#include "tubal/error.hpp"
#include "tubal/io.hpp"
#include "tubal/randomized.hpp"
#include "tubal/rng.hpp"
#include "tubal/spectral.hpp"
#include "tubal/synthetic.hpp"
#include "tubal/tensor3.hpp"
#include "tubal/tprod.hpp"
