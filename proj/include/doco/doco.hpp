#pragma once

#include "doco/algorithm.hpp"
#include "doco/errors.hpp"
#include "doco/libsvm.hpp"
#include "doco/linalg.hpp"
#include "doco/metrics.hpp"
#include "doco/network.hpp"
#include "doco/problems.hpp"
#include "doco/rng.hpp"
