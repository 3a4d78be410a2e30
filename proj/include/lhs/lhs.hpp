// Umbrella header.
#pragma once

#include "lhs/classify.hpp"
#include "lhs/encoder.hpp"
#include "lhs/gmm.hpp"
#include "lhs/harness.hpp"
#include "lhs/image.hpp"
#include "lhs/linalg.hpp"
#include "lhs/metric.hpp"
#include "lhs/patterns.hpp"
#include "lhs/rng.hpp"
#include "lhs/util.hpp"
