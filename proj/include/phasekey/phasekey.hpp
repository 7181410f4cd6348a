#pragma once

// Umbrella header: the whole simulator and analysis library.

#include "phasekey/beacon.hpp"
#include "phasekey/bits.hpp"
#include "phasekey/bounds.hpp"
#include "phasekey/experiments.hpp"
#include "phasekey/fading_channel.hpp"
#include "phasekey/harness.hpp"
#include "phasekey/mle_estimator.hpp"
#include "phasekey/numeric.hpp"
#include "phasekey/protocol.hpp"
#include "phasekey/quantizer.hpp"
#include "phasekey/randomness_tests.hpp"
#include "phasekey/reconciliation.hpp"
#include "phasekey/rng.hpp"
#include "phasekey/sample_vector.hpp"
