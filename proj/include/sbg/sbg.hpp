#pragma once

// Core library: channel model, encoder, decoders, theory and experiment
// harness. The JSON (serialize.hpp, config.hpp) and command-line (cli.hpp)
// layers are included separately.

#include "sbg/beamspace.hpp"
#include "sbg/decoder.hpp"
#include "sbg/encoder.hpp"
#include "sbg/errors.hpp"
#include "sbg/format.hpp"
#include "sbg/harness.hpp"
#include "sbg/measurement.hpp"
#include "sbg/modulation.hpp"
#include "sbg/random.hpp"
#include "sbg/robust.hpp"
#include "sbg/theory.hpp"
