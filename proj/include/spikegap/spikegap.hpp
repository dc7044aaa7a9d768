#pragma once

// Everything except the command-line layer (spikegap/cli.hpp needs nlohmann/json).
#include "spikegap/crossings.hpp"
#include "spikegap/errors.hpp"
#include "spikegap/instanton.hpp"
#include "spikegap/model.hpp"
#include "spikegap/numeric.hpp"
#include "spikegap/parallel.hpp"
#include "spikegap/precision.hpp"
#include "spikegap/scaling.hpp"
#include "spikegap/spectrum.hpp"
#include "spikegap/variational.hpp"
#include "spikegap/wkb.hpp"
