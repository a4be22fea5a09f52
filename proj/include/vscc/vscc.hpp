#pragma once

// Umbrella header for the VSCC variable-selection library.

#include "vscc/csv.hpp"
#include "vscc/data.hpp"
#include "vscc/error.hpp"
#include "vscc/gmm.hpp"
#include "vscc/metrics.hpp"
#include "vscc/preprocess.hpp"
#include "vscc/report.hpp"
#include "vscc/rng.hpp"
#include "vscc/selection.hpp"
#include "vscc/simgen.hpp"
#include "vscc/workflows.hpp"
