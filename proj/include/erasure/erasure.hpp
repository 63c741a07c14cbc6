#pragma once

#include "erasure/analysis.hpp"     // IWYU pragma: export
#include "erasure/common.hpp"       // IWYU pragma: export
#include "erasure/config.hpp"       // IWYU pragma: export
#include "erasure/dynamics.hpp"     // IWYU pragma: export
#include "erasure/energetics.hpp"   // IWYU pragma: export
#include "erasure/ensemble.hpp"     // IWYU pragma: export
#include "erasure/io.hpp"           // IWYU pragma: export
#include "erasure/measurement.hpp"  // IWYU pragma: export
#include "erasure/potential.hpp"    // IWYU pragma: export
#include "erasure/protocol.hpp"     // IWYU pragma: export
#include "erasure/rng.hpp"          // IWYU pragma: export
#include "erasure/run.hpp"          // IWYU pragma: export
