#pragma once

// Everything except the HTTP server (comfort/server.hpp).

#include "comfort/config.hpp"
#include "comfort/csv.hpp"
#include "comfort/error.hpp"
#include "comfort/evalbench.hpp"
#include "comfort/forest.hpp"
#include "comfort/garments.hpp"
#include "comfort/labels.hpp"
#include "comfort/lstm.hpp"
#include "comfort/metrics.hpp"
#include "comfort/model_io.hpp"
#include "comfort/parallel.hpp"
#include "comfort/pipeline.hpp"
#include "comfort/pmv.hpp"
#include "comfort/preprocess.hpp"
#include "comfort/record.hpp"
#include "comfort/rng.hpp"
#include "comfort/session.hpp"
#include "comfort/simulator.hpp"
