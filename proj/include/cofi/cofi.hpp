#pragma once

// Library umbrella. The command-line front end (cofi/cli/app.hpp) also needs CLI11.
#include "cofi/bench/agents.hpp"
#include "cofi/bench/metrics.hpp"
#include "cofi/bench/scenario.hpp"
#include "cofi/core/error.hpp"
#include "cofi/core/json.hpp"
#include "cofi/core/normal.hpp"
#include "cofi/core/rng.hpp"
#include "cofi/core/types.hpp"
#include "cofi/filter/evaluator.hpp"
#include "cofi/filter/kde.hpp"
#include "cofi/filter/particle_filter.hpp"
#include "cofi/filter/tracker.hpp"
#include "cofi/geo/geojson.hpp"
#include "cofi/geo/geometry.hpp"
#include "cofi/geo/grid.hpp"
#include "cofi/geo/perturbation.hpp"
#include "cofi/geo/raster_io.hpp"
#include "cofi/geo/relations.hpp"
#include "cofi/geo/starmap.hpp"
#include "cofi/geo/vector_map.hpp"
#include "cofi/ingest/ais.hpp"
#include "cofi/ingest/projection.hpp"
#include "cofi/ingest/track_io.hpp"
#include "cofi/logic/ast.hpp"
#include "cofi/logic/environment.hpp"
#include "cofi/logic/field.hpp"
#include "cofi/logic/ground.hpp"
#include "cofi/logic/parser.hpp"
#include "cofi/logic/printer.hpp"
#include "cofi/logic/wmc.hpp"
#include "cofi/trust/trust.hpp"
