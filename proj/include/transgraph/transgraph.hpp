#pragma once

// Umbrella header for the discourse-graph document translation pipeline.
// The live HTTP backend lives in transgraph/http_backend.hpp and is not
// pulled in here.

#include "transgraph/baselines.hpp"
#include "transgraph/chunker.hpp"
#include "transgraph/cohesion.hpp"
#include "transgraph/collection.hpp"
#include "transgraph/errors.hpp"
#include "transgraph/gateway.hpp"
#include "transgraph/graph.hpp"
#include "transgraph/metrics.hpp"
#include "transgraph/prompts.hpp"
#include "transgraph/runner.hpp"
#include "transgraph/sentences.hpp"
#include "transgraph/text.hpp"
#include "transgraph/translator.hpp"
