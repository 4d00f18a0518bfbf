#pragma once

// Umbrella header: the whole toolkit.

#include "satkit/alignment.hpp"
#include "satkit/cli.hpp"
#include "satkit/errors.hpp"
#include "satkit/http_backend.hpp"
#include "satkit/hungarian.hpp"
#include "satkit/metrics.hpp"
#include "satkit/mock_backends.hpp"
#include "satkit/normalize.hpp"
#include "satkit/orchestrator.hpp"
#include "satkit/prompts.hpp"
#include "satkit/report.hpp"
#include "satkit/stats.hpp"
#include "satkit/synth.hpp"
#include "satkit/transcript.hpp"
