#pragma once

// Umbrella header.

#include "udgp/analysis.hpp"
#include "udgp/baseline.hpp"
#include "udgp/distribution.hpp"
#include "udgp/domain.hpp"
#include "udgp/error.hpp"
#include "udgp/evaluate.hpp"
#include "udgp/experiment.hpp"
#include "udgp/extract.hpp"
#include "udgp/hungarian.hpp"
#include "udgp/ingest.hpp"
#include "udgp/io.hpp"
#include "udgp/lag_operator.hpp"
#include "udgp/parallel.hpp"
#include "udgp/pipeline.hpp"
#include "udgp/projection.hpp"
#include "udgp/solver.hpp"
#include "udgp/spectral.hpp"
