#pragma once

#include "pqtail/ce.hpp"
#include "pqtail/config.hpp"
#include "pqtail/engine.hpp"
#include "pqtail/errors.hpp"
#include "pqtail/estimate.hpp"
#include "pqtail/harness.hpp"
#include "pqtail/measure.hpp"
#include "pqtail/model.hpp"
#include "pqtail/outputs.hpp"
#include "pqtail/parallel.hpp"
#include "pqtail/report.hpp"
#include "pqtail/rng.hpp"
