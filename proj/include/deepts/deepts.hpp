#pragma once

// deepts: a from-scratch deep-learning forecasting library and benchmark
// harness for photovoltaic power prediction under regularization regimes.

#include "deepts/analysis.hpp"
#include "deepts/checkpoint.hpp"
#include "deepts/config.hpp"
#include "deepts/data.hpp"
#include "deepts/errors.hpp"
#include "deepts/layers.hpp"
#include "deepts/metrics.hpp"
#include "deepts/models.hpp"
#include "deepts/numeric.hpp"
#include "deepts/params.hpp"
#include "deepts/regularization.hpp"
#include "deepts/report.hpp"
#include "deepts/rng.hpp"
#include "deepts/tensor.hpp"
#include "deepts/training.hpp"
