#pragma once

#include "lfpp/core.hpp"
#include "lfpp/field.hpp"
#include "lfpp/region.hpp"
#include "lfpp/metric.hpp"
#include "lfpp/stats.hpp"
#include "lfpp/balls.hpp"
#include "lfpp/geodesics.hpp"
#include "lfpp/parallel.hpp"
#include "lfpp/scaling.hpp"
#include "lfpp/io.hpp"
#include "lfpp/experiments.hpp"
