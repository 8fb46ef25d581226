#ifndef PLLI_PLLI_HPP
#define PLLI_PLLI_HPP

#include "plli/error.hpp"
#include "plli/core.hpp"
#include "plli/local_models.hpp"
#include "plli/kmeans.hpp"
#include "plli/segment_cost.hpp"
#include "plli/dp_partitioner.hpp"
#include "plli/cluster1d.hpp"
#include "plli/baselines_metrics.hpp"
#include "plli/io.hpp"

#endif  // PLLI_PLLI_HPP
