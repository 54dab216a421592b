#pragma once

#include "dpdlab/baseline.hpp"
#include "dpdlab/bench.hpp"
#include "dpdlab/blocksub.hpp"
#include "dpdlab/dpd.hpp"
#include "dpdlab/error.hpp"
#include "dpdlab/graph.hpp"
#include "dpdlab/instances.hpp"
#include "dpdlab/local.hpp"
#include "dpdlab/lp.hpp"
#include "dpdlab/model.hpp"
#include "dpdlab/parallel.hpp"
#include "dpdlab/schedule.hpp"
#include "dpdlab/trace.hpp"
