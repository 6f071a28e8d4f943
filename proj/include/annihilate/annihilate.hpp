#pragma once

#include "comparison_processes.hpp"
#include "configuration.hpp"
#include "dynamics.hpp"
#include "exact_laws.hpp"
#include "experiment.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "stats.hpp"
#include "topology.hpp"
#include "verification.hpp"
