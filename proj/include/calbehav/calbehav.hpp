#pragma once

#include "calbehav/core.hpp"
#include "calbehav/calendar.hpp"
#include "calbehav/phonelog.hpp"
#include "calbehav/mapping.hpp"
#include "calbehav/pipeline.hpp"
#include "calbehav/miner.hpp"
#include "calbehav/baselines.hpp"
#include "calbehav/random.hpp"
#include "calbehav/evaluation.hpp"
#include "calbehav/report.hpp"
#include "calbehav/synth.hpp"
