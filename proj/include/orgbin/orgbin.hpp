#pragma once

#include "orgbin/baselines.hpp"
#include "orgbin/checkpoint.hpp"
#include "orgbin/cli.hpp"
#include "orgbin/common.hpp"
#include "orgbin/corpus.hpp"
#include "orgbin/embed.hpp"
#include "orgbin/entities.hpp"
#include "orgbin/eval/benchmark.hpp"
#include "orgbin/eval/kfold.hpp"
#include "orgbin/eval/metrics.hpp"
#include "orgbin/eval/student_t.hpp"
#include "orgbin/gold.hpp"
#include "orgbin/nn/cell.hpp"
#include "orgbin/nn/model.hpp"
#include "orgbin/nn/serialize.hpp"
#include "orgbin/nn/train.hpp"
#include "orgbin/run_config.hpp"
#include "orgbin/textprep.hpp"
