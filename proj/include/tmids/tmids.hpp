#pragma once

#include "tmids/baseline.hpp"
#include "tmids/binarizer.hpp"
#include "tmids/commands.hpp"
#include "tmids/config.hpp"
#include "tmids/csv.hpp"
#include "tmids/error.hpp"
#include "tmids/explain.hpp"
#include "tmids/ingest.hpp"
#include "tmids/kdtree.hpp"
#include "tmids/metrics.hpp"
#include "tmids/model_io.hpp"
#include "tmids/preprocess.hpp"
#include "tmids/rng.hpp"
#include "tmids/table.hpp"
#include "tmids/tsetlin.hpp"
