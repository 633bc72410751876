#pragma once

#include "quickcount/apportionment.hpp"
#include "quickcount/bayes.hpp"
#include "quickcount/bootstrap.hpp"
#include "quickcount/catalog.hpp"
#include "quickcount/design.hpp"
#include "quickcount/errors.hpp"
#include "quickcount/io.hpp"
#include "quickcount/mi.hpp"
#include "quickcount/poststrat.hpp"
#include "quickcount/quantile.hpp"
#include "quickcount/replay.hpp"
#include "quickcount/rng.hpp"
#include "quickcount/sampleframe.hpp"
#include "quickcount/summary.hpp"
#include "quickcount/synth.hpp"
#include "quickcount/table.hpp"
#include "quickcount/truncnorm.hpp"
