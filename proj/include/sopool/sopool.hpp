#pragma once

// Umbrella header.

#include "classifier.hpp"
#include "common.hpp"
#include "config.hpp"
#include "dataset.hpp"
#include "dictionary.hpp"
#include "encoding.hpp"
#include "parallel.hpp"
#include "patches.hpp"
#include "pipeline.hpp"
#include "pooling.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "spd.hpp"
#include "synth.hpp"
#include "whitening.hpp"
