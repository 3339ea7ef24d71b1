#pragma once

#include "hddrul/dataset.hpp"
#include "hddrul/error.hpp"
#include "hddrul/eval.hpp"
#include "hddrul/features.hpp"
#include "hddrul/forest.hpp"
#include "hddrul/neural.hpp"
#include "hddrul/preprocess.hpp"
#include "hddrul/rng.hpp"
#include "hddrul/text.hpp"
