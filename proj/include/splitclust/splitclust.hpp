#pragma once

#include "splitclust/baseline.hpp"
#include "splitclust/errors.hpp"
#include "splitclust/eval.hpp"
#include "splitclust/io.hpp"
#include "splitclust/linalg.hpp"
#include "splitclust/model.hpp"
#include "splitclust/refine.hpp"
#include "splitclust/rng.hpp"
#include "splitclust/version.hpp"
