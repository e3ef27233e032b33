#pragma once

#include "ebr/airy.hpp"
#include "ebr/correlation.hpp"
#include "ebr/dgp.hpp"
#include "ebr/ebr.hpp"
#include "ebr/errors.hpp"
#include "ebr/io.hpp"
#include "ebr/painleve.hpp"
#include "ebr/parallel.hpp"
#include "ebr/power.hpp"
#include "ebr/residual.hpp"
#include "ebr/rng.hpp"
#include "ebr/spectral.hpp"
#include "ebr/twdist.hpp"
#include "ebr/version.hpp"
