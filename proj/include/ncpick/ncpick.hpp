#pragma once

#include "ncpick/algebra.hpp"
#include "ncpick/cauchy.hpp"
#include "ncpick/cpmaps.hpp"
#include "ncpick/errors.hpp"
#include "ncpick/herglotz.hpp"
#include "ncpick/io.hpp"
#include "ncpick/linalg.hpp"
#include "ncpick/ncrat.hpp"
#include "ncpick/suite.hpp"
