#pragma once

#include "cmt/analysis.hpp"
#include "cmt/bundled.hpp"
#include "cmt/error.hpp"
#include "cmt/manifold.hpp"
#include "cmt/matrix.hpp"
#include "cmt/poly.hpp"
#include "cmt/sim.hpp"
#include "cmt/spectral.hpp"
#include "cmt/stability.hpp"
#include "cmt/sysdsl.hpp"
