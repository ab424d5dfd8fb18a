#pragma once

#include "qrank/classical.hpp"
#include "qrank/common.hpp"
#include "qrank/graph.hpp"
#include "qrank/lattice.hpp"
#include "qrank/quantum.hpp"
#include "qrank/spectral.hpp"
