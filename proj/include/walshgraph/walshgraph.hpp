#pragma once

// Diffusions on metric graphs: graph families with contracting knots, the
// limiting asymmetry analysis, closed-form first-passage transforms, the
// renewal verification system, trajectory simulation, and the statistical
// harness tying them together.

#include "walshgraph/common.hpp"
#include "walshgraph/contraction.hpp"
#include "walshgraph/ensemble.hpp"
#include "walshgraph/experiments.hpp"
#include "walshgraph/graph.hpp"
#include "walshgraph/hyperbolic.hpp"
#include "walshgraph/interval_exit.hpp"
#include "walshgraph/linalg.hpp"
#include "walshgraph/parse.hpp"
#include "walshgraph/piecewise.hpp"
#include "walshgraph/renewal.hpp"
#include "walshgraph/report.hpp"
#include "walshgraph/rng.hpp"
#include "walshgraph/scale.hpp"
#include "walshgraph/sim.hpp"
#include "walshgraph/star.hpp"
#include "walshgraph/stats.hpp"
#include "walshgraph/testfn.hpp"
