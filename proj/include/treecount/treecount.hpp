#pragma once

#include "treecount/cauchy_sketch.hpp"
#include "treecount/elimination.hpp"
#include "treecount/error.hpp"
#include "treecount/estimator.hpp"
#include "treecount/exact.hpp"
#include "treecount/generators.hpp"
#include "treecount/graph.hpp"
#include "treecount/graph_io.hpp"
#include "treecount/laplacian_solver.hpp"
#include "treecount/leverage.hpp"
#include "treecount/log.hpp"
#include "treecount/random.hpp"
#include "treecount/uncorrelated.hpp"
#include "treecount/verify.hpp"
