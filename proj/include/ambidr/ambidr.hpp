#pragma once

#include "dataset.hpp"
#include "detector.hpp"
#include "document.hpp"
#include "edge_list.hpp"
#include "embedder.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "metrics.hpp"
#include "parallel.hpp"
#include "pipeline.hpp"
#include "random.hpp"
#include "relationship.hpp"
#include "sparsifier.hpp"
#include "splitter.hpp"
#include "svg.hpp"
#include "synthetic.hpp"
