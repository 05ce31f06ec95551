#pragma once

#include "hypermap/embedder.hpp"
#include "hypermap/evaluate.hpp"
#include "hypermap/generator.hpp"
#include "hypermap/geometry.hpp"
#include "hypermap/graph.hpp"
#include "hypermap/likelihood.hpp"
#include "hypermap/prediction.hpp"
#include "hypermap/version.hpp"
