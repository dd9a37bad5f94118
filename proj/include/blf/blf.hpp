#pragma once
// Umbrella header.

#include "core.hpp"
#include "corpus.hpp"
#include "svo.hpp"
#include "subject_catalog.hpp"
#include "density.hpp"
#include "stance.hpp"
#include "pair_sampler.hpp"
#include "belief_clusters.hpp"
#include "trajectory.hpp"
#include "landscape.hpp"
#include "hypotheses.hpp"
#include "render.hpp"
#include "config.hpp"
#include "manifest.hpp"
#include "pipeline.hpp"
#include "synthetic.hpp"
