#pragma once

// Convenience umbrella: pulls in the whole library.

#include "crowdocean/baselines.hpp"
#include "crowdocean/clip.hpp"
#include "crowdocean/core.hpp"
#include "crowdocean/features.hpp"
#include "crowdocean/mlp.hpp"
#include "crowdocean/ocean.hpp"
#include "crowdocean/pipeline.hpp"
#include "crowdocean/scg.hpp"
#include "crowdocean/synth.hpp"
#include "crowdocean/trajectory_io.hpp"
