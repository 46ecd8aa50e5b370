#pragma once

#include "thermobg/adaptation.hpp"
#include "thermobg/engine.hpp"
#include "thermobg/evaluation.hpp"
#include "thermobg/frame.hpp"
#include "thermobg/frame_io.hpp"
#include "thermobg/mixture.hpp"
#include "thermobg/rng.hpp"
#include "thermobg/segmentation.hpp"
#include "thermobg/special.hpp"
#include "thermobg/synthetic.hpp"
#include "thermobg/variational.hpp"
