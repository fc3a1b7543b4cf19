#pragma once

#include "bevsense/circuit.hpp"
#include "bevsense/classify.hpp"
#include "bevsense/dataset.hpp"
#include "bevsense/dataset_io.hpp"
#include "bevsense/error.hpp"
#include "bevsense/experiment.hpp"
#include "bevsense/features.hpp"
#include "bevsense/fit.hpp"
#include "bevsense/forest.hpp"
#include "bevsense/frame.hpp"
#include "bevsense/json_io.hpp"
#include "bevsense/mlp.hpp"
#include "bevsense/plot.hpp"
#include "bevsense/rng.hpp"
#include "bevsense/spectrum.hpp"
#include "bevsense/svd.hpp"
#include "bevsense/synthetic.hpp"
