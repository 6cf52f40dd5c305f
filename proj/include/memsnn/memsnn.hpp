#pragma once

#include "memsnn/analysis.hpp"
#include "memsnn/config.hpp"
#include "memsnn/dataset.hpp"
#include "memsnn/device.hpp"
#include "memsnn/engine.hpp"
#include "memsnn/error.hpp"
#include "memsnn/network.hpp"
#include "memsnn/neuron.hpp"
