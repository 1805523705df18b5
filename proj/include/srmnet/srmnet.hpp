// Copyright 2026 The SRMNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Umbrella header for the whole library.

#include "srmnet/autodiff.hpp"
#include "srmnet/cli.hpp"
#include "srmnet/data.hpp"
#include "srmnet/error.hpp"
#include "srmnet/flops.hpp"
#include "srmnet/gemm.hpp"
#include "srmnet/gradcheck.hpp"
#include "srmnet/graph.hpp"
#include "srmnet/image.hpp"
#include "srmnet/loss.hpp"
#include "srmnet/metrics.hpp"
#include "srmnet/model.hpp"
#include "srmnet/ops.hpp"
#include "srmnet/optim.hpp"
#include "srmnet/parallel.hpp"
#include "srmnet/params.hpp"
#include "srmnet/random.hpp"
#include "srmnet/serialize.hpp"
#include "srmnet/synthetic.hpp"
#include "srmnet/tensor.hpp"
#include "srmnet/train.hpp"
