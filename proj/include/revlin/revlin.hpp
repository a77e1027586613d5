// Copyright 2026 The revlin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "revlin/arena.hpp"
#include "revlin/baselines.hpp"
#include "revlin/error.hpp"
#include "revlin/inversion.hpp"
#include "revlin/kernels.hpp"
#include "revlin/matrix.hpp"
#include "revlin/program.hpp"
#include "revlin/rational.hpp"
#include "revlin/regression.hpp"
#include "revlin/sampling.hpp"
