// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "srif/errors.hpp"
#include "srif/fisher.hpp"
#include "srif/gaussian.hpp"
#include "srif/io.hpp"
#include "srif/limits.hpp"
#include "srif/multi.hpp"
#include "srif/oracle.hpp"
#include "srif/povm.hpp"
#include "srif/quadrature.hpp"
#include "srif/scene.hpp"
#include "srif/version.hpp"
