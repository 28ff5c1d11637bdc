//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "ebpc/analysis.hpp"
#include "ebpc/bitio.hpp"
#include "ebpc/codecs.hpp"
#include "ebpc/config.hpp"
#include "ebpc/container.hpp"
#include "ebpc/error.hpp"
#include "ebpc/half.hpp"
#include "ebpc/symbol_codec.hpp"
#include "ebpc/transform.hpp"
