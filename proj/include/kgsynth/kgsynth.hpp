#pragma once

#include "kgsynth/analysis.hpp"
#include "kgsynth/convert.hpp"
#include "kgsynth/derangement.hpp"
#include "kgsynth/error.hpp"
#include "kgsynth/eval.hpp"
#include "kgsynth/kg.hpp"
#include "kgsynth/matching.hpp"
#include "kgsynth/rewriter.hpp"
#include "kgsynth/textgen.hpp"
#include "kgsynth/transe.hpp"
#include "kgsynth/transform.hpp"
