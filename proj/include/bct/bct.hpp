#ifndef BCT_BCT_HPP
#define BCT_BCT_HPP

#include "bct/baselines.hpp"
#include "bct/core_types.hpp"
#include "bct/ctw.hpp"
#include "bct/entropy.hpp"
#include "bct/error.hpp"
#include "bct/inference.hpp"
#include "bct/io.hpp"
#include "bct/sampler.hpp"
#include "bct/simulate.hpp"

#endif  // BCT_BCT_HPP
