#ifndef NAESEP_NAESEP_HPP
#define NAESEP_NAESEP_HPP

// Umbrella header.

#include "naesep/matrix.hpp"
#include "naesep/rng.hpp"
#include "naesep/numerics.hpp"
#include "naesep/fft.hpp"
#include "naesep/wav.hpp"
#include "naesep/dsp.hpp"
#include "naesep/nmf.hpp"
#include "naesep/nae.hpp"
#include "naesep/metrics.hpp"
#include "naesep/separation.hpp"
#include "naesep/model_io.hpp"
#include "naesep/toy.hpp"
#include "naesep/corpus.hpp"
#include "naesep/experiment.hpp"

#endif  // NAESEP_NAESEP_HPP
