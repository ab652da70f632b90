#ifndef SPECDIST_SPECDIST_HPP
#define SPECDIST_SPECDIST_HPP

// Umbrella header for the specdist library (everything except the CLI).

#include "specdist/csv.hpp"
#include "specdist/distances.hpp"
#include "specdist/error.hpp"
#include "specdist/fft.hpp"
#include "specdist/ingest.hpp"
#include "specdist/log.hpp"
#include "specdist/panel.hpp"
#include "specdist/pipeline.hpp"
#include "specdist/rng.hpp"
#include "specdist/simulator.hpp"
#include "specdist/spectra.hpp"
#include "specdist/timefmt.hpp"

#endif // SPECDIST_SPECDIST_HPP
