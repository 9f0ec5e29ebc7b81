#ifndef LOADPAT_LOADPAT_HPP
#define LOADPAT_LOADPAT_HPP

#include "loadpat/calendar.hpp"
#include "loadpat/clustering.hpp"
#include "loadpat/config.hpp"
#include "loadpat/csv.hpp"
#include "loadpat/error.hpp"
#include "loadpat/ingest.hpp"
#include "loadpat/models.hpp"
#include "loadpat/patterns.hpp"
#include "loadpat/pipeline.hpp"
#include "loadpat/plot.hpp"
#include "loadpat/sax.hpp"
#include "loadpat/synth.hpp"

#endif  // LOADPAT_LOADPAT_HPP
