#pragma once

#include "metrolab/bounds.hpp"
#include "metrolab/errors.hpp"
#include "metrolab/evolution.hpp"
#include "metrolab/fisher.hpp"
#include "metrolab/linalg.hpp"
#include "metrolab/models.hpp"
#include "metrolab/rate_chain.hpp"
#include "metrolab/spin.hpp"
#include "metrolab/version.hpp"
