#pragma once

#include "wearcache/trace.hpp"
#include "wearcache/fifo.hpp"
#include "wearcache/model.hpp"
#include "wearcache/predictor.hpp"
#include "wearcache/explorer.hpp"
#include "wearcache/oracle.hpp"
