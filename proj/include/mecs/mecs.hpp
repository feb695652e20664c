#pragma once

#include "mecs/event_model.hpp"
#include "mecs/coincidence.hpp"
#include "mecs/macro.hpp"
#include "mecs/streaming.hpp"
#include "mecs/signal.hpp"
#include "mecs/synthetic.hpp"
#include "mecs/case_study.hpp"
#include "mecs/io.hpp"
#include "mecs/config.hpp"
#include "mecs/commands.hpp"
