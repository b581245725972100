#pragma once

#include "ziber/links.hpp"
#include "ziber/rng.hpp"
#include "ziber/model.hpp"
#include "ziber/optimizer.hpp"
#include "ziber/estimation.hpp"
#include "ziber/simulation.hpp"
#include "ziber/selection.hpp"
