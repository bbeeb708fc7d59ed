#pragma once

// Library umbrella; the CLI lives in sixwave/cli.hpp and needs CLI11.

#include "sixwave/bounds.hpp"
#include "sixwave/collision.hpp"
#include "sixwave/config.hpp"
#include "sixwave/core.hpp"
#include "sixwave/duhamel.hpp"
#include "sixwave/error.hpp"
#include "sixwave/kaniel_shinbrot.hpp"
#include "sixwave/oracle.hpp"
#include "sixwave/scattering.hpp"
