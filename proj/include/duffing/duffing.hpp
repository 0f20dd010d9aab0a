// duffing.hpp: Umbrella include

#pragma once

#include "duffing/analysis.hpp"
#include "duffing/bath.hpp"
#include "duffing/classical.hpp"
#include "duffing/errors.hpp"
#include "duffing/fock.hpp"
#include "duffing/io.hpp"
#include "duffing/log.hpp"
#include "duffing/parallel.hpp"
#include "duffing/params.hpp"
#include "duffing/propagate.hpp"
#include "duffing/selftest.hpp"
#include "duffing/spectra.hpp"
#include "duffing/wigner.hpp"
