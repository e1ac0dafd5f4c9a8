#pragma once

#include "gatebench/basis.hpp"
#include "gatebench/eig.hpp"
#include "gatebench/epg.hpp"
#include "gatebench/fock.hpp"
#include "gatebench/io.hpp"
#include "gatebench/local_fit.hpp"
#include "gatebench/matrix.hpp"
#include "gatebench/optim.hpp"
#include "gatebench/photonic.hpp"
#include "gatebench/process.hpp"
#include "gatebench/rng.hpp"
#include "gatebench/tomography.hpp"
