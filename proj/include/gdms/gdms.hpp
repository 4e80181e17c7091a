#pragma once

#include "gdms/backward.hpp"
#include "gdms/complex_poly.hpp"
#include "gdms/error.hpp"
#include "gdms/holes.hpp"
#include "gdms/spectral.hpp"
#include "gdms/symbolic.hpp"
#include "gdms/system.hpp"
#include "gdms/thermo.hpp"
#include "gdms/io.hpp"
