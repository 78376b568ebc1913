#pragma once

#include "qcalc/bounds.hpp"
#include "qcalc/context.hpp"
#include "qcalc/io.hpp"
#include "qcalc/qcalculus.hpp"
#include "qcalc/qcore.hpp"
#include "qcalc/qspecial.hpp"
#include "qcalc/spectral.hpp"
#include "qcalc/verify.hpp"
