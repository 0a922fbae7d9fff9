#pragma once

#include "typeiii/dataset.hpp"
#include "typeiii/design.hpp"
#include "typeiii/error.hpp"
#include "typeiii/fdist.hpp"
#include "typeiii/formula.hpp"
#include "typeiii/linalg.hpp"
#include "typeiii/projector.hpp"
#include "typeiii/report.hpp"
#include "typeiii/simulate.hpp"
#include "typeiii/sstypes.hpp"
#include "typeiii/twofactor.hpp"
