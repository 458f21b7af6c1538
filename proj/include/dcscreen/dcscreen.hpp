#pragma once

#include "dcscreen/baselines.hpp"
#include "dcscreen/dataset.hpp"
#include "dcscreen/dcov.hpp"
#include "dcscreen/error.hpp"
#include "dcscreen/matrix.hpp"
#include "dcscreen/methods.hpp"
#include "dcscreen/report.hpp"
#include "dcscreen/screen.hpp"
#include "dcscreen/simulate.hpp"
