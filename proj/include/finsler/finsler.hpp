#pragma once

#include "finsler/calculus.hpp"
#include "finsler/derivatives.hpp"
#include "finsler/dual.hpp"
#include "finsler/flows.hpp"
#include "finsler/geodesics.hpp"
#include "finsler/isoparametric.hpp"
#include "finsler/metric.hpp"
#include "finsler/navigation.hpp"
#include "finsler/numerics.hpp"
#include "finsler/report.hpp"
#include "finsler/scalar_fields.hpp"
#include "finsler/wind.hpp"
#include "finsler/zoo.hpp"
