#ifndef PERFHOM_PERFHOM_HPP
#define PERFHOM_PERFHOM_HPP

#include "perfhom/boundary_operator.hpp"
#include "perfhom/cell.hpp"
#include "perfhom/config.hpp"
#include "perfhom/curve.hpp"
#include "perfhom/density.hpp"
#include "perfhom/discrepancy.hpp"
#include "perfhom/ewald.hpp"
#include "perfhom/fd_solver.hpp"
#include "perfhom/fit.hpp"
#include "perfhom/grid.hpp"
#include "perfhom/kelvin.hpp"
#include "perfhom/kernel_basis.hpp"
#include "perfhom/lame.hpp"
#include "perfhom/layer_potential.hpp"
#include "perfhom/perforation.hpp"
#include "perfhom/periodic_solve.hpp"
#include "perfhom/quadrature.hpp"
#include "perfhom/study.hpp"

#endif
