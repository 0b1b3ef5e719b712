#pragma once

#include <goalest/assembly.hpp>
#include <goalest/autodiff.hpp>
#include <goalest/error.hpp>
#include <goalest/estimator.hpp>
#include <goalest/localization.hpp>
#include <goalest/mesh.hpp>
#include <goalest/problems.hpp>
#include <goalest/quadrature.hpp>
#include <goalest/solvers.hpp>
#include <goalest/space.hpp>
#include <goalest/sparse.hpp>
#include <goalest/study.hpp>
#include <goalest/vtk.hpp>
