#pragma once

#include "monovi/assembly.hpp"
#include "monovi/error.hpp"
#include "monovi/iteration.hpp"
#include "monovi/mesh.hpp"
#include "monovi/monotone_graph.hpp"
#include "monovi/nonlinearity.hpp"
#include "monovi/operator.hpp"
#include "monovi/verify.hpp"
#include "monovi/vi_solver.hpp"
