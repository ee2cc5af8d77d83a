#pragma once

#include <complex>
#include <string>
#include <vector>

#include "extlab/core.hpp"

namespace extlab::maxprinciple {

using Complex = std::complex<double>;

// Holomorphic test families on Omega(h) = [1/2, 3/2] x i[-h alpha, h alpha].
// single_pole: 1/(z - 1 - 3i h alpha/2)   (pole just above the strip)
// pole_array:  sum of K = ceil(h^{-1/2}) poles at height h alpha / 2 with
//              residues h - not holomorphic on Omega(h); probes sharpness.
struct MaxPrincipleCase {
    enum class Family { Constant, SinglePole, PoleArray };
    Family family = Family::SinglePole;
    double alpha = 1.0;
    double bound_c = 0.0;   // hypothesis constant C (0: family default)
    double bound_m = 0.0;   // hypothesis exponent M (0: family default)
    std::vector<double> h_list{1e-2, 1e-3, 1e-4};
};

struct MaxPrincipleRow {
    double h = 0.0;
    double max_on_core = 0.0;    // max |f| on [4/5, 6/5]
    double cstar = 0.0;          // max_on_core * h / log(1/h)
    bool hypothesis_ok = true;
    double hypothesis_margin = 0.0;  // max over samples of |f| h^M / C (<= 1 ok)
};

struct MaxPrincipleResult {
    std::vector<MaxPrincipleRow> rows;
    bool hypotheses_ok = true;
    double cstar_fit = 0.0;      // fitted on the largest h
    bool pass_bound = true;      // max(h) <= cstar_fit log(1/h)/h for all h
    double stability_ratio = 0.0;  // max/min of cstar over h_list
    bool stable_factor2 = false;
    std::string family_name;
};

MaxPrincipleResult verify_max_principle(const MaxPrincipleCase& c);

Complex family_eval(const MaxPrincipleCase& c, double h, Complex z);

}  // namespace extlab::maxprinciple
