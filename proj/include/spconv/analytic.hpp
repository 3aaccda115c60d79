#pragma once

// Closed-form conversion efficiencies for the three routing strategies.

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace spconv::analytic {

/// Active routers driven by n heralding signals: eta_sw^n. Requires n >= 1.
double s_heralded(int n, double eta_sw);

/// Active routers clocked by the pump, photon run phase unknown:
/// (1/n) [eta^n + (n-1) ((1-eta)/(n-1))^n]. Requires n >= 2.
double s_unheralded_clocked(int n, double eta_sw);

/// Balanced passive splitter tree, lossless: (1/n)^n.
double s_passive(int n);

/// t * mean(port_efficiencies). Throws on an empty list.
double switching_efficiency(double transmittance, std::span<const double> port_efficiencies);

struct EfficiencyCurve {
    std::string strategy;
    std::vector<std::pair<int, double>> points;  // (n, S(n)), n strictly increasing
};

struct EfficiencyCurves {
    EfficiencyCurve heralded;  // n = 1..n_max
    EfficiencyCurve clocked;   // n = 2..n_max
    EfficiencyCurve passive;   // n = 1..n_max
};

EfficiencyCurves efficiency_curves(int n_max, double eta_sw);

}  // namespace spconv::analytic
