#include "spconv/analytic.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace spconv::analytic {

namespace {

void require_eta(double eta_sw) {
    if (!(eta_sw >= 0.0 && eta_sw <= 1.0)) {
        throw std::invalid_argument("switching efficiency out of range [0, 1]: " + std::to_string(eta_sw));
    }
}

}  // namespace

double s_heralded(int n, double eta_sw) {
    if (n < 1) throw std::invalid_argument("s_heralded: n must be >= 1");
    require_eta(eta_sw);
    return std::pow(eta_sw, n);
}

double s_unheralded_clocked(int n, double eta_sw) {
    if (n < 2) {
        throw std::invalid_argument("s_unheralded_clocked: n must be >= 2 (use s_heralded for a single photon)");
    }
    require_eta(eta_sw);
    const double nd = n;
    const double misroute = (1.0 - eta_sw) / (nd - 1.0);
    return (std::pow(eta_sw, n) + (nd - 1.0) * std::pow(misroute, n)) / nd;
}

double s_passive(int n) {
    if (n < 1) throw std::invalid_argument("s_passive: n must be >= 1");
    return std::pow(1.0 / n, n);
}

double switching_efficiency(double transmittance, std::span<const double> port_efficiencies) {
    if (port_efficiencies.empty()) throw std::invalid_argument("switching_efficiency: empty port list");
    if (!(transmittance >= 0.0 && transmittance <= 1.0)) {
        throw std::invalid_argument("transmittance out of range [0, 1]");
    }
    for (double eta : port_efficiencies) {
        if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("port efficiency out of range [0, 1]");
    }
    const double sum = std::accumulate(port_efficiencies.begin(), port_efficiencies.end(), 0.0);
    return transmittance * sum / static_cast<double>(port_efficiencies.size());
}

EfficiencyCurves efficiency_curves(int n_max, double eta_sw) {
    if (n_max < 2) throw std::invalid_argument("efficiency_curves: n_max must be >= 2");
    require_eta(eta_sw);
    EfficiencyCurves curves{{"heralded", {}}, {"clocked", {}}, {"passive", {}}};
    for (int n = 1; n <= n_max; ++n) {
        curves.heralded.points.emplace_back(n, s_heralded(n, eta_sw));
        if (n >= 2) curves.clocked.points.emplace_back(n, s_unheralded_clocked(n, eta_sw));
        curves.passive.points.emplace_back(n, s_passive(n));
    }
    return curves;
}

}  // namespace spconv::analytic
