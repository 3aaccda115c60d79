#pragma once

// Estimators used on the coincidence counts: rates, the herald-normalized
// conversion efficiency, transmittance compensation, routing efficiencies,
// and Poisson error propagation.
//
// Uncertainty model: raw counts are Poisson (sigma = sqrt(N)); relative
// errors of independent factors add in quadrature, scaled by their power.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "spconv/model.hpp"

namespace spconv {

struct Measured {
    double value = 0.0;
    double std_error = 0.0;
};

struct Rates {
    double c_n_rate = 0.0;  // n-fold coincidences per second
    double c_h_rate = 0.0;  // n-herald triggers per second
};

Rates count_rates(std::span<const OutputRecord> outputs, std::span<const TriggerEvent> triggers,
                  std::int64_t slots_simulated, double rep_rate_hz);
Rates count_rates(std::int64_t coincidences, std::int64_t triggers, std::int64_t slots_simulated, double rep_rate_hz);

/// S(n) = (C(n) / C_h(n)) / (P_h(1) eta_D)^n.
EfficiencyEstimate estimate_s(double c_n_rate, double c_h_rate, double p_h1_etaD, int n);
/// Same estimator with quadrature propagation of the input errors.
EfficiencyEstimate estimate_s(Measured c_n_rate, Measured c_h_rate, Measured p_h1_etaD, int n);

/// s / t^n, relative errors combined in quadrature. Keeps the input method.
EfficiencyEstimate compensate_transmittance(const EfficiencyEstimate& s, Measured transmittance, int n);

/// Detection counts indexed by (photon, port), conditioned on triggers.
class RoutingTable {
  public:
    explicit RoutingTable(int n_modes = 0);

    int n_modes() const { return n_; }
    void add(const OutputRecord& output);
    void merge(const RoutingTable& other);
    std::int64_t count(int photon, int port) const;
    std::int64_t detections_of(int photon) const;
    /// Row-normalized table: P(photon i detected at port k | detected).
    std::vector<std::vector<double>> probabilities() const;

    bool operator==(const RoutingTable&) const = default;

  private:
    int n_;
    std::vector<std::int64_t> counts_;
};

/// eta_i = count(i, i) / detections_of(i), divided by corrections[i]
/// (defaults to 1). Binomial standard errors. Throws when a photon was never
/// detected.
std::vector<Measured> estimate_routing_efficiencies(const RoutingTable& table,
                                                    std::span<const double> corrections = {});

struct CountInput {
    double value = 0.0;
    std::optional<double> std_error;  // unset: value is a raw Poisson count
};

enum class Formula {
    Quotient,  // inputs {numerator, denominator}
    HeraldNormalized,       // inputs {C(n), C_h(n), P_h(1) eta_D}
};

double poisson_relative_error(double count);

/// Absolute standard error of the formula's result.
double propagate_counting_uncertainty(std::span<const CountInput> inputs, Formula formula, int n = 1);

}  // namespace spconv
